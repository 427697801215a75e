#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "qles/config.hpp"
#include "qles/io.hpp"
#include "qles/run.hpp"

using namespace qles;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("qles_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("defaults and typed getters") {
    RunConfig c;
    CHECK(c.get_double("problem.p") == doctest::Approx(1.5));
    CHECK(c.get_int("mesh.n") == 64);
    CHECK_FALSE(c.get_bool("run.concurrent"));
    CHECK(c.get_list("homotopy.ladder").size() == 4);
    CHECK(c.get_double_or("eigen.p", 2.5) == doctest::Approx(2.5));
    c.set("eigen.p=3");
    CHECK(c.get_double_or("eigen.p", 2.5) == doctest::Approx(3.0));
    c.set("mesh.n", "abc");
    CHECK_THROWS_AS(c.get_int("mesh.n"), InputError);
    CHECK_THROWS_AS(c.set("nonsense"), InputError);
    CHECK_THROWS_AS(c.set("plap.bogus=1"), InputError);
    CHECK(RunConfig::help_text().find("picard.theta") != std::string::npos);
}

TEST_CASE("config text: comments, overrides and unknown keys") {
    RunConfig c;
    c.load_text("# comment\nmesh.n = 16   # trailing\n\nproblem.k=0.2\n");
    CHECK(c.get_int("mesh.n") == 16);
    CHECK(c.get_double("problem.k") == doctest::Approx(0.2));
    try {
        c.load_text("mesh.n = 8\nfoo.bar = 1\nbaz.qux = 2\n", "cfg.txt");
        FAIL("unknown keys accepted");
    } catch (const InputError& e) {
        const std::string m = e.what();
        CHECK(m.find("unknown config keys in cfg.txt") != std::string::npos);
        CHECK(m.find("foo.bar") != std::string::npos);
        CHECK(m.find("baz.qux") != std::string::npos);
    }
    CHECK_THROWS_AS(c.load_text("just words\n"), InputError);
    CHECK_THROWS_AS(c.load_file("/nonexistent/qles.cfg"), InputError);
}

TEST_CASE("field CSV round trip is exact") {
    const fs::path d = tmp_dir("csv");
    const MeshPtr m = Mesh::rectangle({0, 0}, {1, 2}, {4, 3});
    const Field f = Field::sample(m, [](double x, double y) { return std::exp(x) / 3.0 + y * 1e-17; });
    write_field_csv(d / "f.csv", f);
    const Field g = read_field_csv(d / "f.csv", m);
    for (std::size_t k = 0; k < f.size(); ++k) CHECK(g[k] == f[k]);
    CHECK_THROWS_AS(read_field_csv(d / "f.csv", Mesh::rectangle({0, 0}, {1, 2}, {4, 4})), InputError);
    CHECK_THROWS_AS(read_field_csv(d / "f.csv", Mesh::interval(0, 1, 4)), InputError);
    CHECK_THROWS_AS(read_field_csv(d / "missing.csv", m), InputError);
}

TEST_CASE("non-finite JSON numbers become null") {
    CHECK(num(INFINITY).is_null());
    CHECK(num(NAN).is_null());
    CHECK(num(2.5).get<double>() == 2.5);
}

TEST_CASE("run writes a reproducible report") {
    const fs::path a = tmp_dir("run_a"), b = tmp_dir("run_b");
    auto cfg_for = [](const fs::path& out) {
        RunConfig c;
        c.subcommand = "validate";
        c.set("validate.n", "128");
        c.set("validate.tol", "1e-3");
        c.set("run.out", out.string());
        return c;
    };
    const RunOutcome r1 = run(cfg_for(a));
    const RunOutcome r2 = run(cfg_for(b));
    CHECK(r1.exit_code == exit_certified);
    CHECK(r1.report["schema_version"] == kReportSchemaVersion);
    CHECK(r1.report["status"] == "certified");
    CHECK_FALSE(r1.report["config"].contains("run.out"));
    CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
    CHECK(fs::exists(a / "metadata.json"));
    for (const auto& art : r1.artifacts) CHECK(fs::exists(a / art));
    CHECK(std::is_sorted(r1.artifacts.begin(), r1.artifacts.end()));

    RunConfig bad = cfg_for(a);
    bad.subcommand = "frobnicate";
    CHECK_THROWS_AS(run(bad), InputError);
    RunConfig badC = cfg_for(a);
    badC.subcommand = "solve";
    badC.set("problem.C", "5");
    CHECK_THROWS_AS(run(badC), InputError);
}

TEST_CASE("a failing manufactured check exits not-converged") {
    RunConfig c;
    c.subcommand = "validate";
    c.set("validate.n", "16");
    c.set("validate.tol", "1e-12");
    c.set("run.out", tmp_dir("run_fail").string());
    const RunOutcome r = run(c);
    CHECK(r.exit_code == exit_not_converged);
    CHECK(r.report["status"] == "not_converged");
}
