#include <doctest.h>

#include <cmath>
#include <string>

#include "qles/problems.hpp"

using namespace qles;

namespace {

NonlinearityPair zero_pair() {
    NonlinearityPair p;
    p.f = [](std::size_t, double, double) { return 0.0; };
    p.g = p.f;
    return p;
}

SampleSpec small_spec() {
    SampleSpec s;
    s.points = 41;
    s.random_samples = 200;
    s.max_nodes = 4;
    return s;
}

}  // namespace

TEST_CASE("critical exponents") {
    CHECK(critical_exponent(1.5, 2) == doctest::Approx(6.0));
    CHECK(critical_exponent(2.0, 3) == doctest::Approx(6.0));
    CHECK(std::isinf(critical_exponent(2.0, 2)));
    CHECK(std::isinf(critical_exponent(3.0, 2)));
}

TEST_CASE("growth window validation names the inequality") {
    const MeshPtr m = Mesh::rectangle({0, 0}, {1, 1}, {8, 8});
    CHECK_NOTHROW(example_problem(m, 1.5, 1.5, -0.25, -0.25, 0.1, 2.0));
    try {
        example_problem(m, 1.5, 1.5, -0.25, -0.25, 0.1, 5.0);
        FAIL("C = 5 accepted");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("1 < C < min") != std::string::npos);
    }
    try {
        example_problem(m, 1.5, 1.5, -0.5, -0.25, 0.1, 2.0);
        FAIL("unbalanced exponents accepted");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("(alpha+1)/p + (beta+1)/q = 1") != std::string::npos);
    }
    CHECK_THROWS_AS(example_problem(m, 1.5, 1.5, -0.25, -0.25, -1.0, 2.0), InputError);
}

TEST_CASE("example nonlinearity values") {
    const MeshPtr m = Mesh::interval(0.0, 1.0, 4);
    const ProblemSpec prob = example_problem(m, 1.5, 1.5, -0.25, -0.25, 0.1, 2.0);
    const double a = -0.25;
    const double br2 = 1.0 / (1.0 + std::pow(2.0, -a)) + std::pow(2.0, a);
    CHECK(prob.pair.f(1, 2.0, 3.0) == doctest::Approx(0.05 * br2 * std::pow(3.0, 0.75)));
    CHECK(prob.pair.g(1, 3.0, 2.0) == doctest::Approx(0.05 * std::pow(3.0, 0.75) * br2));
    // At s = 0 the bracket is 2.
    CHECK(prob.pair.f(2, 0.0, 16.0) == doctest::Approx(0.1 * 8.0));
    const double br_half = 1.0 / (1.0 + std::pow(0.5, 0.25)) + 1.0;
    CHECK(prob.pair.f(2, -0.5, -1.0) == doctest::Approx(0.05 * br_half));
    const Field u = Field::constant(m, 2.0), v = Field::constant(m, 3.0);
    CHECK(eval_f(prob.pair, u, v)[0] == doctest::Approx(prob.pair.f(0, 2.0, 3.0)));
    CHECK(eval_g(prob.pair, u, v)[0] == doctest::Approx(prob.pair.g(0, 2.0, 3.0)));
}

TEST_CASE("growth check flags the adversarial pair and passes the zero pair") {
    const MeshPtr m = Mesh::rectangle({0, 0}, {1, 1}, {8, 8});
    const ProblemSpec prob = example_problem(m, 1.5, 1.5, -0.25, -0.25, 0.1, 2.0);
    const ViolationReport z = check_H2(zero_pair(), prob.hyp, m, small_spec());
    CHECK(z.ok());
    CHECK(z.checked > 0);
    const ViolationReport adv = check_H2(adversarial_pair(1.5, 2.0), prob.hyp, m, small_spec());
    CHECK_FALSE(adv.ok());
    CHECK(adv.worst_margin < 0.0);
    CHECK(std::abs(adv.worst_point.s) == doctest::Approx(10.0));
    // With g = 0 the min of |sf| and |tg| vanishes, so the conventional reading cannot see it.
    CHECK(check_H2(adversarial_pair(1.5, 2.0), prob.hyp, m, small_spec(), LatticeReading::standard).ok());
    CHECK(check_H2(prob.pair, prob.hyp, m, small_spec(), LatticeReading::standard).ok());
}

TEST_CASE("monotonicity check") {
    const MeshPtr m = Mesh::interval(0.0, 1.0, 6);
    const ProblemSpec prob = example_problem(m, 1.5, 1.5, -0.25, -0.25, 0.1, 2.0);
    CHECK(check_H3(prob.pair, m, SampleSpec::positive_cone(10.0)).ok());
    NonlinearityPair inc = zero_pair();
    inc.f = [](std::size_t, double s, double) { return s; };
    const ViolationReport r = check_H3(inc, m, small_spec());
    CHECK_FALSE(r.ok());
    CHECK(r.worst_point.slot == "f");
}

TEST_CASE("fitted lower-bound constants pass and their double fails") {
    const MeshPtr m = Mesh::interval(0.0, 1.0, 6);
    ProblemSpec prob = example_problem(m, 1.5, 1.5, -0.25, -0.25, 0.1, 2.0);
    SampleSpec cone = SampleSpec::positive_cone(10.0);
    cone.points = 61;
    const auto [cf, cg] = fit_H4_constants(prob.pair, 0.0, 0.0, m, cone);
    CHECK(cf > 0.0);
    CHECK(cg > 0.0);
    prob.hyp.alpha_hat = 0.0;
    prob.hyp.beta_hat = 0.0;
    prob.hyp.a_p = Field::constant(m, cf);
    prob.hyp.a_q = Field::constant(m, cg);
    CHECK(check_H4(prob.pair, prob.hyp, m, cone).ok());
    prob.hyp.a_p = Field::constant(m, 2.0 * cf);
    CHECK_FALSE(check_H4(prob.pair, prob.hyp, m, cone).ok());
    HypothesisSet bare = prob.hyp;
    bare.alpha_hat.reset();
    CHECK_THROWS_AS(check_H4(prob.pair, bare, m, cone), InputError);
}

TEST_CASE("manufactured cases") {
    const ManufacturedCase t = manufactured(3.0, "torsion_1d", 9);
    CHECK(t.u_exact.is_dirichlet());
    CHECK(t.u_exact[5] == doctest::Approx(2.0 / 3.0));
    const ManufacturedCase s = manufactured(2.0, "sine_p2", 9);
    CHECK(s.h[5] == doctest::Approx(std::pow(std::acos(-1.0), 2)));
    CHECK_THROWS_AS(manufactured(1.5, "sine_p2", 9), InputError);
    CHECK_THROWS_AS(manufactured(2.0, "nope", 9), InputError);
}

TEST_CASE("positivity data validation") {
    HypothesisSet h;
    h.k_pq = Field::constant(Mesh::interval(0.0, 1.0, 3), 1.0);
    h.alpha_hat = 0.5;
    h.beta_hat = 0.0;
    CHECK_THROWS_AS(h.validate_positivity(), InputError);
    h.alpha_hat = 0.0;
    CHECK_NOTHROW(h.validate());
}
