#include "qles/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>

#include "qles/kernels.hpp"

namespace qles {

namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

MeshPtr make_mesh(const RunConfig& c) {
    const int dim = c.get_int("mesh.dim");
    const int n = c.get_int("mesh.n");
    const double lo = c.get_double("mesh.lo"), hi = c.get_double("mesh.hi");
    if (dim == 1) return Mesh::interval(lo, hi, n);
    if (dim == 2) return Mesh::rectangle({lo, lo}, {hi, hi}, {n, n});
    throw InputError("mesh.dim must be 1 or 2");
}

ProblemSpec make_problem(const RunConfig& c, const MeshPtr& mesh, const std::string& name) {
    ProblemSpec prob =
        example_problem(mesh, c.get_double("problem.p"), c.get_double("problem.q"), c.get_double("problem.alpha"),
                        c.get_double("problem.beta"), c.get_double("problem.k"), c.get_double("problem.C"));
    if (name == "example") return prob;
    if (name == "zero") {
        prob.pair.f = [](std::size_t, double, double) { return 0.0; };
        prob.pair.g = [](std::size_t, double, double) { return 0.0; };
        prob.pair.label = "zero";
    } else if (name == "adversarial") {
        prob.pair = adversarial_pair(prob.p, prob.hyp.C);
    } else {
        throw InputError("problem.name must be example, zero or adversarial (got `" + name + "`)");
    }
    prob.label = name;
    return prob;
}

PlapConfig plap_config(const RunConfig& c) {
    PlapConfig p;
    p.eps_start = c.get_double("plap.eps_start");
    p.eps_min = c.get_double("plap.eps_min");
    p.eps_factor = c.get_double("plap.eps_factor");
    p.tol_grad = c.get_double("plap.tol");
    p.max_iter = c.get_int("plap.max_iter");
    p.validate();
    return p;
}

PicardConfig picard_config(const RunConfig& c) {
    PicardConfig p;
    p.theta = c.get_double("picard.theta");
    p.tol_fix = c.get_double("picard.tol_fix");
    p.tol_res = c.get_double("picard.tol_res");
    p.max_iter = c.get_int("picard.max_iter");
    p.patience = c.get_int("picard.patience");
    p.delta = c.get_double("picard.delta");
    p.concurrent = c.get_bool("run.concurrent");
    p.validate();
    return p;
}

QuotientOptions quotient_options(const RunConfig& c) {
    QuotientOptions q;
    q.restarts = c.get_int("eigen.restarts");
    q.max_iter = c.get_int("eigen.max_iter");
    q.seed = c.get_u64("run.seed");
    q.concurrent = c.get_bool("run.concurrent");
    if (q.restarts < 1 || q.max_iter < 1) throw InputError("eigen.restarts and eigen.max_iter must be positive");
    return q;
}

double interior_min(const Field& f) {
    double m = kInf;
    for (std::size_t k : f.mesh->interior_nodes()) m = std::min(m, f[k]);
    return m;
}

struct Context {
    const RunConfig& cfg;
    fs::path out;
    Json results = Json::object();
    std::vector<std::string> artifacts;

    void field(const std::string& name, const Field& f) {
        write_field_csv(out / name, f);
        artifacts.push_back(name);
    }
    void json(const std::string& name, const Json& j) {
        write_json(out / name, j);
        artifacts.push_back(name);
    }
    void iter_trace(const std::string& name, const IterTrace& t) {
        write_iter_trace_csv(out / name, t);
        artifacts.push_back(name);
    }
};

struct PairSolution {
    SolutionPair pair;
    bool certified = false;
};

Json pair_summary(const SolutionPair& s) {
    Json j;
    j["x_norm"] = num(s.x_norm);
    j["res_u"] = num(s.res_u);
    j["res_v"] = num(s.res_v);
    j["max_u"] = num(norm_Lr(s.u, kInf));
    j["max_v"] = num(norm_Lr(s.v, kInf));
    j["min_interior_u"] = num(interior_min(s.u));
    j["min_interior_v"] = num(interior_min(s.v));
    return j;
}

// Reads the pair from input.u / input.v, or runs the tau homotopy.
PairSolution obtain_pair(Context& ctx, const ProblemSpec& prob, double theta_bound) {
    const RunConfig& c = ctx.cfg;
    PairSolution ps;
    if (!c.get("input.u").empty() || !c.get("input.v").empty()) {
        if (c.get("input.u").empty() || c.get("input.v").empty())
            throw InputError("input.u and input.v must be given together");
        ps.pair.u = read_field_csv(c.get("input.u"), prob.mesh);
        ps.pair.v = read_field_csv(c.get("input.v"), prob.mesh);
        if (!ps.pair.u.is_dirichlet() || !ps.pair.v.is_dirichlet())
            throw InputError("input fields must vanish on the boundary");
        ps.pair.x_norm = pair_norm(ps.pair.u, ps.pair.v, prob.p, prob.q);
        std::tie(ps.pair.res_u, ps.pair.res_v) = pair_residuals(prob, ps.pair.u, ps.pair.v);
        const double tol = c.get_double("picard.tol_res");
        ps.certified = ps.pair.res_u <= tol && ps.pair.res_v <= tol;
        Json j = pair_summary(ps.pair);
        j["source"] = "input";
        j["certified"] = ps.certified;
        ctx.results["pair"] = j;
        return ps;
    }
    PicardConfig pc = picard_config(c);
    pc.theta_bound = theta_bound;
    const HomotopyResult h = tau_homotopy(prob, c.get_list("homotopy.ladder"), pc, plap_config(c));
    Json rungs = Json::array();
    for (std::size_t i = 0; i < h.rungs.size(); ++i) {
        const IterTrace& t = h.rungs[i];
        const std::string name = "iter_trace_rung" + std::to_string(i) + ".csv";
        ctx.iter_trace(name, t);
        Json r;
        r["tau"] = t.tau;
        r["converged"] = t.converged;
        r["iterations"] = t.rows.empty() ? 0 : t.rows.back().iter;
        r["reason"] = t.reason;
        r["x_norm"] = t.rows.empty() ? Json(nullptr) : num(t.rows.back().x_norm);
        r["res_u"] = t.rows.empty() ? Json(nullptr) : num(t.rows.back().res_u);
        r["res_v"] = t.rows.empty() ? Json(nullptr) : num(t.rows.back().res_v);
        r["trace"] = name;
        rungs.push_back(r);
    }
    ps.pair = h.pair;
    ps.certified = h.converged;
    Json j = pair_summary(ps.pair);
    j["source"] = "tau_homotopy";
    j["certified"] = ps.certified;
    j["failed_tau"] = h.failed_tau ? num(*h.failed_tau) : Json(nullptr);
    j["rungs"] = rungs;
    ctx.results["pair"] = j;
    ctx.field("u.csv", ps.pair.u);
    ctx.field("v.csv", ps.pair.v);
    return ps;
}

int cmd_solve(Context& ctx) {
    const RunConfig& c = ctx.cfg;
    const MeshPtr mesh = make_mesh(c);
    const ProblemSpec prob = make_problem(c, mesh, c.get("problem.name"));
    NormWindowOptions wo;
    wo.with_coupled_eigenvalue = true;
    const NormWindow w = norm_window(prob, mesh, wo);
    ctx.results["window"] = to_json(w);
    const PairSolution ps = obtain_pair(ctx, prob, w.theta);

    Json nt;
    nt["x_norm"] = num(ps.pair.x_norm);
    nt["threshold"] = num(0.1 * w.eps0);
    nt["ok"] = ps.pair.x_norm > 0.1 * w.eps0;
    ctx.results["nontriviality"] = nt;

    // Energy-identity inequality: the pair's coupled quotient is at least lambda_pq.
    const double cq = coupled_quotient(ps.pair.u, ps.pair.v, prob.p, prob.q, prob.hyp.alpha, prob.hyp.beta);
    Json ci;
    ci["quotient"] = num(cq);
    ci["lambda_pq"] = num(w.lambda_pq);
    ci["slack"] = num(cq - w.lambda_pq);
    ci["ok"] = std::isfinite(cq) && cq - w.lambda_pq >= -1e-6;
    if (!std::isfinite(cq)) ci["note"] = "quotient undefined: the coupling integral vanishes";
    ctx.results["coupled_inequality"] = ci;
    return ps.certified ? exit_certified : exit_not_converged;
}

int cmd_eigen(Context& ctx) {
    const RunConfig& c = ctx.cfg;
    const MeshPtr mesh = make_mesh(c);
    const QuotientOptions qo = quotient_options(c);
    const std::string kind = c.get("eigen.kind");
    const double p = c.get_double_or("eigen.p", c.get_double("problem.p"));
    if (kind == "plap") {
        const double b = c.get_double("eigen.weight");
        std::optional<Field> weight;
        if (b != 1.0) weight = Field::constant(mesh, b);
        const EigenResult r = first_eig_plap(p, mesh, weight, qo);
        ctx.json("eigen.json", to_json(r));
        ctx.field("eigenfield.csv", r.eigenfield);
        ctx.results["eigen"] = to_json(r);
        return r.converged ? exit_certified : exit_not_converged;
    }
    if (kind == "coupled") {
        const double q = c.get_double("problem.q");
        const EigenResult r =
            coupled_eig(p, q, c.get_double("problem.alpha"), c.get_double("problem.beta"), mesh, qo);
        ctx.json("eigen.json", to_json(r));
        ctx.field("eigenfield_u.csv", r.eigenfield);
        if (r.eigenfield_v) ctx.field("eigenfield_v.csv", *r.eigenfield_v);
        ctx.results["eigen"] = to_json(r);
        return r.converged ? exit_certified : exit_not_converged;
    }
    if (kind == "embedding") {
        const EmbeddingResult r = embedding_const(p, c.get_double("eigen.r"), mesh, qo);
        Json j;
        j["constant"] = num(r.constant);
        j["spread"] = num(r.spread);
        j["iters"] = static_cast<int>(r.ratio_history.size()) - 1;
        j["converged"] = r.converged;
        ctx.field("maximizer.csv", r.maximizer);
        ctx.results["embedding"] = j;
        return r.converged ? exit_certified : exit_not_converged;
    }
    throw InputError("eigen.kind must be plap, coupled or embedding (got `" + kind + "`)");
}

int cmd_fibering(Context& ctx) {
    const RunConfig& c = ctx.cfg;
    const MeshPtr mesh = make_mesh(c);
    ProblemSpec prob = make_problem(c, mesh, c.get("problem.name"));
    const double ah = c.get_double("fibering.alpha_hat"), bh = c.get_double("fibering.beta_hat");
    const double box = c.get_double("fibering.box");
    if (!(box > 0.0)) throw InputError("fibering.box must be positive");
    SampleSpec cone = SampleSpec::positive_cone(box);
    cone.seed = c.get_u64("run.seed");

    double a_u = 0.0, a_v = 0.0;
    if (c.get("fibering.a") == "auto") {
        std::tie(a_u, a_v) = fit_H4_constants(prob.pair, ah, bh, mesh, cone);
    } else {
        a_u = a_v = c.get_double("fibering.a");
    }
    const double b = c.get_double("fibering.b");
    prob.hyp.alpha_hat = ah;
    prob.hyp.beta_hat = bh;
    prob.hyp.a_p = Field::constant(mesh, a_u);
    prob.hyp.a_q = Field::constant(mesh, a_v);
    prob.hyp.b_p = Field::constant(mesh, b);
    prob.hyp.b_q = Field::constant(mesh, b);
    prob.hyp.validate_positivity();
    const ViolationReport h4 = check_H4(prob.pair, prob.hyp, mesh, cone);
    ctx.json("violations_H4.json", to_json(h4));
    Json weights;
    weights["a_p"] = num(a_u);
    weights["a_q"] = num(a_v);
    weights["b"] = num(b);
    weights["box"] = box;
    weights["H4_on_box"] = to_json(h4);
    ctx.results["weights"] = weights;

    const PairSolution ps = obtain_pair(ctx, prob, kInf);

    FiberingConfig fc;
    fc.quotient = quotient_options(c);
    fc.plap = plap_config(c);
    fc.tol_res = c.get_double("picard.tol_res");
    fc.allow_regime_ii = c.get_bool("fibering.allow_regime_ii");
    bool all = ps.certified;
    for (Slot slot : {Slot::u, Slot::v}) {
        const bool is_u = slot == Slot::u;
        const std::string tag = is_u ? "u" : "v";
        FiberingSpec fs;
        fs.a = Field::constant(mesh, is_u ? a_u : a_v);
        if (b != 0.0) fs.b = Field::constant(mesh, b);
        fs.lambda = c.get_double("fibering.lambda");
        fs.alpha_hat = ah;
        fs.beta_hat = bh;
        fs.frozen = is_u ? ps.pair.v : ps.pair.u;
        fs.exponent = is_u ? prob.p : prob.q;
        fs.partner_exponent = is_u ? prob.q : prob.p;
        fs.slot = slot;
        fs.N_formal = mesh->dim();
        Json j;
        try {
            const FiberingResult fr = solve_fibering(fs, mesh, fc);
            ctx.field("subsolution_" + tag + ".csv", fr.U);
            CertificateTolerances tol;
            tol.subsolution = fc.tol_res;
            const Certificate cert = comparison_certificate(fr.U, is_u ? ps.pair.u : ps.pair.v, prob,
                                                            fs.frozen, slot, tol);
            j = to_json(cert);
            j["M_lambda"] = num(fr.M_lambda);
            j["t_hat"] = num(fr.t_hat);
            j["lambda_b"] = num(fr.lambda_b);
            j["fibering_residual"] = num(fr.residual);
            j["constraint_residual"] = num(fr.constraint_residual);
            j["stationarity_residual"] = num(fr.stationarity_residual);
            j["warnings"] = fr.warnings;
            all = all && cert.verdict == Verdict::positive_certified;
        } catch (const NoSubsolutionError& e) {
            j["verdict"] = to_string(Verdict::not_certified);
            j["subsolution_ok"] = false;
            j["ordering_ok"] = false;
            const Field& comp = is_u ? ps.pair.u : ps.pair.v;
            const double floor = std::pow(fc.tol_res, 1.0 / (fs.exponent - 1.0));
            j["positivity_ok"] = interior_min(comp) > floor;
            j["min_interior_u"] = num(interior_min(comp));
            j["tolerances"] = {{"subsolution", fc.tol_res}, {"ordering", 1e-8}, {"positivity_floor", floor}};
            j["reason"] = e.what();
            all = false;
        }
        ctx.json("verdict_" + tag + ".json", j);
        ctx.results["verdict_" + tag] = j;
    }
    return all ? exit_certified : exit_not_converged;
}

int cmd_moser(Context& ctx) {
    const RunConfig& c = ctx.cfg;
    const MeshPtr mesh = make_mesh(c);
    const ProblemSpec prob = make_problem(c, mesh, c.get("problem.name"));
    const MoserLadder L = build_ladder(prob.p, prob.q, c.get_double_or("moser.C", prob.hyp.C),
                                       c.get_double("moser.D"), mesh->dim(), c.get_int("moser.kmax"));
    NormWindowOptions wo;
    wo.with_coupled_eigenvalue = false;
    const NormWindow w = norm_window(prob, mesh, wo);
    const PairSolution ps = obtain_pair(ctx, prob, w.theta);
    const BoundReport R = verify_T3(ps.pair.u, ps.pair.v, L, w.theta_finite ? std::optional<double>(w.theta)
                                                                             : std::nullopt);
    write_moser_csv(ctx.out / "moser.csv", L, R);
    ctx.artifacts.push_back("moser.csv");
    ctx.results["ladder"] = to_json(L);
    ctx.results["bound"] = to_json(R);
    return ps.certified && R.bound_holds ? exit_certified : exit_not_converged;
}

int cmd_check(Context& ctx) {
    const RunConfig& c = ctx.cfg;
    const MeshPtr mesh = make_mesh(c);
    std::string name = c.get("check.pair");
    if (name == "auto") name = c.get("problem.name");
    const ProblemSpec prob = make_problem(c, mesh, name);
    SampleSpec s;
    const double r = c.get_double("check.range");
    s.s_lo = s.t_lo = -r;
    s.s_hi = s.t_hi = r;
    s.points = c.get_int("check.points");
    s.random_samples = c.get_int("check.random");
    s.seed = c.get_u64("run.seed");
    const ViolationReport h2p = check_H2(prob.pair, prob.hyp, mesh, s, LatticeReading::paper);
    const ViolationReport h2s = check_H2(prob.pair, prob.hyp, mesh, s, LatticeReading::standard);
    const ViolationReport h3 = check_H3(prob.pair, mesh, s);
    SampleSpec cone = SampleSpec::positive_cone(r);
    cone.points = s.points;
    cone.random_samples = s.random_samples;
    cone.seed = s.seed;
    const ViolationReport h3c = check_H3(prob.pair, mesh, cone);
    ctx.json("violations_H2_paper.json", to_json(h2p));
    ctx.json("violations_H2_standard.json", to_json(h2s));
    ctx.json("violations_H3.json", to_json(h3));
    ctx.json("violations_H3_positive.json", to_json(h3c));
    ctx.results["pair"] = name;
    ctx.results["H2_paper"] = to_json(h2p);
    ctx.results["H2_standard"] = to_json(h2s);
    ctx.results["H3"] = to_json(h3);
    ctx.results["H3_positive_cone"] = to_json(h3c);
    return h2p.ok() && h3c.ok() ? exit_certified : exit_not_converged;
}

int cmd_validate(Context& ctx) {
    const RunConfig& c = ctx.cfg;
    const std::string name = c.get("validate.case");
    const double p = c.get_double_or("validate.p", name == "sine_p2" ? 2.0 : c.get_double("problem.p"));
    const ManufacturedCase mc = manufactured(p, name, c.get_int("validate.n"));
    const PlapResult r = solve_plap(mc.h, p, plap_config(c));
    double err = 0.0;
    for (std::size_t k = 0; k < r.z.size(); ++k) err = std::max(err, std::abs(r.z[k] - mc.u_exact[k]));
    ctx.field("solution.csv", r.z);
    ctx.field("exact.csv", mc.u_exact);
    write_solve_trace_csv(ctx.out / "solve_trace.csv", r.trace);
    ctx.artifacts.push_back("solve_trace.csv");
    const double tol = c.get_double("validate.tol");
    Json j;
    j["case"] = name;
    j["p"] = p;
    j["n"] = c.get_int("validate.n");
    j["max_error"] = num(err);
    j["tolerance"] = tol;
    j["solver_converged"] = r.trace.converged;
    j["final_residual"] = num(r.trace.final_residual);
    j["iterations"] = r.trace.total_iterations;
    ctx.results["validate"] = j;
    return r.trace.converged && err <= tol ? exit_certified : exit_not_converged;
}

int cmd_sweep(Context& ctx) {
    const RunConfig& c = ctx.cfg;
    const MeshPtr mesh = make_mesh(c);
    const ProblemSpec prob = make_problem(c, mesh, c.get("problem.name"));
    const PicardConfig pc = picard_config(c);
    const PlapConfig plc = plap_config(c);
    const auto taus = c.get_list("sweep.taus");
    std::ofstream csv(ctx.out / "sweep_tau.csv", std::ios::binary);
    if (!csv) throw InputError("cannot write sweep_tau.csv");
    csv << "tau,converged,iterations,x_norm,res_u,res_v\n";
    csv.precision(17);
    ctx.artifacts.push_back("sweep_tau.csv");
    Json rows = Json::array();
    bool all = true;
    for (double tau : taus) {
        const PicardResult r = picard_solve(prob, tau, pc, plc);
        const int its = r.trace.rows.empty() ? 0 : r.trace.rows.back().iter;
        csv << tau << ',' << (r.trace.converged ? 1 : 0) << ',' << its << ',' << r.pair.x_norm << ','
            << r.pair.res_u << ',' << r.pair.res_v << '\n';
        Json j;
        j["tau"] = tau;
        j["converged"] = r.trace.converged;
        j["iterations"] = its;
        j["x_norm"] = num(r.pair.x_norm);
        j["res_u"] = num(r.pair.res_u);
        j["res_v"] = num(r.pair.res_v);
        j["reason"] = r.trace.reason;
        rows.push_back(j);
        all = all && r.trace.converged;
    }
    ctx.results["sweep"] = rows;
    return all ? exit_certified : exit_not_converged;
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

RunOutcome run(const RunConfig& cfg) {
    const auto& subs = kSubcommands;
    if (std::find(std::begin(subs), std::end(subs), cfg.subcommand) == std::end(subs))
        throw InputError("unknown subcommand `" + cfg.subcommand + "`");
    const std::string started = utc_now();
    const auto t0 = std::chrono::steady_clock::now();

    Context ctx{cfg, fs::path(cfg.get("run.out")), Json::object(), {}};
    fs::create_directories(ctx.out);
    int code = exit_certified;
    const std::string& s = cfg.subcommand;
    if (s == "solve") code = cmd_solve(ctx);
    else if (s == "eigen") code = cmd_eigen(ctx);
    else if (s == "fibering") code = cmd_fibering(ctx);
    else if (s == "moser") code = cmd_moser(ctx);
    else if (s == "check") code = cmd_check(ctx);
    else if (s == "validate") code = cmd_validate(ctx);
    else code = cmd_sweep(ctx);

    RunOutcome out;
    out.exit_code = code;
    std::sort(ctx.artifacts.begin(), ctx.artifacts.end());
    ctx.artifacts.erase(std::unique(ctx.artifacts.begin(), ctx.artifacts.end()), ctx.artifacts.end());
    Json config = Json::object();
    // The output location is not a run parameter; it goes to the metadata.
    for (const auto& [k, v] : cfg.values())
        if (k != "run.out") config[k] = v;
    Json report;
    report["schema_version"] = kReportSchemaVersion;
    report["subcommand"] = s;
    report["status"] = code == exit_certified ? "certified" : "not_converged";
    report["exit_code"] = code;
    report["seed"] = cfg.get_u64("run.seed");
    report["config"] = config;
    report["results"] = ctx.results;
    report["artifacts"] = ctx.artifacts;
    write_json(ctx.out / "report.json", report);

    Json meta;
    meta["schema_version"] = kReportSchemaVersion;
    meta["started_utc"] = started;
    meta["finished_utc"] = utc_now();
    meta["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    meta["output_dir"] = cfg.get("run.out");
    meta["simd_kernels"] = std::string(simd::kernels().name);
    write_json(ctx.out / "metadata.json", meta);

    out.report = std::move(report);
    out.artifacts = std::move(ctx.artifacts);
    return out;
}

}  // namespace qles
