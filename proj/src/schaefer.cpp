#include "qles/schaefer.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

#include "qles/spectral.hpp"

namespace qles {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

void check_pair(const Field& u, const Field& v) {
    if (!u.mesh || u.mesh != v.mesh) throw InputError("u and v must share one mesh");
    if (!u.is_dirichlet() || !v.is_dirichlet()) throw InputError("u and v must vanish on the boundary");
}

// -Delta_p is (p-1)-homogeneous, so the right side is scaled to unit max and
// the solution scaled back. The eps ladder then always acts at unit gradient
// scale; with a fixed eps_min, tiny right sides would see a linear operator.
PlapResult subsolve(const std::string& tag, const Field& h, double p, const PlapConfig& cfg,
                    const std::optional<Field>& warm) {
    const double H = norm_Lr(h, std::numeric_limits<double>::infinity());
    PlapResult r;
    if (H == 0.0) {
        r.z = Field(h.mesh);
        r.trace.converged = true;
        return r;
    }
    const double c = std::pow(H, 1.0 / (p - 1.0));
    try {
        std::optional<Field> w;
        if (warm) w = (1.0 / c) * *warm;
        r = solve_plap((1.0 / H) * h, p, cfg, w);
    } catch (const InputError&) {
        throw;
    } catch (const std::exception& e) {
        throw SubsolveError(tag, "sub-solve for " + tag + " failed: " + e.what());
    }
    if (!r.trace.converged)
        throw SubsolveError(tag, "sub-solve for " + tag + " did not converge (residual " +
                                     fmt(r.trace.final_residual * H) + ")");
    for (auto& x : r.z.values) x *= c;
    r.trace.final_residual *= H;
    return r;
}

}  // namespace

double pair_norm(const Field& u, const Field& v, double p, double q) { return norm_W1p(u, p) + norm_W1p(v, q); }

std::pair<double, double> pair_residuals(const ProblemSpec& prob, const Field& u, const Field& v, double tau) {
    Field hu = eval_f(prob.pair, u, v);
    Field hv = eval_g(prob.pair, u, v);
    const double su = std::pow(tau, prob.p - 1.0), sv = std::pow(tau, prob.q - 1.0);
    for (auto& x : hu.values) x *= su;
    for (auto& x : hv.values) x *= sv;
    return {residual_norm(residual_eps(u, hu, prob.p, 0.0)), residual_norm(residual_eps(v, hv, prob.q, 0.0))};
}

SolutionPair apply_T(const Field& u, const Field& v, const ProblemSpec& prob, const PlapConfig& cfg,
                     const ApplyOptions& opt) {
    check_pair(u, v);
    const Field hu = eval_f(prob.pair, u, v);
    const Field hv = eval_g(prob.pair, u, v);
    for (std::size_t k = 0; k < hu.size(); ++k)
        if (!std::isfinite(hu[k]) || !std::isfinite(hv[k]))
            throw NumericalError("nonlinearity is not finite at node " + std::to_string(k));

    PlapResult ru, rv;
    if (opt.concurrent) {
        auto fu = std::async(std::launch::async, [&] { return subsolve("u", hu, prob.p, cfg, opt.z0); });
        rv = subsolve("v", hv, prob.q, cfg, opt.w0);
        ru = fu.get();
    } else {
        ru = subsolve("u", hu, prob.p, cfg, opt.z0);
        rv = subsolve("v", hv, prob.q, cfg, opt.w0);
    }
    SolutionPair out;
    out.u = std::move(ru.z);
    out.v = std::move(rv.z);
    out.x_norm = pair_norm(out.u, out.v, prob.p, prob.q);
    out.res_u = ru.trace.final_residual;
    out.res_v = rv.trace.final_residual;
    return out;
}

void PicardConfig::validate() const {
    if (!(theta > 0.0 && theta <= 1.0)) throw InputError("damping theta must lie in (0, 1]");
    if (!(tol_fix > 0.0) || !(tol_res > 0.0)) throw InputError("Picard tolerances must be positive");
    if (max_iter < 1 || patience < 1) throw InputError("Picard iteration limits must be positive");
    if (!(delta > 0.0)) throw InputError("initial amplitude delta must be positive");
}

PicardResult picard_solve(const ProblemSpec& prob, double tau, const PicardConfig& pcfg, const PlapConfig& cfg) {
    pcfg.validate();
    cfg.validate();
    if (!(tau > 0.0 && tau <= 1.0)) throw InputError("tau must lie in (0, 1]");
    const MeshPtr& mesh = prob.mesh;
    const double p = prob.p, q = prob.q;

    Field u = pcfg.u0 ? *pcfg.u0 : pcfg.delta * sine_bump(mesh);
    Field v = pcfg.v0 ? *pcfg.v0 : pcfg.delta * sine_bump(mesh);
    check_pair(u, v);

    PlapConfig sub = cfg;
    sub.skip_ladder_when_warm = true;
    ApplyOptions aopt;
    aopt.concurrent = pcfg.concurrent;

    PicardResult res;
    res.trace.tau = tau;
    const double limit = std::isfinite(pcfg.theta_bound) ? 10.0 * pcfg.theta_bound
                                                         : std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    int best_iter = 0;
    for (int it = 1; it <= pcfg.max_iter; ++it) {
        SolutionPair t;
        try {
            t = apply_T(u, v, prob, sub, aopt);
        } catch (const SubsolveError& e) {
            res.trace.reason = e.what();
            break;
        }
        aopt.z0 = t.u;
        aopt.w0 = t.v;
        Field du(mesh), dv(mesh);
        for (std::size_t k = 0; k < u.size(); ++k) {
            const double nu = (1.0 - pcfg.theta) * u[k] + pcfg.theta * tau * t.u[k];
            const double nv = (1.0 - pcfg.theta) * v[k] + pcfg.theta * tau * t.v[k];
            du[k] = nu - u[k];
            dv[k] = nv - v[k];
            u[k] = nu;
            v[k] = nv;
        }
        IterRow row;
        row.iter = it;
        row.x_norm = pair_norm(u, v, p, q);
        row.delta_norm = pair_norm(du, dv, p, q);
        std::tie(row.res_u, row.res_v) = pair_residuals(prob, u, v, tau);
        res.trace.rows.push_back(row);

        if (!std::isfinite(row.x_norm) || !std::isfinite(row.res_u) || !std::isfinite(row.res_v)) {
            res.trace.reason = "non-finite iterate";
            break;
        }
        if (row.delta_norm <= pcfg.tol_fix * std::max(1.0, row.x_norm) && row.res_u <= pcfg.tol_res &&
            row.res_v <= pcfg.tol_res) {
            res.trace.converged = true;
            res.trace.reason = "converged";
            break;
        }
        if (row.x_norm > limit) {
            res.trace.reason = "diverged: x_norm " + fmt(row.x_norm) + " exceeds 10*Theta = " + fmt(limit);
            break;
        }
        const double r = std::max(row.res_u, row.res_v) + row.delta_norm;
        if (r < 0.999 * best) {
            best = r;
            best_iter = it;
        } else if (it - best_iter >= pcfg.patience) {
            res.trace.reason = "no progress within " + std::to_string(pcfg.patience) + " iterations";
            break;
        }
        if (it == pcfg.max_iter) res.trace.reason = "iteration limit reached";
    }
    res.pair.u = std::move(u);
    res.pair.v = std::move(v);
    res.pair.x_norm = pair_norm(res.pair.u, res.pair.v, p, q);
    std::tie(res.pair.res_u, res.pair.res_v) = pair_residuals(prob, res.pair.u, res.pair.v, tau);
    return res;
}

HomotopyResult tau_homotopy(const ProblemSpec& prob, const std::vector<double>& ladder, const PicardConfig& pcfg,
                            const PlapConfig& cfg) {
    if (ladder.empty()) throw InputError("tau ladder is empty");
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        if (!(ladder[i] > 0.0 && ladder[i] <= 1.0)) throw InputError("tau ladder entries must lie in (0, 1]");
        if (i > 0 && !(ladder[i] > ladder[i - 1])) throw InputError("tau ladder must be strictly increasing");
    }
    if (ladder.back() != 1.0) throw InputError("tau ladder must end at 1");
    HomotopyResult out;
    PicardConfig rung = pcfg;
    for (double tau : ladder) {
        PicardResult r = picard_solve(prob, tau, rung, cfg);
        out.rungs.push_back(r.trace);
        out.pair = r.pair;
        if (!r.trace.converged) {
            out.failed_tau = tau;
            return out;
        }
        rung.u0 = r.pair.u;
        rung.v0 = r.pair.v;
    }
    out.converged = true;
    return out;
}

double window_eps0(double K, double Cp, double Cq, double p, double q, double C) {
    if (!(Cp > 0.0) || !(Cq > 0.0)) throw InputError("embedding constants must be positive");
    if (!(K >= 0.0)) throw InputError("K must be nonnegative");
    const double m = std::min(std::pow(Cp, p * (1.0 - C)), std::pow(Cq, q * (1.0 - C)));
    return m / (2.0 * K);
}

NormWindow norm_window(const ProblemSpec& prob, const MeshPtr& mesh, const NormWindowOptions& opt) {
    prob.hyp.validate_growth();
    const double p = prob.p, q = prob.q, C = prob.hyp.C;
    NormWindow w;
    w.K = prob.hyp.k_sup();
    w.Cp = opt.Cp ? *opt.Cp : embedding_const(p, p * C, mesh).constant;
    w.Cq = opt.Cq ? *opt.Cq : embedding_const(q, q * C, mesh).constant;
    w.eps0 = window_eps0(w.K, w.Cp, w.Cq, p, q, C);

    // phi(M) > 0 exactly where the majorant inequality fails. phi(0) = -1 and
    // phi -> -inf, so the failure set is a bounded band; theta is its upper edge.
    const double a = std::pow(w.Cp, p * C), b = std::pow(w.Cq, q * C), lo_exp = std::min(p, q);
    auto phi = [&](double M) {
        return std::pow(M, lo_exp) - w.K * (a * std::pow(M, p * C) + b * std::pow(M, q * C)) - 1.0;
    };
    auto bisect = [&](double x0, double x1) {
        const bool rising = phi(x0) < 0.0;
        for (int i = 0; i < 200; ++i) {
            const double mid = std::sqrt(x0 * x1);
            if ((phi(mid) < 0.0) == rising) x0 = mid;
            else x1 = mid;
        }
        return std::sqrt(x0 * x1);
    };
    std::vector<double> roots;
    double prev_x = 1e-8, prev = phi(prev_x);
    for (int i = 1; i <= 2400; ++i) {
        const double x = 1e-8 * std::pow(10.0, i * 0.01);
        const double cur = phi(x);
        if (std::isfinite(cur) && std::isfinite(prev) && ((prev < 0.0) != (cur < 0.0))) roots.push_back(bisect(prev_x, x));
        prev_x = x;
        prev = cur;
    }
    if (w.K == 0.0) w.flags.push_back("K = 0: eps0 is infinite and the majorant never binds");
    if (roots.empty()) {
        w.theta = std::numeric_limits<double>::infinity();
        w.theta_finite = false;
        w.flags.push_back("majorant inequality holds for every M: no finite theta from the crossover");
    } else {
        w.theta = roots.back();
        w.theta_lower = roots.size() > 1 ? roots[roots.size() - 2] : 0.0;
        w.theta_finite = true;
    }
    if (!(w.eps0 < w.theta)) {
        w.window_empty = true;
        w.flags.push_back("window_empty: eps0 = " + fmt(w.eps0) + " is not below theta = " + fmt(w.theta));
    }
    w.flags.push_back("embedding constants are mesh-level lower-bound estimates, not the continuous constants");
    if (opt.with_coupled_eigenvalue) {
        w.lambda_pq = coupled_eig(p, q, prob.hyp.alpha, prob.hyp.beta, mesh).lambda;
        w.k_over_lambda = w.K / w.lambda_pq;
        if (w.k_over_lambda < 1.0)
            w.flags.push_back("K/lambda_pq = " + fmt(w.k_over_lambda) +
                              " < 1: the energy identity excludes nontrivial nonnegative solutions");
    }
    return w;
}

}  // namespace qles
