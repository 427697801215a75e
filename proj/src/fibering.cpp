#include "qles/fibering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qles {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

double sgnpow(double s, double e) { return s == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(s), e), s); }

double interior_min(const Field& f) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k : f.mesh->interior_nodes()) m = std::min(m, f[k]);
    return m;
}

}  // namespace

void FiberingSpec::validate() const {
    if (!a.mesh || !frozen.mesh || a.mesh != frozen.mesh) throw InputError("fibering weights and frozen field must share one mesh");
    if (b.mesh && b.mesh != a.mesh) throw InputError("fibering weight b lives on a different mesh");
    if (!(exponent > 1.0)) throw InputError("fibering exponent must exceed 1");
    if (!(lambda >= 0.0)) throw InputError("fibering lambda must be nonnegative");
    if (!(alpha_hat > -1.0) || !(beta_hat > -1.0)) throw InputError("fibering exponents must exceed -1");
    if (own_power() == exponent) throw InputError("fibering exponents violate alpha_hat + 1 != p (fiber map degenerates)");
    const double own_star = critical_exponent(exponent, N_formal);
    const double partner_star = critical_exponent(partner_exponent, N_formal);
    const double s = own_power() / own_star + frozen_power() / partner_star;
    if (!(s < 1.0))
        throw InputError("fibering exponents violate (alpha_hat+1)/p* + (beta_hat+1)/q* < 1: left side is " + fmt(s));
    bool positive = false;
    for (std::size_t k : a.mesh->interior_nodes()) positive = positive || a[k] > 0.0;
    if (!positive) throw InputError("fibering weight a has no positive part inside the domain");
}

double A_p(const Field& u, const FiberingSpec& spec, Field* grad) {
    const Mesh& m = *u.mesh;
    const auto& w = m.quad_weights();
    const double e = spec.own_power(), fe = spec.frozen_power();
    double s = 0.0;
    if (grad) *grad = Field(u.mesh);
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double au = std::abs(u[k]);
        if (au == 0.0) continue;
        const double c = w[k] * spec.a[k] * std::pow(std::abs(spec.frozen[k]), fe);
        const double ue = std::pow(au, e);
        s += c * ue;
        if (grad && !m.on_boundary(k)) (*grad)[k] = e * c * ue / u[k];
    }
    return s;
}

double B_p(const Field& u, const FiberingSpec& spec, Field* grad) {
    if (!spec.b.mesh) {
        if (grad) *grad = Field(u.mesh);
        return 0.0;
    }
    return weighted_power(u, spec.exponent, &spec.b, grad);
}

Field fibering_residual(const Field& z, const FiberingSpec& spec) {
    const double p = spec.exponent, e = spec.own_power(), fe = spec.frozen_power();
    Field h(z.mesh);
    for (std::size_t k = 0; k < z.size(); ++k) {
        h[k] = spec.a[k] * sgnpow(z[k], e - 1.0) * std::pow(std::abs(spec.frozen[k]), fe);
        if (spec.b.mesh) h[k] += spec.lambda * spec.b[k] * sgnpow(z[k], p - 1.0);
    }
    return residual_eps(z, h, p, 0.0);
}

FiberingResult solve_fibering(const FiberingSpec& spec, const MeshPtr& mesh, const FiberingConfig& cfg) {
    spec.validate();
    if (spec.a.mesh != mesh) throw InputError("fibering data lives on a different mesh");
    const double p = spec.exponent, e = spec.own_power();
    FiberingResult res;

    res.lambda_b = std::numeric_limits<double>::infinity();
    if (spec.b.mesh && spec.lambda > 0.0) {
        Field bplus = spec.b;
        bool positive = false;
        for (double& v : bplus.values) {
            v = std::max(v, 0.0);
            positive = positive || v > 0.0;
        }
        if (positive) res.lambda_b = first_eig_plap(p, mesh, bplus, cfg.quotient).lambda;
        if (spec.lambda >= res.lambda_b) {
            const std::string msg = "lambda = " + fmt(spec.lambda) + " is not below the weighted eigenvalue " +
                                    fmt(res.lambda_b) + ": the constraint manifold may be empty";
            if (!cfg.allow_regime_ii) throw InputError(msg);
            res.warnings.push_back(msg + " (accepted as a feasibility check only)");
        }
    }

    QuotientSpec q;
    q.num_degree = p;
    q.den_degree = e;
    q.num = [&spec, p](const Field& z, Field* g) {
        Field gb;
        const double n = p_dirichlet(z, p, g);
        const double b = B_p(z, spec, g ? &gb : nullptr);
        if (g)
            for (std::size_t k = 0; k < g->size(); ++k) (*g)[k] -= spec.lambda * gb[k];
        return n - spec.lambda * b;
    };
    q.den = [&spec](const Field& z, Field* g) { return A_p(z, spec, g); };
    q.projection = QuotientSpec::Projection::absolute;
    q.normalize_numerator = true;

    // Seed with the bump weighted towards where a and the frozen field are positive.
    auto seed = [&](int r) {
        Field z = perturbed_bump(mesh, r, cfg.quotient.seed, cfg.quotient.perturbation);
        if (!(A_p(z, spec) > 0.0)) {
            for (std::size_t k = 0; k < z.size(); ++k)
                if (!(spec.a[k] > 0.0) || spec.frozen[k] == 0.0) z[k] *= 1e-3;
        }
        return z;
    };
    QuotientRun best;
    bool have = false;
    for (int r = 0; r < std::max(1, cfg.quotient.restarts); ++r) {
        Field z = seed(r);
        if (!(A_p(z, spec) > 0.0)) continue;
        QuotientRun run = minimize_quotient(q, std::move(z), cfg.quotient);
        if (!have || run.value < best.value) {
            best = std::move(run);
            have = true;
        }
    }
    if (!have)
        throw NoSubsolutionError("A has no positive value on the admissible cone (M_lambda <= 0): no positive subsolution");

    res.z_hat = std::move(best.z);
    res.M_lambda = A_p(res.z_hat, spec);
    if (!(res.M_lambda > 0.0)) throw NoSubsolutionError("M_lambda <= 0: no positive subsolution");
    res.constraint_residual = std::abs(p_dirichlet(res.z_hat, p) - spec.lambda * B_p(res.z_hat, spec) - 1.0);
    res.t_hat = std::pow(res.M_lambda, 1.0 / (p - e));
    res.stationarity_residual =
        std::abs(std::pow(res.t_hat, p - 1.0) - std::pow(res.t_hat, e - 1.0) * res.M_lambda) /
        std::pow(res.t_hat, p - 1.0);
    res.U = res.t_hat * res.z_hat;
    res.residual = residual_norm(fibering_residual(res.U, spec));

    // Polish by U <- m(U)^g S(U), S = (-Delta_p)^{-1} applied to the right side
    // at U and m = (N - lambda B)/A (equal to 1 at a solution). S has degree
    // d = (own-1)/(p-1); g = d/(own-p) cancels the scaling mode, which is the
    // unstable one for superlinear fibers.
    if (res.residual > cfg.tol_res) {
        PlapConfig pc = cfg.plap;
        pc.skip_ladder_when_warm = true;
        const double d = (e - 1.0) / (p - 1.0), g = d / (e - p);
        Field U = res.U;
        Field best_U = U;
        double best_r = res.residual;
        for (int it = 0; it < cfg.polish_iter && best_r > cfg.tol_res; ++it) {
            Field h(mesh);
            for (std::size_t k = 0; k < U.size(); ++k) {
                h[k] = spec.a[k] * sgnpow(U[k], e - 1.0) * std::pow(std::abs(spec.frozen[k]), spec.frozen_power());
                if (spec.b.mesh) h[k] += spec.lambda * spec.b[k] * sgnpow(U[k], p - 1.0);
            }
            const double H = norm_Lr(h, std::numeric_limits<double>::infinity());
            const double A = A_p(U, spec);
            if (!(H > 0.0) || !(A > 0.0)) break;
            const double m = (p_dirichlet(U, p) - spec.lambda * B_p(U, spec)) / A;
            const double c = std::pow(H, 1.0 / (p - 1.0));
            PlapResult r = solve_plap((1.0 / H) * h, p, pc, (1.0 / c) * U);
            if (!r.trace.converged) break;
            U = (c * std::pow(m, g)) * r.z;
            const double rn = residual_norm(fibering_residual(U, spec));
            if (!std::isfinite(rn)) break;
            if (rn < best_r) {
                best_r = rn;
                best_U = U;
            }
        }
        res.U = std::move(best_U);
        res.residual = best_r;
        res.polished = true;
    }
    res.min_interior = interior_min(res.U);
    res.ok = res.residual <= cfg.tol_res && res.min_interior > 0.0;
    return res;
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::positive_certified: return "positive_certified";
        case Verdict::inapplicable: return "inapplicable";
        case Verdict::not_certified: break;
    }
    return "not_certified";
}

Certificate comparison_certificate(const Field& U, const Field& u_star, const ProblemSpec& prob,
                                   const Field& frozen, Slot slot, const CertificateTolerances& tol) {
    if (U.mesh != u_star.mesh || U.mesh != frozen.mesh) throw InputError("certificate fields must share one mesh");
    Certificate c;
    c.tolerances = tol;
    const MeshPtr& mesh = U.mesh;
    const double p = slot == Slot::u ? prob.p : prob.q;

    const ViolationReport h3 = check_H3(prob.pair, mesh, SampleSpec::positive_cone());
    if (!h3.ok()) {
        c.verdict = Verdict::inapplicable;
        c.reason = "monotonicity hypothesis fails on the positive cone (" + std::to_string(h3.violations) +
                   " violations)";
        return c;
    }

    // (a) -Delta_p U <= f(x, U, frozen) against every nonnegative nodal hat.
    Field h(mesh);
    for (std::size_t k = 0; k < h.size(); ++k)
        h[k] = slot == Slot::u ? prob.pair.f(k, U[k], frozen[k]) : prob.pair.g(k, frozen[k], U[k]);
    Field r = residual_eps(U, h, p, 0.0);
    for (double& x : r.values) x = std::max(x, 0.0);
    c.subsolution_residual = residual_norm(r);
    c.subsolution_ok = std::isfinite(c.subsolution_residual) && c.subsolution_residual <= tol.subsolution;

    // (b) ordering.
    Field gap(mesh);
    for (std::size_t k = 0; k < gap.size(); ++k) gap[k] = std::max(U[k] - u_star[k], 0.0);
    c.ordering_gap = norm_W1p(gap, p);
    c.ordering_ok = c.ordering_gap <= tol.ordering;

    // (c) positivity.
    c.min_interior_u = interior_min(u_star);
    c.positivity_floor = tol.positivity_floor.value_or(std::pow(tol.subsolution, 1.0 / (p - 1.0)));
    c.positivity_ok = c.min_interior_u > c.positivity_floor;

    c.verdict = c.subsolution_ok && c.ordering_ok && c.positivity_ok ? Verdict::positive_certified
                                                                     : Verdict::not_certified;
    if (c.verdict == Verdict::not_certified) {
        std::string why;
        if (!c.subsolution_ok) why += "subsolution residual " + fmt(c.subsolution_residual) + "; ";
        if (!c.ordering_ok) why += "ordering gap " + fmt(c.ordering_gap) + "; ";
        if (!c.positivity_ok)
            why += "min interior value " + fmt(c.min_interior_u) + " not above the resolution floor " +
                   fmt(c.positivity_floor) + "; ";
        c.reason = why.substr(0, why.size() - 2);
    } else {
        c.reason = "all checks hold";
    }
    return c;
}

}  // namespace qles
