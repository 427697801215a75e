#include "qles/moser.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qles/problems.hpp"

namespace qles {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// ln sum_i w_i |u_i|^r, -inf for the zero field.
double log_power_sum(const Field& u, double r) {
    const auto& w = u.mesh->quad_weights();
    double mx = -std::numeric_limits<double>::infinity();
    std::vector<double> terms;
    terms.reserve(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (u[k] == 0.0 || w[k] == 0.0) continue;
        const double t = std::log(w[k]) + r * std::log(std::abs(u[k]));
        terms.push_back(t);
        mx = std::max(mx, t);
    }
    if (terms.empty()) return mx;
    double s = 0.0;
    for (double t : terms) s += std::exp(t - mx);
    return mx + std::log(s);
}

double log_add(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

}  // namespace

double MoserLadder::identity_error() const {
    double err = rel(delta[0], p * C * (D + 1.0));
    err = std::max(err, rel(gamma[0], q * C * (D + 1.0)));
    for (int k = 0; k <= kmax; ++k) {
        const double Ck = std::pow(C, k);
        err = std::max(err, rel(f[k], D * (Ck + 1.0 / D)));
        err = std::max(err, rel(delta[k], p * C * f[k]));
        err = std::max(err, rel(gamma[k], q * C * f[k]));
        err = std::max(err, rel(r[k], (p * C * D * Ck + p * C) / (p * C - 1.0)));
        err = std::max(err, rel(t[k], D * Ck + 1.0));
        if (k < kmax) {
            err = std::max(err, rel(delta[k + 1], C * (a[k] + p)));
            err = std::max(err, rel(gamma[k + 1], C * (b[k] + q)));
        }
    }
    return err;
}

MoserLadder build_ladder(double p, double q, double C, double D, int dim, int kmax) {
    if (!(p > 1.0) || !(q > 1.0)) throw InputError("ladder requires p > 1 and q > 1");
    if (dim < 1) throw InputError("ladder requires a positive dimension");
    if (kmax < 1) throw InputError("ladder requires kmax >= 1");
    MoserLadder L;
    L.C = C;
    L.D = D;
    L.p = p;
    L.q = q;
    L.dim = dim;
    L.kmax = kmax;
    L.p_star = critical_exponent(p, dim);
    L.q_star = critical_exponent(q, dim);
    L.window_vacuous = !std::isfinite(L.p_star) || !std::isfinite(L.q_star);
    if (L.window_vacuous) L.flags.push_back("p or q >= dim: critical-exponent windows are vacuous");

    const double c_cap = std::min(L.p_star / p, L.q_star / q);
    if (!(C > 1.0) || !(C < c_cap))
        throw InputError("C = " + fmt(C) + " violates 1 < C < min{p*/p, q*/q} = " + fmt(c_cap));
    const double d_cap = std::min(L.p_star / (p * C), L.q_star / (q * C)) - 1.0;
    if (!(D > 0.0) || !(D < d_cap))
        throw InputError("D = " + fmt(D) + " violates 0 < D < min{p*/(pC), q*/(qC)} - 1 = " + fmt(d_cap));
    if (!(p * C * (D + 1.0) < L.p_star)) throw InputError("delta_0 = pC(D+1) violates delta_0 < p*");
    if (!(q * C * (D + 1.0) < L.q_star)) throw InputError("gamma_0 = qC(D+1) violates gamma_0 < q*");

    const auto n = static_cast<std::size_t>(kmax + 1);
    for (auto* v : {&L.f, &L.delta, &L.gamma, &L.a, &L.b, &L.r, &L.t}) v->resize(n);
    for (int k = 0; k <= kmax; ++k) {
        const double Ck = std::pow(C, k);
        L.f[k] = D * Ck + 1.0;
        L.delta[k] = p * C * L.f[k];
        L.gamma[k] = q * C * L.f[k];
        L.a[k] = D * Ck * C * p;
        L.b[k] = D * Ck * C * q;
        L.r[k] = (p * C * D * Ck + p * C) / (p * C - 1.0);
        L.t[k] = D * Ck + 1.0;
    }
    const double err = L.identity_error();
    if (err > 1e-12) throw NumericalError("ladder identities fail at relative level " + fmt(err));
    return L;
}

BoundReport track_E(const Field& u, const Field& v, const MoserLadder& L) {
    if (!u.mesh || u.mesh != v.mesh) throw InputError("u and v must share one mesh");
    for (std::size_t k = 0; k < u.size(); ++k)
        if (!std::isfinite(u[k]) || !std::isfinite(v[k])) throw InputError("fields must be finite");
    BoundReport R;
    const double meas = u.mesh->measure();
    const double inf = std::numeric_limits<double>::infinity();
    R.discrete_max_u = norm_Lr(u, inf);
    R.discrete_max_v = norm_Lr(v, inf);
    for (int k = 0; k <= L.kmax; ++k) {
        const double lu = log_power_sum(u, L.delta[k]);
        const double lv = log_power_sum(v, L.gamma[k]);
        const double le = log_add(lu, lv);
        if (le == -inf) {
            R.E.push_back(0.0);
            R.e.push_back(std::numeric_limits<double>::quiet_NaN());
            R.zero_fields = true;
        } else {
            R.E.push_back(std::exp(le));
            R.e.push_back(le);
        }
        R.norm_u.push_back(lu == -inf ? 0.0 : std::exp((lu - std::log(meas)) / L.delta[k]));
        R.norm_v.push_back(lv == -inf ? 0.0 : std::exp((lv - std::log(meas)) / L.gamma[k]));
    }
    if (R.zero_fields) R.flags.push_back("E_k = 0: both fields vanish, e_k undefined");

    R.log_AB_fit = -inf;
    for (int k = 0; k < L.kmax; ++k)
        if (std::isfinite(R.e[k]) && std::isfinite(R.e[k + 1]))
            R.log_AB_fit = std::max(R.log_AB_fit, R.e[k + 1] / L.C - R.e[k]);
    R.A_plus_B_fit = std::exp(R.log_AB_fit);

    auto gap = [](double n, double mx) { return mx > 0.0 ? std::abs(mx - n) / mx : std::abs(n); };
    for (int k = 0; k <= L.kmax; ++k) {
        if (L.delta[k] >= 200.0 && L.gamma[k] >= 200.0) {
            R.k_at_200 = k;
            R.gap_at_200 = std::max(gap(R.norm_u[k], R.discrete_max_u), gap(R.norm_v[k], R.discrete_max_v));
            break;
        }
    }
    if (R.k_at_200 < 0) R.flags.push_back("ladder never reaches exponent 200; increase kmax");
    R.gap_final = std::max(gap(R.norm_u.back(), R.discrete_max_u), gap(R.norm_v.back(), R.discrete_max_v));
    return R;
}

LinfBound linf_bound(double e0, const MoserLadder& L) {
    if (!std::isfinite(e0)) throw InputError("e0 must be finite");
    const double s = e0 + L.C / (L.C - 1.0);
    return {std::exp(s / (L.p * L.C * L.D)), std::exp(s / (L.q * L.C * L.D))};
}

BoundReport verify_T3(const Field& u, const Field& v, const MoserLadder& L, std::optional<double> theta) {
    BoundReport R = track_E(u, v, L);
    R.E0 = R.E[0];
    R.E0_sobolev_majorant = std::pow(norm_W1p(u, L.p), L.delta[0]) + std::pow(norm_W1p(v, L.q), L.gamma[0]);
    if (theta) R.E0_theta_majorant = std::pow(*theta, L.delta[0]) + std::pow(*theta, L.gamma[0]);
    const double inf = std::numeric_limits<double>::infinity();
    if (R.zero_fields && R.E0 == 0.0) {
        // ln 0 = -inf sends the bound to 0, and 0 <= 0 holds.
        R.e0 = -inf;
        R.bound_u = R.bound_v = 0.0;
        R.log_form_u = R.log_form_v = -inf;
        R.slack_u = R.slack_v = inf;
        R.bound_holds = R.discrete_max_u == 0.0 && R.discrete_max_v == 0.0;
        R.closed_form_assumptions_hold = false;
        R.flags.push_back("zero pair: the bound holds vacuously");
        return R;
    }
    R.e0 = R.e[0];
    const LinfBound b = linf_bound(R.e0, L);
    R.bound_u = b.u;
    R.bound_v = b.v;
    const double s = R.e0 + L.C / (L.C - 1.0);
    R.log_form_u = s / (L.p * L.C * L.D);
    R.log_form_v = s / (L.q * L.C * L.D);
    R.slack_u = R.discrete_max_u > 0.0 ? R.bound_u / R.discrete_max_u : inf;
    R.slack_v = R.discrete_max_v > 0.0 ? R.bound_v / R.discrete_max_v : inf;
    R.bound_holds = R.discrete_max_u <= R.bound_u && R.discrete_max_v <= R.bound_v;
    R.closed_form_assumptions_hold = R.log_AB_fit <= 1.0 && s >= 0.0;
    if (!R.closed_form_assumptions_hold)
        R.flags.push_back("closed recurrence assumptions (ln(A+B) <= 1, e0 >= -C/(C-1)) fail for the fitted constants");
    if (R.E0 > R.E0_sobolev_majorant)
        R.flags.push_back("E_0 exceeds ||u||_{1,p}^{delta_0} + ||v||_{1,q}^{gamma_0} (embedding constants omitted)");
    return R;
}

}  // namespace qles
