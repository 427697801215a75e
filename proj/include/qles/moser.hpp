#pragma once

// Exponent ladders of the Moser bootstrap, the norm sequence E_k along them,
// and the explicit sup-norm bound checked against discrete maxima.

#include <optional>
#include <string>
#include <vector>

#include "qles/mesh.hpp"

namespace qles {

struct MoserLadder {
    double C = 2.0;
    double D = 0.5;
    double p = 1.5;
    double q = 1.5;
    int dim = 2;
    int kmax = 20;
    double p_star = 0.0;
    double q_star = 0.0;
    /// p >= dim or q >= dim: the critical-exponent windows impose nothing.
    bool window_vacuous = false;
    std::vector<double> f, delta, gamma, a, b, r, t;
    std::vector<std::string> flags;

    /// Largest relative defect over all ladder identities.
    double identity_error() const;
};

/// Throws InputError naming the violated inequality.
MoserLadder build_ladder(double p, double q, double C, double D, int dim, int kmax = 20);

struct BoundReport {
    std::vector<double> E;
    /// ln E_k; NaN where E_k == 0.
    std::vector<double> e;
    bool zero_fields = false;
    double e0 = 0.0;
    double bound_u = 0.0;
    double bound_v = 0.0;
    /// The final display read literally, without the exponential.
    double log_form_u = 0.0;
    double log_form_v = 0.0;
    double discrete_max_u = 0.0;
    double discrete_max_v = 0.0;
    /// bound / discrete max (infinite for a zero field).
    double slack_u = 0.0;
    double slack_v = 0.0;
    bool bound_holds = false;
    /// max_k (e_{k+1}/C - e_k): the smallest ln(A+B) making every audited step hold.
    double log_AB_fit = 0.0;
    double A_plus_B_fit = 0.0;
    /// The closed recurrence assumes ln(A+B) <= 1 and e0 + C/(C-1) >= 0.
    bool closed_form_assumptions_hold = false;
    double E0 = 0.0;
    /// ||u||_{1,p}^{delta_0} + ||v||_{1,q}^{gamma_0}.
    double E0_sobolev_majorant = 0.0;
    std::optional<double> E0_theta_majorant;
    /// (sum w |u|^{delta_k} / |Omega|)^{1/delta_k}, nondecreasing in k.
    std::vector<double> norm_u, norm_v;
    int k_at_200 = -1;
    /// Relative gap to the discrete max at the first delta_k >= 200, and at kmax.
    double gap_at_200 = 0.0;
    double gap_final = 0.0;
    std::vector<std::string> flags;
};

/// E_k = ||u||_{delta_k}^{delta_k} + ||v||_{gamma_k}^{gamma_k}, accumulated in log space.
BoundReport track_E(const Field& u, const Field& v, const MoserLadder& ladder);

struct LinfBound {
    double u = 0.0;
    double v = 0.0;
};

/// exp[(e0 + C/(C-1)) / (pCD)] and the q analogue.
LinfBound linf_bound(double e0, const MoserLadder& ladder);

BoundReport verify_T3(const Field& u, const Field& v, const MoserLadder& ladder,
                      std::optional<double> theta = std::nullopt);

}  // namespace qles
