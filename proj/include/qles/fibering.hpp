#pragma once

// Positive subsolutions by the fibering reduction and the comparison
// certificate that turns them into a positivity proof for a solution pair.

#include <optional>
#include <string>
#include <vector>

#include "qles/plap.hpp"
#include "qles/problems.hpp"
#include "qles/spectral.hpp"

namespace qles {

/// Which equation the subsolution is built for: the u equation freezes v*,
/// the v equation freezes u*.
enum class Slot { u, v };

/// A has no positive value on the admissible cone, so no positive
/// subsolution exists in this construction.
class NoSubsolutionError : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

struct FiberingSpec {
    Field a;
    /// Empty means b == 0.
    Field b;
    double lambda = 0.0;
    double alpha_hat = 0.0;
    double beta_hat = 0.0;
    /// The frozen partner component.
    Field frozen;
    /// p for the u slot, q for the v slot.
    double exponent = 2.0;
    Slot slot = Slot::u;
    /// Partner exponent, used for the integrability check (q for the u slot).
    double partner_exponent = 2.0;
    int N_formal = 2;

    /// Exponent of |z| in A (alpha_hat + 1 for the u slot, beta_hat + 1 for v).
    double own_power() const { return slot == Slot::u ? alpha_hat + 1.0 : beta_hat + 1.0; }
    /// Exponent of |frozen| in A.
    double frozen_power() const { return slot == Slot::u ? beta_hat + 1.0 : alpha_hat + 1.0; }

    void validate() const;
};

/// sum_i w_i a_i |u_i|^{own} |frozen_i|^{frozen}, with its nodal gradient.
double A_p(const Field& u, const FiberingSpec& spec, Field* grad = nullptr);
/// sum_i w_i b_i |u_i|^p, with its nodal gradient.
double B_p(const Field& u, const FiberingSpec& spec, Field* grad = nullptr);

struct FiberingConfig {
    QuotientOptions quotient;
    PlapConfig plap;
    double tol_res = 1e-6;
    /// Accept lambda at or above the weighted eigenvalue (only a feasibility warning is raised).
    bool allow_regime_ii = false;
    int polish_iter = 200;
};

struct FiberingResult {
    /// The subsolution t_hat * z_hat.
    Field U;
    Field z_hat;
    double M_lambda = 0.0;
    double t_hat = 0.0;
    double lambda_b = 0.0;
    double constraint_residual = 0.0;
    /// |t^{p-1} - t^{own-1} A(z_hat)| / t^{p-1}.
    double stationarity_residual = 0.0;
    double residual = 0.0;
    double min_interior = 0.0;
    bool polished = false;
    bool ok = false;
    std::vector<std::string> warnings;
};

/// Weak residual (nodal, divided by the weights) of
///   -Delta_p z - a z|z|^{own-2}|frozen|^{frozen} - lambda b z|z|^{p-2}.
Field fibering_residual(const Field& z, const FiberingSpec& spec);

/// Maximizes A over {||z||^p_{1,p} - lambda B(z) = 1, z >= 0} (equivalently
/// minimizes (N - lambda B) A^{-p/own}) and returns U = A(z_hat)^{1/(p-own)} z_hat.
/// Throws InputError for an inadmissible lambda, NoSubsolutionError when A has
/// no positive value.
FiberingResult solve_fibering(const FiberingSpec& spec, const MeshPtr& mesh, const FiberingConfig& cfg = {});

enum class Verdict { positive_certified, not_certified, inapplicable };
std::string to_string(Verdict v);

struct CertificateTolerances {
    double subsolution = 1e-6;
    double ordering = 1e-8;
    /// Smallest interior value accepted as positive. Defaults to
    /// subsolution^{1/(p-1)}: a field of smaller amplitude has a weak residual
    /// below the tolerance, so the test cannot tell it from zero.
    std::optional<double> positivity_floor;
};

struct Certificate {
    Verdict verdict = Verdict::not_certified;
    bool subsolution_ok = false;
    bool ordering_ok = false;
    bool positivity_ok = false;
    /// Weighted L2 norm of the positive part of -Delta_p U - f(x, U, frozen).
    double subsolution_residual = 0.0;
    /// ||(U - u*)^+||_{1,p}.
    double ordering_gap = 0.0;
    double min_interior_u = 0.0;
    double positivity_floor = 0.0;
    CertificateTolerances tolerances;
    std::string reason;
};

/// Checks that U is a weak subsolution of the `slot` equation with the partner
/// frozen, that U <= the solution component, and that the component is
/// positive inside. `inapplicable` when the monotonicity hypothesis fails on
/// the positive cone.
Certificate comparison_certificate(const Field& U, const Field& u_star, const ProblemSpec& prob,
                                   const Field& frozen, Slot slot, const CertificateTolerances& tol = {});

}  // namespace qles
