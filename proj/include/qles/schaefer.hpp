#pragma once

// The decoupled solution operator T(u,v) = (z,w), the damped Picard search
// for fixed points of x = tau T x, continuation in tau, and the a priori norm
// window.

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qles/plap.hpp"
#include "qles/problems.hpp"

namespace qles {

/// A scalar sub-solve inside T failed; `equation` is "u" or "v".
class SubsolveError : public NumericalError {
  public:
    SubsolveError(std::string equation, const std::string& what)
        : NumericalError(what), equation_(std::move(equation)) {}
    const std::string& equation() const { return equation_; }

  private:
    std::string equation_;
};

struct SolutionPair {
    Field u;
    Field v;
    double x_norm = 0.0;
    double res_u = 0.0;
    double res_v = 0.0;
};

/// ||u||_{1,p} + ||v||_{1,q}.
double pair_norm(const Field& u, const Field& v, double p, double q);

/// Weighted L2 norms of the weak residuals of
///   -Delta_p u = tau^{p-1} f(x,u,v),  -Delta_q v = tau^{q-1} g(x,u,v),
/// the equations solved by fixed points of x = tau T x (identical to the
/// unscaled system at tau = 1).
std::pair<double, double> pair_residuals(const ProblemSpec& prob, const Field& u, const Field& v, double tau = 1.0);

struct ApplyOptions {
    bool concurrent = false;
    /// Warm starts for the two sub-solves.
    std::optional<Field> z0;
    std::optional<Field> w0;
};

/// (z, w) with -Delta_p z = f(x,u,v), -Delta_q w = g(x,u,v). The returned
/// residuals are those of the sub-solves. Throws SubsolveError on failure.
SolutionPair apply_T(const Field& u, const Field& v, const ProblemSpec& prob, const PlapConfig& cfg,
                     const ApplyOptions& opt = {});

struct PicardConfig {
    double theta = 0.5;
    double tol_fix = 1e-8;
    double tol_res = 1e-6;
    int max_iter = 400;
    /// Stop when the residual has not improved by 0.1% within this many iterations.
    int patience = 60;
    /// Amplitude of the default start delta * (product of sines).
    double delta = 1.0;
    /// Divergence threshold is 10 * theta_bound.
    double theta_bound = std::numeric_limits<double>::infinity();
    bool concurrent = false;
    std::optional<Field> u0;
    std::optional<Field> v0;

    void validate() const;
};

struct IterRow {
    int iter = 0;
    double x_norm = 0.0;
    double delta_norm = 0.0;
    double res_u = 0.0;
    double res_v = 0.0;
};

struct IterTrace {
    std::vector<IterRow> rows;
    bool converged = false;
    std::string reason;
    double tau = 1.0;
};

struct PicardResult {
    SolutionPair pair;
    IterTrace trace;
};

PicardResult picard_solve(const ProblemSpec& prob, double tau, const PicardConfig& pcfg, const PlapConfig& cfg);

struct HomotopyResult {
    SolutionPair pair;
    std::vector<IterTrace> rungs;
    bool converged = false;
    /// First tau at which the Picard search failed, when it did.
    std::optional<double> failed_tau;
};

HomotopyResult tau_homotopy(const ProblemSpec& prob, const std::vector<double>& ladder, const PicardConfig& pcfg,
                            const PlapConfig& cfg);

struct NormWindow {
    double eps0 = 0.0;
    double theta = 0.0;
    /// Smaller positive root of the majorant when it has two (the lower edge
    /// of the band where the majorant inequality fails).
    double theta_lower = 0.0;
    bool theta_finite = false;
    double K = 0.0;
    double Cp = 0.0;
    double Cq = 0.0;
    double lambda_pq = 0.0;
    /// tau K / lambda_pq at tau = 1.
    double k_over_lambda = 0.0;
    bool window_empty = false;
    std::vector<std::string> flags;
};

struct NormWindowOptions {
    /// Embedding constants; estimated on the mesh when absent.
    std::optional<double> Cp;
    std::optional<double> Cq;
    bool with_coupled_eigenvalue = true;
};

NormWindow norm_window(const ProblemSpec& prob, const MeshPtr& mesh, const NormWindowOptions& opt = {});

/// eps0 = (2K)^{-1} min{Cp^{p(1-C)}, Cq^{q(1-C)}}.
double window_eps0(double K, double Cp, double Cq, double p, double q, double C);

}  // namespace qles
