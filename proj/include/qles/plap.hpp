#pragma once

// Dirichlet problems -Delta_p z = h through the regularized energy
//   E_eps(z) = (1/p) sum_e |e| (|grad z|_e^2 + eps)^{p/2} - sum_i w_i h_i z_i,
// minimized by lagged-diffusivity (Kacanov) steps with Armijo backtracking and
// continuation in eps.

#include <optional>
#include <string>
#include <vector>

#include "qles/linsolve.hpp"
#include "qles/mesh.hpp"

namespace qles {

struct LineSearch {
    double shrink = 0.5;
    double c1 = 1e-4;
    int max_backtracks = 60;
};

struct PlapConfig {
    double eps_start = 1e-2;
    double eps_min = 1e-10;
    double eps_factor = 0.1;
    double tol_grad = 1e-8;
    int max_iter = 500;
    LineSearch line_search;
    /// With a warm start, go straight to eps_min instead of running the ladder.
    bool skip_ladder_when_warm = false;
    /// Relative tolerance of the inner conjugate-gradient solves (2D).
    double linear_rtol = 1e-10;

    void validate() const;
};

struct TraceRow {
    double stage_eps = 0.0;
    int iter = 0;
    double energy = 0.0;
    double residual_norm = 0.0;
    double step_size = 0.0;
};

struct StageSummary {
    double eps = 0.0;
    int iterations = 0;
    bool converged = false;
    double residual_norm = 0.0;
    double energy = 0.0;
    /// Regularized minus unregularized Dirichlet integral at the stage solution.
    double eps_gap = 0.0;
};

struct SolveTrace {
    std::vector<TraceRow> rows;
    std::vector<StageSummary> stages;
    bool converged = false;
    int total_iterations = 0;
    double final_residual = 0.0;
    std::string diagnostic;
};

struct PlapResult {
    Field z;
    SolveTrace trace;
};

double energy_eps(const Field& z, const Field& h, double p, double eps);

/// Per-element diffusivity (|grad z|^2 + eps)^{(p-2)/2}. With eps == 0 and a
/// vanishing gradient the value is replaced by eps_floor^{(p-2)/2} when p < 2
/// (the flux a*grad z is zero either way) and `degenerate` is set.
std::vector<double> diffusivity(const ElementGradients& g, double p, double eps, double eps_floor = 1e-10,
                                bool* degenerate = nullptr);

/// (K_a z - M h)_i / w_i on interior nodes, zero on the boundary.
Field residual_eps(const Field& z, const Field& h, double p, double eps, double eps_floor = 1e-10,
                   bool* degenerate = nullptr);

/// sqrt(sum over interior nodes of w_i r_i^2).
double residual_norm(const Field& r);

PlapResult solve_plap(const Field& h, double p, const PlapConfig& cfg = {},
                      const std::optional<Field>& initial = std::nullopt);

}  // namespace qles
