#pragma once

// Scale-invariant quotient minimization and the eigenvalue / embedding
// estimators built on it.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "qles/mesh.hpp"

namespace qles {

struct QuotientOptions {
    int max_iter = 3000;
    /// Stop after `stall_window` consecutive relative decreases below this.
    double rel_tol = 1e-13;
    int stall_window = 5;
    int restarts = 3;
    std::uint64_t seed = 1;
    /// Relative amplitude of the multiplicative noise on restarts after the first.
    double perturbation = 0.2;
    bool concurrent = false;
};

/// Q(z) = Num(z) * Den(z)^{-num_degree/den_degree} for Num homogeneous of
/// degree num_degree and Den of degree den_degree, so Q(cz) = Q(z).
struct QuotientSpec {
    enum class Projection { none, absolute, positive_part };

    double num_degree = 2.0;
    double den_degree = 2.0;
    /// Value and (when the pointer is non-null) nodal gradient, zero on the boundary.
    std::function<double(const Field&, Field*)> num;
    std::function<double(const Field&, Field*)> den;
    Projection projection = Projection::absolute;
    /// Rescale iterates so that Num == 1 instead of Den == 1.
    bool normalize_numerator = false;
};

struct QuotientRun {
    Field z;
    double value = 0.0;
    std::vector<double> history;
    int iters = 0;
    bool converged = false;
};

/// Preconditioned descent on Q: direction -P^{-1} grad Q with P the frozen
/// p-Laplacian operator at the iterate, natural (inverse-iteration) step or a
/// Barzilai-Borwein step in the P metric, Armijo backtracking, then projection
/// and rescaling.
QuotientRun minimize_quotient(const QuotientSpec& spec, Field start, const QuotientOptions& opt = {});

/// Positive product of half-period sines over the domain, zero on the boundary.
Field sine_bump(const MeshPtr& mesh);
/// Restart r of a seeded family: r == 0 is the bump itself.
Field perturbed_bump(const MeshPtr& mesh, int restart, std::uint64_t seed, double amplitude);

/// sum_e |e| |grad z|^p and its nodal gradient p K_{|g|^{p-2}} z.
double p_dirichlet(const Field& z, double p, Field* grad = nullptr);
/// sum_i w_i b_i |z_i|^r and its nodal gradient (b == nullptr means b == 1).
double weighted_power(const Field& z, double r, const Field* b, Field* grad = nullptr);

struct EigenResult {
    double lambda = 0.0;
    Field eigenfield;
    /// Second component for coupled problems.
    std::optional<Field> eigenfield_v;
    std::vector<double> quotient_history;
    int iters = 0;
    int restarts = 0;
    double spread = 0.0;
    bool converged = false;
};

/// Rayleigh quotient sum|grad z|^p / sum b|z|^p.
double rayleigh_quotient(const Field& z, double p, const std::optional<Field>& weight = std::nullopt);

/// First eigenvalue of -Delta_p with weight b (b == 1 when absent); the
/// eigenfield is normalized by sum b|z|^p = 1.
EigenResult first_eig_plap(double p, const MeshPtr& mesh, const std::optional<Field>& weight = std::nullopt,
                           const QuotientOptions& opt = {});

/// [(1/p) N_p(u) + (1/q) N_q(v)] / sum w u+^{alpha+1} v+^{beta+1}.
double coupled_quotient(const Field& u, const Field& v, double p, double q, double alpha, double beta);

/// Coupled eigenvalue over nonnegative pairs; requires (alpha+1)/p + (beta+1)/q = 1.
EigenResult coupled_eig(double p, double q, double alpha, double beta, const MeshPtr& mesh,
                        const QuotientOptions& opt = {});

struct EmbeddingResult {
    /// Largest ratio ||z||_r / ||z||_{1,p} found: a lower bound on the best constant.
    double constant = 0.0;
    Field maximizer;
    std::vector<double> ratio_history;
    double spread = 0.0;
    bool converged = false;
};

EmbeddingResult embedding_const(double p, double r, const MeshPtr& mesh, const QuotientOptions& opt = {});

}  // namespace qles
