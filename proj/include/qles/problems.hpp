#pragma once

// Problem data: hypothesis constants, the built-in coupled nonlinearities,
// manufactured scalar solutions, and sampled checks of the structural
// hypotheses on f and g.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qles/mesh.hpp"

namespace qles {

/// Sobolev critical exponent N p / (N - p), +infinity when p >= N.
double critical_exponent(double p, int N);

struct HypothesisSet {
    double p = 1.5;
    double q = 1.5;
    double C = 2.0;
    double alpha = -0.25;
    double beta = -0.25;
    Field k_pq;
    int N_formal = 2;

    // Positivity data; optional because existence and boundedness do not use it.
    std::optional<double> alpha_hat;
    std::optional<double> beta_hat;
    Field a_p, a_q, b_p, b_q;
    double delta_p = std::numeric_limits<double>::infinity();
    double delta_q = std::numeric_limits<double>::infinity();

    double p_star() const { return critical_exponent(p, N_formal); }
    double q_star() const { return critical_exponent(q, N_formal); }
    double p_C_conjugate() const { return C * p / (C * p - 1.0); }
    double q_C_conjugate() const { return C * q / (C * q - 1.0); }
    double k_sup() const;
    double k_inf() const;

    /// Growth window and exponent balance; throws InputError naming the
    /// violated inequality.
    void validate_growth() const;
    /// Exponent conditions on alpha_hat, beta_hat and the integrability of b_p, b_q.
    void validate_positivity() const;
    void validate() const;
};

/// f or g evaluated at mesh node `node` with arguments (s, t).
using Nonlinearity = std::function<double(std::size_t node, double s, double t)>;

struct NonlinearityPair {
    Nonlinearity f;
    Nonlinearity g;
    std::string label;
};

/// The built-in coupled example with weight k_pq and exponents -1 < alpha, beta < 0.
NonlinearityPair example_pair(const Field& k_pq, double alpha, double beta);

struct ProblemSpec {
    double p = 1.5;
    double q = 1.5;
    MeshPtr mesh;
    NonlinearityPair pair;
    HypothesisSet hyp;
    std::string label;

    int dim() const { return mesh->dim(); }
};

/// The example problem with constant weight k on the given mesh.
ProblemSpec example_problem(const MeshPtr& mesh, double p, double q, double alpha, double beta, double k,
                            double C);

/// Nodal values f(x_i, u_i, v_i) and g(x_i, u_i, v_i).
Field eval_f(const NonlinearityPair& pair, const Field& u, const Field& v);
Field eval_g(const NonlinearityPair& pair, const Field& u, const Field& v);

struct SampleSpec {
    double s_lo = -10.0, s_hi = 10.0;
    double t_lo = -10.0, t_hi = 10.0;
    int points = 201;
    /// Extra values +-10^{-k}, k = 1..log_levels, added to each axis when inside the box.
    int log_levels = 8;
    int random_samples = 1000;
    std::uint64_t seed = 20240601;
    /// Nodes to test; empty selects up to max_nodes evenly spread nodes.
    std::vector<std::size_t> nodes;
    int max_nodes = 64;

    /// Positive-cone box [0, hi]^2 with the same resolution settings.
    static SampleSpec positive_cone(double hi = 10.0);
};

struct SamplePoint {
    double x = 0.0, y = 0.0, s = 0.0, t = 0.0;
    /// Second argument of a two-point check (s-bar or t-bar); NaN otherwise.
    double other = std::numeric_limits<double>::quiet_NaN();
    std::string slot;
};

struct ViolationReport {
    std::string check;
    std::size_t checked = 0;
    std::size_t violations = 0;
    /// Smallest (allowed - actual) over all samples; negative means violated.
    double worst_margin = std::numeric_limits<double>::infinity();
    SamplePoint worst_point;

    bool ok() const { return violations == 0; }
};

enum class LatticeReading {
    /// The definition used with (H.2): the wedge is max and the vee is min.
    paper,
    /// Conventional lattice notation: wedge is min, vee is max.
    standard,
};

ViolationReport check_H2(const NonlinearityPair& pair, const HypothesisSet& hyp, const MeshPtr& mesh,
                         const SampleSpec& spec, LatticeReading reading = LatticeReading::paper);
ViolationReport check_H3(const NonlinearityPair& pair, const MeshPtr& mesh, const SampleSpec& spec);
ViolationReport check_H4(const NonlinearityPair& pair, const HypothesisSet& hyp, const MeshPtr& mesh,
                         const SampleSpec& spec);

/// Largest constants (c_f, c_g) with f >= c_f s|s|^{ah-1}|t|^{bh+1} and
/// g >= c_g |s|^{ah+1}|t|^{bh-1} t on the samples of `spec` (b_p = b_q = 0).
std::pair<double, double> fit_H4_constants(const NonlinearityPair& pair, double alpha_hat, double beta_hat,
                                           const MeshPtr& mesh, const SampleSpec& spec);

/// Adversarial pair f = s|s|^{2pC}, g = 0, which breaks the growth cap.
NonlinearityPair adversarial_pair(double p, double C);

struct ManufacturedCase {
    std::string name;
    double p = 2.0;
    Field u_exact;
    Field h;
};

/// `torsion_1d`: (-1,1), h = 1, u = ((p-1)/p)(1 - |x|^{p/(p-1)}).
/// `sine_p2`: (0,1), p = 2, u = sin(pi x), h = pi^2 sin(pi x).
ManufacturedCase manufactured(double p, const std::string& name, int n);

}  // namespace qles
