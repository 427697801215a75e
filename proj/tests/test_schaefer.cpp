#include <doctest.h>

#include <cmath>

#include "qles/schaefer.hpp"
#include "qles/spectral.hpp"

using namespace qles;

namespace {

// Constant right sides f = g = 1, so T maps everything to the torsion pair.
ProblemSpec torsion_problem(const MeshPtr& m, double p) {
    ProblemSpec prob;
    prob.p = prob.q = p;
    prob.mesh = m;
    prob.pair.f = [](std::size_t, double, double) { return 1.0; };
    prob.pair.g = prob.pair.f;
    prob.label = "torsion";
    return prob;
}

// The 3-point stencil is exact on quadratics: -z'' = 1 on (0,1) has nodal values x(1-x)/2.
Field torsion_exact(const MeshPtr& m) {
    Field z = Field::sample(m, [](double x, double) { return 0.5 * x * (1.0 - x); });
    return z.zero_boundary();
}

double max_err(const Field& a, const Field& b) {
    double e = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) e = std::max(e, std::abs(a[k] - b[k]));
    return e;
}

}  // namespace

TEST_CASE("eps0 arithmetic") {
    // Cp^{p(1-C)} = 0.5^{-2} = 4 and Cq^{q(1-C)} = 0.25^{-2} = 16, so eps0 = 4 / 0.2.
    CHECK(window_eps0(0.1, 0.5, 0.25, 2.0, 2.0, 2.0) == doctest::Approx(20.0));
    CHECK(window_eps0(0.2, 0.5, 0.25, 2.0, 2.0, 2.0) == doctest::Approx(10.0));
    CHECK(window_eps0(1.0, 0.5, 0.5, 1.5, 1.5, 2.0) == doctest::Approx(0.5 * std::pow(0.5, -1.5)));
    CHECK_THROWS_AS(window_eps0(1.0, 0.0, 1.0, 2.0, 2.0, 2.0), InputError);
}

TEST_CASE("norm window roots solve the majorant equation") {
    const MeshPtr m = Mesh::rectangle({0, 0}, {1, 1}, {8, 8});
    const ProblemSpec prob = example_problem(m, 1.5, 1.5, -0.25, -0.25, 0.1, 2.0);
    NormWindowOptions opt;
    opt.Cp = opt.Cq = 0.3;
    opt.with_coupled_eigenvalue = false;
    const NormWindow w = norm_window(prob, m, opt);
    REQUIRE(w.theta_finite);
    auto phi = [](double M) { return std::pow(M, 1.5) - 0.1 * 2.0 * std::pow(0.3 * M, 3.0) - 1.0; };
    CHECK(std::abs(phi(w.theta)) < 1e-9 * std::pow(w.theta, 3.0));
    CHECK(std::abs(phi(w.theta_lower)) < 1e-9);
    CHECK(w.theta_lower < w.theta);
    CHECK(phi(0.5 * (w.theta_lower + w.theta)) > 0.0);
    CHECK(w.eps0 == doctest::Approx(window_eps0(0.1, 0.3, 0.3, 1.5, 1.5, 2.0)));
    // A large K leaves no band where the majorant fails.
    ProblemSpec heavy = example_problem(m, 1.5, 1.5, -0.25, -0.25, 50.0, 2.0);
    const NormWindow h = norm_window(heavy, m, opt);
    CHECK_FALSE(h.theta_finite);
    CHECK(std::isinf(h.theta));
}

TEST_CASE("T of a zero nonlinearity is the zero pair") {
    const MeshPtr m = Mesh::interval(0.0, 1.0, 20);
    ProblemSpec prob = torsion_problem(m, 1.5);
    prob.pair.f = [](std::size_t, double, double) { return 0.0; };
    prob.pair.g = prob.pair.f;
    const Field u = sine_bump(m);
    const SolutionPair s = apply_T(u, u, prob, {});
    CHECK(norm_Lr(s.u, INFINITY) == 0.0);
    CHECK(s.x_norm == 0.0);
}

TEST_CASE("T with constant data gives the torsion pair, sequential or concurrent") {
    const MeshPtr m = Mesh::interval(0.0, 1.0, 31);
    const ProblemSpec prob = torsion_problem(m, 2.0);
    const Field u = sine_bump(m);
    const SolutionPair a = apply_T(u, u, prob, {});
    ApplyOptions opt;
    opt.concurrent = true;
    const SolutionPair b = apply_T(u, u, prob, {}, opt);
    CHECK(max_err(a.u, torsion_exact(m)) < 1e-9);
    CHECK(max_err(a.v, torsion_exact(m)) < 1e-9);
    CHECK(max_err(a.u, b.u) == 0.0);
    CHECK(a.x_norm == doctest::Approx(2.0 * norm_W1p(torsion_exact(m), 2.0)));
    CHECK_THROWS_AS(apply_T(Field::constant(m, 1.0), u, prob, {}), InputError);
}

TEST_CASE("Picard fixed point of x = tau T x is tau times the torsion pair") {
    const MeshPtr m = Mesh::interval(0.0, 1.0, 31);
    const ProblemSpec prob = torsion_problem(m, 2.0);
    const PicardResult r = picard_solve(prob, 0.5, {}, {});
    CHECK(r.trace.converged);
    CHECK(max_err(r.pair.u, 0.5 * torsion_exact(m)) < 1e-7);
    const auto [ru, rv] = pair_residuals(prob, r.pair.u, r.pair.v, 0.5);
    CHECK(ru <= 1e-6);
    CHECK(rv <= 1e-6);
    // Damped iterates contract by (1 - theta) per step: the increment halves.
    REQUIRE(r.trace.rows.size() > 3);
    CHECK(r.trace.rows[2].delta_norm == doctest::Approx(0.5 * r.trace.rows[1].delta_norm).epsilon(1e-6));
}

TEST_CASE("p = 3 homotopy converges and keeps the residual small") {
    const MeshPtr m = Mesh::interval(0.0, 1.0, 40);
    const ProblemSpec prob = torsion_problem(m, 3.0);
    const HomotopyResult h = tau_homotopy(prob, {0.5, 1.0}, {}, {});
    CHECK(h.converged);
    CHECK(h.rungs.size() == 2);
    CHECK(h.pair.res_u <= 1e-6);
    CHECK_FALSE(h.failed_tau);
}

TEST_CASE("ladder and Picard settings are validated") {
    const MeshPtr m = Mesh::interval(0.0, 1.0, 10);
    const ProblemSpec prob = torsion_problem(m, 2.0);
    CHECK_THROWS_AS(tau_homotopy(prob, {0.5, 0.25, 1.0}, {}, {}), InputError);
    CHECK_THROWS_AS(tau_homotopy(prob, {0.5, 0.9}, {}, {}), InputError);
    CHECK_THROWS_AS(tau_homotopy(prob, {}, {}, {}), InputError);
    PicardConfig pc;
    pc.theta = 0.0;
    CHECK_THROWS_AS(picard_solve(prob, 1.0, pc, {}), InputError);
    CHECK_THROWS_AS(picard_solve(prob, 1.5, {}, {}), InputError);
}
