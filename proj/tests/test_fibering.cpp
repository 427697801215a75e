#include <doctest.h>

#include <cmath>
#include <random>

#include "qles/fibering.hpp"

using namespace qles;

namespace {

FiberingSpec sublinear_spec(const MeshPtr& m, double p, double alpha_hat, double a) {
    FiberingSpec s;
    s.a = Field::constant(m, a);
    s.frozen = Field::constant(m, 1.0);
    s.frozen.zero_boundary();
    s.exponent = p;
    s.partner_exponent = p;
    s.alpha_hat = alpha_hat;
    s.beta_hat = 0.0;
    s.slot = Slot::u;
    s.N_formal = m->dim();
    return s;
}

// f = s^{-1/2} on s > 0, nonincreasing, so the monotonicity hypothesis holds
// on the positive cone. -u'' = f with the frozen partner equal to 1 is the
// equation solved by the sublinear fibering spec with alpha_hat = -1/2.
ProblemSpec singular_problem(const MeshPtr& m) {
    ProblemSpec prob;
    prob.p = prob.q = 2.0;
    prob.mesh = m;
    prob.pair.f = [](std::size_t, double s, double t) { return s > 0.0 ? std::pow(s, -0.5) * std::abs(t) : 0.0; };
    prob.pair.g = [](std::size_t, double, double) { return 0.0; };
    return prob;
}

}  // namespace

TEST_CASE("A and B integrals, homogeneity and gradients") {
    const MeshPtr m = Mesh::rectangle({0, 0}, {1, 1}, {5, 6});
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> U(0.2, 1.0);
    FiberingSpec s = sublinear_spec(m, 1.5, -0.25, 1.0);
    s.a = Field::sample(m, [](double x, double y) { return 1.0 + x * y; });
    s.frozen = Field::sample(m, [](double x, double y) { return 2.0 - x + y; });
    s.b = Field::constant(m, 0.7);
    Field z(m), d(m);
    for (std::size_t k : m->interior_nodes()) {
        z[k] = U(rng);
        d[k] = U(rng) - 0.6;
    }
    double Aref = 0.0, Bref = 0.0;
    for (std::size_t k = 0; k < m->size(); ++k) {
        const double w = m->quad_weights()[k];
        Aref += w * s.a[k] * std::pow(z[k], 0.75) * std::pow(s.frozen[k], 1.0);
        Bref += w * 0.7 * std::pow(z[k], 1.5);
    }
    CHECK(A_p(z, s) == doctest::Approx(Aref));
    CHECK(B_p(z, s) == doctest::Approx(Bref));
    CHECK(A_p(3.0 * z, s) == doctest::Approx(std::pow(3.0, 0.75) * Aref));
    CHECK(B_p(3.0 * z, s) == doctest::Approx(std::pow(3.0, 1.5) * Bref));
    Field gA(m);
    A_p(z, s, &gA);
    double an = 0.0;
    for (std::size_t k = 0; k < m->size(); ++k) an += gA[k] * d[k];
    const double t = 1e-6;
    CHECK(an == doctest::Approx((A_p(z + t * d, s) - A_p(z - t * d, s)) / (2 * t)).epsilon(1e-6));
    s.b = Field();
    CHECK(B_p(z, s) == 0.0);
}

TEST_CASE("sublinear fiber: residual, positivity and the scaling law") {
    const MeshPtr m = Mesh::interval(0.0, 1.0, 63);
    const double p = 2.0, ah = -0.5;
    const FiberingResult r1 = solve_fibering(sublinear_spec(m, p, ah, 1.0), m);
    CHECK(r1.ok);
    CHECK(r1.residual <= 1e-6);
    CHECK(r1.min_interior > 0.0);
    CHECK(r1.M_lambda > 0.0);
    CHECK(r1.t_hat == doctest::Approx(std::pow(r1.M_lambda, 1.0 / (p - ah - 1.0))));
    // a -> c a scales the solution by c^{1/(p-1-alpha_hat)}.
    const double c = 5.0;
    const FiberingResult r2 = solve_fibering(sublinear_spec(m, p, ah, c), m);
    const double factor = std::pow(c, 1.0 / (p - 1.0 - ah));
    for (std::size_t k : m->interior_nodes()) CHECK(r2.U[k] == doctest::Approx(factor * r1.U[k]).epsilon(1e-5));
    CHECK(residual_norm(fibering_residual(r2.U, sublinear_spec(m, p, ah, c))) <= 1e-6);
}

TEST_CASE("fibering rejects bad data") {
    const MeshPtr m = Mesh::interval(0.0, 1.0, 31);
    FiberingSpec s = sublinear_spec(m, 2.0, -0.5, 1.0);
    s.frozen = Field(m);
    CHECK_THROWS_AS(solve_fibering(s, m), NoSubsolutionError);
    s = sublinear_spec(m, 2.0, 1.0, 1.0);
    CHECK_THROWS_AS(solve_fibering(s, m), InputError);  // alpha_hat + 1 == p
    s = sublinear_spec(m, 2.0, -0.5, 1.0);
    s.b = Field::constant(m, 1.0);
    s.lambda = 20.0;  // above pi^2
    CHECK_THROWS_AS(solve_fibering(s, m), InputError);
    s.a = Field::constant(m, -1.0);
    s.lambda = 0.0;
    CHECK_THROWS_AS(solve_fibering(s, m), InputError);
}

TEST_CASE("comparison certificate") {
    const MeshPtr m = Mesh::interval(0.0, 1.0, 63);
    const ProblemSpec prob = singular_problem(m);
    const FiberingResult fr = solve_fibering(sublinear_spec(m, 2.0, -0.5, 1.0), m);
    REQUIRE(fr.ok);
    Field frozen = Field::constant(m, 1.0);
    frozen.zero_boundary();

    SUBCASE("the solution itself certifies") {
        const Certificate c = comparison_certificate(fr.U, fr.U, prob, frozen, Slot::u);
        CHECK(c.verdict == Verdict::positive_certified);
        CHECK(c.subsolution_residual <= 1e-6);
        CHECK(c.ordering_gap == 0.0);
    }
    SUBCASE("a half-height solution component breaks the ordering") {
        const Certificate c = comparison_certificate(fr.U, 0.5 * fr.U, prob, frozen, Slot::u);
        CHECK(c.verdict == Verdict::not_certified);
        CHECK_FALSE(c.ordering_ok);
        CHECK(c.ordering_gap > 1e-3);
        CHECK(c.positivity_ok);
    }
    SUBCASE("round-off amplitude is not positivity") {
        const Certificate c = comparison_certificate(1e-15 * fr.U, 1e-15 * fr.U, prob, frozen, Slot::u);
        CHECK_FALSE(c.positivity_ok);
        CHECK(c.positivity_floor == doctest::Approx(1e-6));
        CHECK(c.verdict == Verdict::not_certified);
    }
    SUBCASE("increasing nonlinearities make the certificate inapplicable") {
        ProblemSpec inc = prob;
        inc.pair.f = [](std::size_t, double s, double) { return s; };
        const Certificate c = comparison_certificate(fr.U, fr.U, inc, frozen, Slot::u);
        CHECK(c.verdict == Verdict::inapplicable);
        CHECK(to_string(c.verdict) == "inapplicable");
    }
}
