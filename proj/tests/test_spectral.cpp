#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qles/spectral.hpp"

using namespace qles;

namespace {

constexpr double pi = std::numbers::pi;

// First eigenvalue of the 3-point Laplacian with lumped mass on n interior nodes.
double discrete_lambda_1d(double h) { return 4.0 / (h * h) * std::pow(std::sin(pi * h / 2.0), 2); }

}  // namespace

TEST_CASE("p-Dirichlet and weighted power with their gradients") {
    const MeshPtr m = Mesh::rectangle({0, 0}, {1, 1}, {6, 5});
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> U(0.1, 1.0);
    Field z(m), d(m), b(m);
    for (std::size_t k : m->interior_nodes()) {
        z[k] = U(rng);
        d[k] = U(rng) - 0.5;
        b[k] = U(rng);
    }
    const double p = 2.5, r = 3.0;
    Field gN(m), gB(m);
    const double N = p_dirichlet(z, p, &gN);
    const double B = weighted_power(z, r, &b, &gB);
    CHECK(N == doctest::Approx(std::pow(norm_W1p(z, p), p)));
    double Bref = 0.0;
    for (std::size_t k = 0; k < m->size(); ++k) Bref += m->quad_weights()[k] * b[k] * std::pow(z[k], r);
    CHECK(B == doctest::Approx(Bref));
    const double t = 1e-6;
    double dN = 0.0, dB = 0.0;
    for (std::size_t k = 0; k < m->size(); ++k) {
        dN += gN[k] * d[k];
        dB += gB[k] * d[k];
    }
    CHECK(dN == doctest::Approx((p_dirichlet(z + t * d, p) - p_dirichlet(z - t * d, p)) / (2 * t)).epsilon(1e-6));
    CHECK(dB == doctest::Approx((weighted_power(z + t * d, r, &b) - weighted_power(z - t * d, r, &b)) / (2 * t))
                    .epsilon(1e-6));
}

TEST_CASE("Rayleigh quotient is scale invariant") {
    const MeshPtr m = Mesh::interval(0.0, 1.0, 30);
    const Field z = sine_bump(m);
    for (double p : {1.5, 2.0, 3.0}) CHECK(rayleigh_quotient(3.5 * z, p) == doctest::Approx(rayleigh_quotient(z, p)));
}

TEST_CASE("p = 2 eigenvalue matches the discrete spectrum") {
    const MeshPtr m1 = Mesh::interval(0.0, 1.0, 99);
    const EigenResult e1 = first_eig_plap(2.0, m1);
    CHECK(e1.converged);
    CHECK(e1.lambda == doctest::Approx(discrete_lambda_1d(0.01)).epsilon(1e-8));
    const MeshPtr m2 = Mesh::rectangle({0, 0}, {1, 1}, {31, 31});
    const EigenResult e2 = first_eig_plap(2.0, m2);
    CHECK(e2.lambda == doctest::Approx(2.0 * discrete_lambda_1d(1.0 / 32.0)).epsilon(1e-7));
}

TEST_CASE("p = 1.5 eigenvalue against the closed form") {
    const double p = 1.5;
    const double exact = (p - 1.0) * std::pow(2.0 * pi / (p * std::sin(pi / p)), p);
    const EigenResult e = first_eig_plap(p, Mesh::interval(0.0, 1.0, 300));
    CHECK(e.lambda == doctest::Approx(exact).epsilon(1e-2));
    // The eigenfield does not change sign.
    for (std::size_t k = 0; k < e.eigenfield.size(); ++k) CHECK(e.eigenfield[k] >= 0.0);
}

TEST_CASE("weighted eigenvalue scales inversely with the weight") {
    const MeshPtr m = Mesh::interval(0.0, 1.0, 80);
    const Field b = Field::sample(m, [](double x, double) { return 1.0 + std::sin(3.0 * x); });
    const EigenResult a = first_eig_plap(1.5, m, b);
    const EigenResult c = first_eig_plap(1.5, m, 4.0 * b);
    CHECK(c.lambda * 4.0 == doctest::Approx(a.lambda).epsilon(1e-8));
}

TEST_CASE("coupled eigenvalue with p = q = 2, alpha = beta = 0 is the Dirichlet eigenvalue") {
    const MeshPtr m = Mesh::interval(0.0, 1.0, 63);
    const EigenResult e = coupled_eig(2.0, 2.0, 0.0, 0.0, m);
    CHECK(e.lambda == doctest::Approx(discrete_lambda_1d(1.0 / 64.0)).epsilon(1e-6));
    REQUIRE(e.eigenfield_v);
    CHECK(coupled_quotient(e.eigenfield, *e.eigenfield_v, 2.0, 2.0, 0.0, 0.0) == doctest::Approx(e.lambda));
}

TEST_CASE("coupled quotient of a vanishing coupling is infinite") {
    const MeshPtr m = Mesh::interval(0.0, 1.0, 10);
    const Field z = sine_bump(m);
    CHECK(std::isinf(coupled_quotient(z, Field(m), 1.5, 1.5, -0.25, -0.25)));
}

TEST_CASE("L2 embedding constant of H^1_0 is lambda_1^{-1/2}") {
    const MeshPtr m = Mesh::interval(0.0, 1.0, 63);
    const EmbeddingResult r = embedding_const(2.0, 2.0, m);
    CHECK(r.constant == doctest::Approx(1.0 / std::sqrt(discrete_lambda_1d(1.0 / 64.0))).epsilon(1e-7));
}

TEST_CASE("inadmissible spectral inputs") {
    const MeshPtr m = Mesh::rectangle({0, 0}, {1, 1}, {8, 8});
    CHECK_THROWS_AS(first_eig_plap(1.0, m), InputError);
    CHECK_THROWS_AS(first_eig_plap(2.0, m, Field(m)), InputError);
    CHECK_THROWS_AS(coupled_eig(1.5, 1.5, 0.0, 0.0, m), InputError);
    CHECK_THROWS_AS(embedding_const(1.5, 6.0, m), InputError);
}
