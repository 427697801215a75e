#include <doctest.h>

#include <cmath>
#include <string>

#include "qles/moser.hpp"

using namespace qles;

namespace {

std::string message_of(double p, double q, double C, double D, int dim) {
    try {
        build_ladder(p, q, C, D, dim);
    } catch (const InputError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("ladder values for p = q = 1.5, C = 2, D = 1/2 in the plane") {
    const MoserLadder L = build_ladder(1.5, 1.5, 2.0, 0.5, 2, 10);
    CHECK(L.p_star == doctest::Approx(6.0));
    CHECK(L.delta[0] == doctest::Approx(4.5));
    CHECK(L.delta[1] == doctest::Approx(6.0));
    CHECK(L.delta[2] == doctest::Approx(9.0));
    CHECK(L.gamma[3] == doctest::Approx(3.0 * (0.5 * 8.0 + 1.0)));
    CHECK(L.r[0] == doctest::Approx((1.5 + 3.0) / 2.0));
    CHECK(L.t[2] == doctest::Approx(3.0));
    for (int k = 0; k < L.kmax; ++k) {
        CHECK(L.delta[k + 1] == doctest::Approx(L.C * (L.a[k] + L.p)));
        CHECK(L.gamma[k + 1] == doctest::Approx(L.C * (L.b[k] + L.q)));
    }
    CHECK(L.identity_error() < 1e-14);
    CHECK_FALSE(L.window_vacuous);
}

TEST_CASE("inadmissible ladders name the violated inequality") {
    CHECK(message_of(1.5, 1.5, 5.0, 0.5, 2).find("1 < C < min{p*/p, q*/q}") != std::string::npos);
    CHECK(message_of(1.5, 1.5, 1.0, 0.5, 2).find("1 < C") != std::string::npos);
    CHECK(message_of(1.5, 1.5, 2.0, 1.0, 2).find("0 < D < min") != std::string::npos);
    CHECK(message_of(1.5, 1.5, 2.0, -0.1, 2).find("0 < D") != std::string::npos);
    CHECK(message_of(1.0, 1.5, 2.0, 0.5, 2).find("p > 1") != std::string::npos);
    CHECK(message_of(1.5, 1.5, 2.0, 0.5, 0).find("dimension") != std::string::npos);
}

TEST_CASE("p at or above the dimension leaves the windows vacuous") {
    const MoserLadder L = build_ladder(1.5, 2.0, 7.0, 3.0, 1, 5);
    CHECK(L.window_vacuous);
    CHECK_FALSE(L.flags.empty());
}

TEST_CASE("closed-form bound") {
    const MoserLadder L = build_ladder(1.5, 1.5, 2.0, 0.5, 2, 10);
    // (0 + 2) / (1.5 * 2 * 0.5) = 4/3
    const LinfBound b = linf_bound(0.0, L);
    CHECK(b.u == doctest::Approx(std::exp(4.0 / 3.0)));
    CHECK(b.v == doctest::Approx(b.u));
    CHECK(linf_bound(1.0, L).u == doctest::Approx(std::exp(2.0)));
    CHECK_THROWS_AS(linf_bound(NAN, L), InputError);
}

TEST_CASE("constant unit fields give E_k = 2 on the unit square") {
    const MeshPtr m = Mesh::rectangle({0, 0}, {1, 1}, {9, 9});
    const MoserLadder L = build_ladder(1.5, 1.5, 2.0, 0.5, 2, 8);
    const Field one = Field::constant(m, 1.0);
    const BoundReport R = track_E(one, one, L);
    for (int k = 0; k <= L.kmax; ++k) {
        CHECK(R.E[k] == doctest::Approx(2.0));
        CHECK(R.norm_u[k] == doctest::Approx(1.0));
    }
    CHECK(R.gap_final == doctest::Approx(0.0));
}

TEST_CASE("log-space accumulation survives huge exponents") {
    const MeshPtr m = Mesh::rectangle({0, 0}, {1, 1}, {5, 5});
    const MoserLadder L = build_ladder(1.5, 1.5, 2.0, 0.5, 2, 20);
    const double c = 1e100;
    const Field u = Field::constant(m, c);
    const BoundReport R = track_E(u, u, L);
    for (int k = 0; k <= L.kmax; ++k) CHECK(R.e[k] == doctest::Approx(std::log(2.0) + L.delta[k] * std::log(c)));
}

TEST_CASE("normalized norms increase towards the max") {
    const MeshPtr m = Mesh::rectangle({0, 0}, {1, 1}, {40, 40});
    const MoserLadder L = build_ladder(1.5, 1.5, 2.0, 0.5, 2, 20);
    Field u = Field::sample(m, [](double x, double y) { return 3.0 * std::sin(3.14159265358979 * x) * std::sin(3.14159265358979 * y); });
    u.zero_boundary();
    const BoundReport R = track_E(u, 0.5 * u, L);
    for (int k = 0; k < L.kmax; ++k) CHECK(R.norm_u[k + 1] >= R.norm_u[k]);
    CHECK(R.norm_u.back() <= R.discrete_max_u * (1.0 + 1e-12));
    CHECK(R.k_at_200 >= 0);
    CHECK(L.delta[R.k_at_200] >= 200.0);
    CHECK(R.gap_final < R.gap_at_200);
}

TEST_CASE("sup-norm verification") {
    const MeshPtr m = Mesh::rectangle({0, 0}, {1, 1}, {20, 20});
    const MoserLadder L = build_ladder(1.5, 1.5, 2.0, 0.5, 2, 20);
    SUBCASE("zero pair holds vacuously") {
        const BoundReport R = verify_T3(Field(m), Field(m), L);
        CHECK(R.bound_holds);
        CHECK(R.zero_fields);
    }
    SUBCASE("moderate pair") {
        Field u = Field::sample(m, [](double x, double y) { return 2.0 * x * (1 - x) * y * (1 - y) * 16.0; });
        const BoundReport R = verify_T3(u, u, L, 10.0);
        CHECK(R.e0 == doctest::Approx(std::log(R.E0)));
        CHECK(R.log_form_u == doctest::Approx(std::log(R.bound_u)));
        CHECK(R.bound_holds == (R.discrete_max_u <= R.bound_u && R.discrete_max_v <= R.bound_v));
        CHECK(R.E0_theta_majorant);
        CHECK(*R.E0_theta_majorant == doctest::Approx(2.0 * std::pow(10.0, 4.5)));
        // The fitted step constant makes every audited step hold.
        for (int k = 0; k < L.kmax; ++k) CHECK(R.e[k + 1] <= L.C * (R.log_AB_fit + R.e[k]) + 1e-9);
    }
    SUBCASE("tiny pair: the bound falls below the max") {
        Field u = Field::sample(m, [](double x, double y) { return 1e-15 * x * (1 - x) * y * (1 - y); });
        const BoundReport R = verify_T3(u, u, L);
        CHECK_FALSE(R.bound_holds);
        CHECK_FALSE(R.closed_form_assumptions_hold);
    }
}
