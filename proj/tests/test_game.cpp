#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "levymfg/game.hpp"

namespace {

const mfg::CompoundPoissonTwoExp kRef{1.5, 1.0, 3.0, 2.0};

mfg::GameSpec ref_game(double eps = 0.1) {
    mfg::GameSpec spec;
    spec.model = kRef;
    spec.eps = eps;
    spec.two_h = 1.0;
    spec.q_u = 0.5;
    spec.q_d = 0.5;
    return spec;
}

}  // namespace

TEST_CASE("threshold constants: frozen values, consistent orientation") {
    const auto c = mfg::cp_threshold_constants(kRef, 0.1, mfg::ConstantsMode::Consistent);
    CHECK(c.r_i == doctest::Approx(0.197927964264).epsilon(1e-10));
    CHECK(c.r_s == doctest::Approx(0.219667094699).epsilon(1e-10));
    CHECK(c.pi_i == doctest::Approx(0.197927964264).epsilon(1e-10));
    CHECK(c.pi_s == doctest::Approx(0.109833547349).epsilon(1e-10));
    CHECK(c.e_i == doctest::Approx(4.052343178075).epsilon(1e-10));
    CHECK(c.f_i == doctest::Approx(1.729843788128).epsilon(1e-10));
    CHECK(c.g_i == doctest::Approx(0.729843788128).epsilon(1e-10));
}

TEST_CASE("threshold constants: frozen values, legacy tables") {
    // cross-checked against a high-precision solve of the historical quadratic
    // (leading coefficient eps + 2 lambda2) and the printed constants map
    const auto c = mfg::cp_threshold_constants(kRef, 0.1, mfg::ConstantsMode::LegacyTables);
    CHECK(c.r_i == doctest::Approx(0.189453642520459).epsilon(1e-10));
    CHECK(c.r_s == doctest::Approx(0.173060199897508).epsilon(1e-10));
    CHECK(c.pi_i == doctest::Approx(0.0947268212602294).epsilon(1e-10));
    CHECK(c.pi_s == doctest::Approx(0.173060199897508).epsilon(1e-10));
    CHECK(c.e_i == doctest::Approx(4.778336096874).epsilon(1e-10));
    CHECK(c.f_i == doctest::Approx(1.7610831951563).epsilon(1e-10));
    CHECK(c.g_i == doctest::Approx(0.7610831951563).epsilon(1e-10));
}

TEST_CASE("threshold constants: centered models collapse the I/S distinction") {
    // lambda1/alpha1 == lambda2/alpha2 makes E, F, G side-symmetric; this
    // follows from the linear coefficient alone, so it holds in both modes
    for (const auto& m : {kRef, mfg::CompoundPoissonTwoExp{2.0, 1.0, 4.0, 2.0}}) {
        for (auto mode : {mfg::ConstantsMode::Consistent, mfg::ConstantsMode::LegacyTables}) {
            const auto c = mfg::cp_threshold_constants(m, 0.17, mode);
            CHECK(c.e_i == doctest::Approx(c.e_s).epsilon(1e-11));
            CHECK(c.f_i == doctest::Approx(c.f_s).epsilon(1e-11));
            CHECK(c.g_i == doctest::Approx(c.g_s).epsilon(1e-11));
        }
    }
}

TEST_CASE("threshold constants: contraction factor below one") {
    // g_i g_s < 1 is what makes the denominator of the threshold system
    // positive for every band width, hence the map well defined
    for (double eps : {0.02, 0.1, 0.5, 2.0}) {
        for (const auto& m : {kRef, mfg::CompoundPoissonTwoExp{0.7, 2.0, 1.1, 0.9}}) {
            const auto c = mfg::cp_threshold_constants(m, eps, mfg::ConstantsMode::Consistent);
            CHECK(c.g_i * c.g_s < 1.0);
            CHECK(c.g_i > 0.0);
            CHECK(c.g_s > 0.0);
        }
    }
}

TEST_CASE("best response: frozen thresholds at offset 0.05") {
    const auto sol = mfg::cp_best_response(kRef, 0.1, 0.05);
    CHECK(sol.converged);
    CHECK(sol.a_star == doctest::Approx(-0.970956054463).epsilon(1e-9));
    CHECK(sol.b_star == doctest::Approx(0.725054378406).epsilon(1e-9));
    CHECK(sol.residual_a < 1e-10);
    CHECK(sol.residual_b < 1e-10);
}

TEST_CASE("best response: legacy tables frozen thresholds at offset 0.025") {
    const auto sol =
        mfg::cp_best_response(kRef, 0.1, 0.025, mfg::ConstantsMode::LegacyTables);
    CHECK(sol.converged);
    CHECK(sol.a_star == doctest::Approx(-0.551506112546051).epsilon(1e-8));
    CHECK(sol.b_star == doctest::Approx(0.775730851269822).epsilon(1e-8));
}

TEST_CASE("best response: solution independent of the starting band") {
    const auto pinned = mfg::cp_best_response(kRef, 0.1, 0.05);
    // twenty scattered starting bands, including very wide and very lopsided
    int checked = 0;
    for (int i = 0; i < 20; ++i) {
        const double a0 = -0.05 - 0.6 * i;
        const double b0 = 0.02 + 0.45 * ((i * 7) % 20);
        const auto sol = mfg::cp_best_response(kRef, 0.1, 0.05,
                                               mfg::ConstantsMode::Consistent, a0, b0);
        CHECK(sol.converged);
        CHECK(std::abs(sol.a_star - pinned.a_star) < 1e-9);
        CHECK(std::abs(sol.b_star - pinned.b_star) < 1e-9);
        ++checked;
    }
    CHECK(checked == 20);
}

TEST_CASE("best response: band widens monotonically in the offset") {
    const double deltas[] = {0.01, 0.05, 0.1, 0.3, 1.0};
    const double expect_a[] = {-0.36978016, -0.97095605, -1.37635380, -2.28761175,
                               -3.92062800};
    const double expect_b[] = {0.23173446, 0.72505438, 1.09876640, 1.99452435, 3.67800079};
    double prev_a = 0.0, prev_b = 0.0;
    for (int k = 0; k < 5; ++k) {
        const auto sol = mfg::cp_best_response(kRef, 0.1, deltas[k]);
        CHECK(sol.a_star == doctest::Approx(expect_a[k]).epsilon(1e-7));
        CHECK(sol.b_star == doctest::Approx(expect_b[k]).epsilon(1e-7));
        CHECK(sol.a_star < prev_a);
        CHECK(sol.b_star > prev_b);
        prev_a = sol.a_star;
        prev_b = sol.b_star;
    }
}

TEST_CASE("best response: rejects nonpositive inputs") {
    CHECK_THROWS_AS(mfg::cp_best_response(kRef, -0.1, 0.05), std::invalid_argument);
    CHECK_THROWS_AS(mfg::cp_best_response(kRef, 0.1, 0.0), std::invalid_argument);
}

TEST_CASE("game value: stopping regions pay out immediately and exactly") {
    const auto spec = ref_game();
    const auto at_a = mfg::mc_game_value(spec, -2.0, -1.0, 1.0, 100, 1);
    CHECK(at_a.value == -0.5);
    CHECK(at_a.stderr_ == 0.0);
    const auto at_b = mfg::mc_game_value(spec, 1.0, -1.0, 1.0, 100, 1);
    CHECK(at_b.value == 0.5);
    CHECK(at_b.stderr_ == 0.0);
}

TEST_CASE("game value: reproducible and independent of the worker count") {
    const auto spec = ref_game();
    const auto v1 = mfg::mc_game_value(spec, 0.0, -1.0, 1.0, 4000, 11, 1);
    const auto v2 = mfg::mc_game_value(spec, 0.0, -1.0, 1.0, 4000, 11, 3);
    CHECK(v1.value == v2.value);
    CHECK(v1.stderr_ == v2.stderr_);
    CHECK(v1.stderr_ > 0.0);
    CHECK(std::abs(v1.value) < 0.5 + spec.two_h / spec.eps);
}

TEST_CASE("saddle check: zero perturbation is exactly neutral") {
    const auto spec = ref_game();
    const auto report = mfg::saddle_check(spec, -0.97, 0.73, 0.0, 0.0, 500, 21);
    CHECK(report.passed);
    for (const auto& pert : report.perturbations) {
        CHECK(pert.improvement == 0.0);
        CHECK(pert.stderr_ == 0.0);
    }
}

TEST_CASE("saddle check: equilibrium thresholds survive one-sided perturbations") {
    const auto spec = ref_game();
    const auto sol = mfg::cp_best_response(kRef, 0.1, 0.05);
    const auto report =
        mfg::saddle_check(spec, sol.a_star, sol.b_star, 0.0, 0.25, 20000, 33);
    CHECK(report.passed);
    CHECK(report.perturbations.size() == 4);
    for (const auto& pert : report.perturbations) CHECK(pert.stderr_ > 0.0);
}

TEST_CASE("saddle check: a misplaced lower threshold is exploitable") {
    const auto spec = ref_game();
    const auto sol = mfg::cp_best_response(kRef, 0.1, 0.05);
    const auto report =
        mfg::saddle_check(spec, sol.a_star - 1.0, sol.b_star, 0.0, 0.25, 20000, 33);
    CHECK_FALSE(report.passed);
}

TEST_CASE("game value: input validation") {
    const auto spec = ref_game();
    CHECK_THROWS_AS(mfg::mc_game_value(spec, 0.0, 1.0, -1.0, 100, 1), std::invalid_argument);
    CHECK_THROWS_AS(mfg::mc_game_value(spec, 0.0, -1.0, 1.0, 0, 1), std::invalid_argument);
}
