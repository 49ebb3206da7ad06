#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "levymfg/reflect.hpp"

namespace {

const mfg::CompoundPoissonTwoExp kRef{1.5, 1.0, 3.0, 2.0};

mfg::SamplePath hand_path(std::vector<double> times, std::vector<double> values) {
    mfg::SamplePath path;
    path.times = std::move(times);
    path.values = std::move(values);
    path.exact_jumps = true;
    return path;
}

}  // namespace

TEST_CASE("reflection: worked two-jump example") {
    // +3 then -7 from the origin on [-1, 1]: the first jump overshoots the top
    // (push down 2), the second crashes through the bottom (push up 5)
    const auto rp = mfg::reflect(hand_path({0, 1, 2}, {0, 3, -4}), {-1, 1});
    CHECK(rp.x_reflected == std::vector<double>{0, 1, -1});
    CHECK(rp.u == std::vector<double>{0, 0, 5});
    CHECK(rp.d == std::vector<double>{0, 2, 2});
    CHECK(rp.u0 == 0.0);
    CHECK(rp.d0 == 0.0);
}

TEST_CASE("reflection: initial state outside the band is pushed in at time zero") {
    const auto above = mfg::reflect(hand_path({0, 1}, {3, 3.5}), {-1, 1});
    CHECK(above.x_reflected[0] == 1.0);
    CHECK(above.d0 == 2.0);
    CHECK(above.d[0] == 2.0);
    CHECK(above.u0 == 0.0);

    const auto below = mfg::reflect(hand_path({0, 1}, {-4, -4.2}), {-1, 1});
    CHECK(below.x_reflected[0] == -1.0);
    CHECK(below.u0 == 3.0);
    CHECK(below.u[0] == 3.0);
}

TEST_CASE("reflection: identity, monotone controls, band confinement on jump paths") {
    for (std::uint64_t path_id = 0; path_id < 25; ++path_id) {
        auto rng = mfg::path_rng(101, path_id);
        const auto path = mfg::simulate_path(mfg::LevyModel(kRef), 0.3, 20.0, 1e-2, rng);
        const auto rp = mfg::reflect(path, {-0.7, 0.9});
        for (std::size_t k = 0; k < path.times.size(); ++k) {
            CHECK(std::abs(rp.x_reflected[k] - (path.values[k] + rp.u[k] - rp.d[k])) <=
                  1e-12);
            CHECK(rp.x_reflected[k] >= -0.7);
            CHECK(rp.x_reflected[k] <= 0.9);
            if (k > 0) {
                CHECK(rp.u[k] >= rp.u[k - 1]);
                CHECK(rp.d[k] >= rp.d[k - 1]);
            }
        }
    }
}

TEST_CASE("reflection: complementarity sums vanish identically") {
    // the one-step recursion leaves the state exactly on the barrier it pushed
    // from, so the discrete complementarity sums are exact zeros, not just small
    for (std::uint64_t path_id = 0; path_id < 10; ++path_id) {
        auto rng = mfg::path_rng(202, path_id);
        const auto path = mfg::simulate_path(mfg::LevyModel(kRef), 0.0, 30.0, 1e-2, rng);
        const auto rp = mfg::reflect(path, {-1.0, 1.0});
        const auto sums = mfg::complementarity(rp, {-1.0, 1.0});
        CHECK(sums.lower == 0.0);
        CHECK(sums.upper == 0.0);
        CHECK(sums.control_total_variation > 0.0);
    }
}

TEST_CASE("reflection: translation covariance") {
    auto rng = mfg::path_rng(303, 0);
    const auto path = mfg::simulate_path(mfg::LevyModel(kRef), 0.1, 15.0, 1e-2, rng);
    auto shifted = path;
    const double c = 2.75;
    for (auto& v : shifted.values) v += c;

    const auto rp = mfg::reflect(path, {-1.0, 1.0});
    const auto rp_shift = mfg::reflect(shifted, {-1.0 + c, 1.0 + c});
    for (std::size_t k = 0; k < path.times.size(); ++k) {
        CHECK(rp_shift.x_reflected[k] == doctest::Approx(rp.x_reflected[k] + c).epsilon(1e-12));
        CHECK(rp_shift.u[k] == doctest::Approx(rp.u[k]).epsilon(1e-12));
        CHECK(rp_shift.d[k] == doctest::Approx(rp.d[k]).epsilon(1e-12));
    }
}

TEST_CASE("reflection: wider bands need less control on average") {
    double tv_narrow = 0.0, tv_wide = 0.0;
    for (std::uint64_t path_id = 0; path_id < 40; ++path_id) {
        auto rng = mfg::path_rng(404, path_id);
        const auto path = mfg::simulate_path(mfg::LevyModel(kRef), 0.0, 25.0, 1e-2, rng);
        tv_narrow +=
            mfg::complementarity(mfg::reflect(path, {-0.5, 0.5}), {-0.5, 0.5})
                .control_total_variation;
        tv_wide += mfg::complementarity(mfg::reflect(path, {-2.0, 2.0}), {-2.0, 2.0})
                       .control_total_variation;
    }
    CHECK(tv_wide < tv_narrow);
}

TEST_CASE("reflection: degenerate band pins the state and absorbs every increment") {
    auto rng = mfg::path_rng(505, 0);
    const auto path = mfg::simulate_path(mfg::LevyModel(kRef), 0.0, 10.0, 1e-2, rng);
    const auto rp = mfg::reflect(path, {0.0, 0.0});
    for (std::size_t k = 0; k < path.times.size(); ++k) {
        CHECK(rp.x_reflected[k] == 0.0);
        CHECK(std::abs(path.values[k] + rp.u[k] - rp.d[k]) <= 1e-12);
    }
}

TEST_CASE("path simulation: grid layout for diffusive models, jumps for the jump model") {
    auto rng = mfg::path_rng(606, 0);
    const auto jump_path = mfg::simulate_path(mfg::LevyModel(kRef), 0.0, 5.0, 1e-2, rng);
    CHECK(jump_path.exact_jumps);
    CHECK(jump_path.times.front() == 0.0);
    CHECK(jump_path.values.front() == 0.0);
    for (std::size_t k = 1; k < jump_path.times.size(); ++k)
        CHECK(jump_path.times[k] > jump_path.times[k - 1]);

    const auto grid_path =
        mfg::simulate_path(mfg::LevyModel(mfg::BrownianDrift{0.0, 1.0}), 0.5, 2.0, 0.25, rng);
    CHECK_FALSE(grid_path.exact_jumps);
    CHECK(grid_path.times.size() == 9);
    CHECK(grid_path.values.front() == 0.5);
    CHECK(grid_path.times.back() == doctest::Approx(2.0));
}

TEST_CASE("path simulation: refuses paths beyond the point cap") {
    auto rng = mfg::path_rng(707, 0);
    CHECK_THROWS_AS(
        mfg::simulate_path(mfg::LevyModel(mfg::BrownianDrift{}), 0.0, 10.0, 1e-9, rng, 1000),
        std::length_error);
}

TEST_CASE("reflection: rejects inverted barriers and empty paths") {
    CHECK_THROWS_AS(mfg::reflect(hand_path({0}, {0}), {1.0, -1.0}), std::invalid_argument);
    CHECK_THROWS_AS(mfg::reflect(mfg::SamplePath{}, {-1.0, 1.0}), std::invalid_argument);
}
