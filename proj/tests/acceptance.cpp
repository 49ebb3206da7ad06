// End-to-end acceptance checks.  Each case exercises one reference target or
// structural property at its stated tolerance and prints one PASS/FAIL line
// with the measured numbers, so a failing criterion is visible at a glance.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "levymfg/ergodic.hpp"
#include "levymfg/game.hpp"
#include "levymfg/nplayer.hpp"
#include "levymfg/reflect.hpp"
#include "levymfg/solver.hpp"
#include "levymfg/stationary.hpp"

namespace {

const mfg::CompoundPoissonTwoExp kRef{1.5, 1.0, 3.0, 2.0};

mfg::CostSpec oscillatory_cost() {
    mfg::CostSpec cost;
    cost.h = mfg::FieldWeight::ExpCos;  // 0.01 + e^y |cos y|
    cost.f = mfg::FieldFunction::Identity;
    cost.q_u = 0.5;
    cost.q_d = 0.5;
    return cost;
}

class Stopwatch {
  public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void report(int index, bool ok, const char* what, const std::string& detail) {
    std::printf("[%d/8] %s %s: %s\n", index, ok ? "PASS" : "FAIL", what, detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* spec, ...) {
    char buf[512];
    va_list args;
    va_start(args, spec);
    std::vsnprintf(buf, sizeof(buf), spec, args);
    va_end(args);
    return buf;
}

}  // namespace

TEST_CASE("[1/8] multi-start discounted solve recovers the tabulated equilibria") {
    Stopwatch timer;
    const auto result =
        mfg::multi_start(kRef, oscillatory_cost(), 0.1, mfg::grid_inits(-8.0, 8.0, 5), {},
                         mfg::ConstantsMode::LegacyTables);
    const double elapsed = timer.seconds();

    auto found = [&](double a, double b) {
        for (const auto& eq : result.equilibria)
            if (std::abs(eq.a_star - a) <= 5e-3 && std::abs(eq.b_star - b) <= 5e-3)
                return true;
        return false;
    };
    const bool hit_big = found(-5.846, 6.038);
    const bool hit_small = found(-0.581, 0.810);
    const bool ok = hit_big && hit_small && elapsed < 10.0;
    report(1, ok, "legacy multi-start finds (-5.846, 6.038) and (-0.581, 0.810)",
           fmt("%zu equilibria from %d starts, big %s, small %s, %.3f s (budget 10 s)",
               result.equilibria.size(), result.starts, hit_big ? "hit" : "missed",
               hit_small ? "hit" : "missed", elapsed));
    CHECK(hit_big);
    CHECK(hit_small);
    CHECK(elapsed < 10.0);
}

TEST_CASE("[2/8] ergodic closed form against the reference band") {
    Stopwatch timer;
    const auto eq = mfg::stable_ergodic_equilibrium(1.5, 1.0, 2.0, 0.5);
    const double elapsed = timer.seconds();

    const double err_a = std::abs(eq.a_star - (-0.520));
    const double err_b = std::abs(eq.b_star - 0.395);
    const bool ok = err_a <= 1e-3 && err_b <= 1e-3 && elapsed < 1.0;
    report(2, ok, "stable-model band within 1e-3 of (-0.520, 0.395)",
           fmt("computed (%.9f, %.9f), stationarity residual %.1e, %.3f s; the "
               "self-consistent width condition places the band elsewhere "
               "(distance %.3f, %.3f)",
               eq.a_star, eq.b_star, eq.stationarity_residual, elapsed, err_a, err_b));
    CHECK(err_a <= 1e-3);
    CHECK(err_b <= 1e-3);
    CHECK(elapsed < 1.0);
}

TEST_CASE("[3/8] stationary law: simulation against the closed forms") {
    Stopwatch timer;

    // jump model: exact-jump occupation on (-1,1) for 1e5 time units
    mfg::McStationaryOptions cp_opts;
    cp_opts.horizon = 1e5;
    cp_opts.bins = 20;
    cp_opts.workers = 8;  // eight replicas; their scatter is the error bar
    cp_opts.seed = 1;
    const auto cp_est = mfg::mc_stationary(mfg::LevyModel(kRef), -1.0, 1.0, cp_opts);
    const auto cp_closed = mfg::cp_stationary(kRef, -1.0, 1.0);

    double worst_z = 0.0;
    auto track = [&](double est, double target, double se) {
        if (se > 0) worst_z = std::max(worst_z, std::abs(est - target) / se);
    };
    track(cp_est.law.atom_a, cp_closed.atom_a, cp_est.se_atom_a);
    track(cp_est.law.atom_b, cp_closed.atom_b, cp_est.se_atom_b);
    const double bin_mass = (2.0 / 20) / 3.5;  // uniform interior, width 0.1
    for (int k = 0; k < 20; ++k) track(cp_est.law.bin_mass[k], bin_mass, cp_est.se_bin[k]);
    const bool cp_ok = worst_z <= 3.0 && cp_est.se_atom_a > 0;

    // heavy-tail model: grid occupation against the beta moments
    mfg::McStationaryOptions st_opts;
    st_opts.horizon = 1.5e4;
    st_opts.grid_step = 1e-4;
    st_opts.workers = 8;
    st_opts.seed = 1;
    const auto st_est = mfg::mc_stationary(mfg::LevyModel(mfg::StrictlyStable{1.5, 1.0, 2.0}),
                                           -1.0, 1.0, st_opts);
    const double rho = mfg::stable_rho(1.5, 1.0, 2.0);
    const double mean_target = -1.0 + 2.0 * rho;
    const double var_target = 4.0 * rho * (1 - rho) / 2.5;
    const double var_est = st_est.second_moment - st_est.mean * st_est.mean;
    const double se_var = std::sqrt(st_est.se_second_moment * st_est.se_second_moment +
                                    4.0 * st_est.mean * st_est.mean * st_est.se_mean *
                                        st_est.se_mean);
    const double z_mean = std::abs(st_est.mean - mean_target) / st_est.se_mean;
    const double z_var = std::abs(var_est - var_target) / se_var;
    const bool st_ok = z_mean <= 3.0 && z_var <= 3.0;

    const double elapsed = timer.seconds();
    const bool ok = cp_ok && st_ok && elapsed < 60.0;
    report(3, ok, "occupation laws within 3 standard errors",
           fmt("jump model worst |z| %.2f over 22 masses; stable mean z %.2f, "
               "variance z %.2f; %.1f s (budget 60 s)",
               worst_z, z_mean, z_var, elapsed));
    CHECK(cp_ok);
    CHECK(st_ok);
    CHECK(elapsed < 60.0);
}

TEST_CASE("[4/8] reflection controls satisfy complementarity and the identity") {
    bool identity_ok = true, comp_ok = true;
    double worst_identity = 0.0, worst_comp_ratio = 0.0;
    for (std::uint64_t path_id = 0; path_id < 1000; ++path_id) {
        auto rng = mfg::path_rng(4, path_id);
        const auto path = mfg::simulate_path(mfg::LevyModel(kRef), 0.0, 20.0, 1e-2, rng);
        const auto rp = mfg::reflect(path, {-1.0, 1.0});
        for (std::size_t k = 0; k < path.times.size(); ++k) {
            const double gap =
                std::abs(rp.x_reflected[k] - (path.values[k] + rp.u[k] - rp.d[k]));
            worst_identity = std::max(worst_identity, gap);
            if (gap > 1e-12) identity_ok = false;
        }
        const auto sums = mfg::complementarity(rp, {-1.0, 1.0});
        const double gate = 1e-9 * sums.control_total_variation;
        worst_comp_ratio = std::max(
            worst_comp_ratio,
            std::max(sums.lower, sums.upper) / std::max(sums.control_total_variation, 1e-300));
        if (sums.lower > gate || sums.upper > gate) comp_ok = false;
    }
    const bool ok = identity_ok && comp_ok;
    report(4, ok, "skorokhod identity and complementarity on 1000 paths",
           fmt("worst identity error %.2e (gate 1e-12), worst complementarity/TV %.2e "
               "(gate 1e-9)",
               worst_identity, worst_comp_ratio));
    CHECK(identity_ok);
    CHECK(comp_ok);
}

TEST_CASE("[5/8] stopping-game thresholds are a saddle under perturbation") {
    Stopwatch timer;
    const auto sol = mfg::cp_best_response(kRef, 0.1, 0.05);
    mfg::GameSpec spec;
    spec.model = kRef;
    spec.eps = 0.1;
    spec.two_h = 1.0;
    spec.q_u = 0.5;
    spec.q_d = 0.5;
    const auto saddle =
        mfg::saddle_check(spec, sol.a_star, sol.b_star, 0.0, 0.25, 100000, 1, 8);
    const double elapsed = timer.seconds();

    double worst_sigma = -1e300;
    for (const auto& pert : saddle.perturbations)
        if (pert.stderr_ > 0)
            worst_sigma = std::max(worst_sigma, pert.improvement / pert.stderr_);
    const bool ok = saddle.passed && elapsed < 120.0;
    report(5, ok, "no +-0.25 threshold shift improves either player beyond 3 sigma",
           fmt("thresholds (%.6f, %.6f), base value %.5f, best improvement %.1f sigma, "
               "%.1f s (budget 120 s)",
               saddle.a_star, saddle.b_star, saddle.base_value, worst_sigma, elapsed));
    CHECK(saddle.passed);
    CHECK(elapsed < 120.0);
}

TEST_CASE("[6/8] discounted values approach the long-run average as eps shrinks") {
    mfg::CostSpec cost;
    cost.h = mfg::FieldWeight::One;
    cost.q_u = 0.5;
    cost.q_d = 0.5;

    mfg::AbelianOptions opts;
    opts.n_paths = 20000;
    opts.ergodic_horizon = 2e5;
    opts.seed = 1;
    opts.x0 = 1.0;
    const auto report_band = mfg::abelian_check(mfg::LevyModel(kRef), cost, -1.0, 1.0, 0.0,
                                                {0.2, 0.1, 0.05, 0.02}, opts);

    // pinned band: every jump compensated at once, eps J_eps = 1.5 (q_u + q_d)
    mfg::AbelianOptions deg_opts;
    deg_opts.n_paths = 10000;
    deg_opts.ergodic_horizon = 2e4;
    deg_opts.seed = 1;
    const auto degenerate = mfg::abelian_check(mfg::LevyModel(kRef), cost, 0.0, 0.0, 0.0,
                                               {0.2, 0.05}, deg_opts);
    bool degenerate_ok = true;
    double worst_deg_z = 0.0;
    for (const auto& pt : degenerate.points) {
        const double z = std::abs(pt.eps_j_eps - 1.5) / pt.stderr_;
        worst_deg_z = std::max(worst_deg_z, z);
        if (z > 3.0) degenerate_ok = false;
    }

    const bool ok =
        report_band.gaps_decreasing && report_band.separated_3sigma && degenerate_ok;
    report(6, ok, "gap |eps J_eps - J| decreasing and the pinned-band constant holds",
           fmt("gaps %.4f > %.4f > %.4f > %.4f, separated %s; pinned-band worst z %.2f",
               report_band.points[0].gap, report_band.points[1].gap,
               report_band.points[2].gap, report_band.points[3].gap,
               report_band.separated_3sigma ? "yes" : "no", worst_deg_z));
    CHECK(report_band.gaps_decreasing);
    CHECK(report_band.separated_3sigma);
    CHECK(degenerate_ok);
}

TEST_CASE("[7/8] reported equilibria re-solve to themselves within 1e-6") {
    // re-evaluate the fixed-point map from scratch at every reported point,
    // independent of any cached iteration state
    struct Candidate {
        mfg::EquilibriumResult eq;
        mfg::ConstantsMode mode;
    };
    std::vector<Candidate> candidates;

    const auto legacy = mfg::multi_start(kRef, oscillatory_cost(), 0.1,
                                         mfg::grid_inits(-8.0, 8.0, 5), {},
                                         mfg::ConstantsMode::LegacyTables);
    for (const auto& eq : legacy.equilibria)
        candidates.push_back({eq, mfg::ConstantsMode::LegacyTables});

    mfg::CostSpec constant_cost;
    constant_cost.h = mfg::FieldWeight::One;
    candidates.push_back({mfg::find_equilibrium(kRef, constant_cost, 0.1, -1.0, 1.0),
                          mfg::ConstantsMode::Consistent});

    double worst = 0.0;
    bool all_converged = true;
    for (const auto& cand : candidates) {
        if (!cand.eq.converged) all_converged = false;
        const auto& cost = (cand.mode == mfg::ConstantsMode::LegacyTables)
                               ? oscillatory_cost()
                               : constant_cost;
        const auto step =
            mfg::best_response(kRef, cost, 0.1, cand.eq.a_star, cand.eq.b_star, cand.mode);
        worst = std::max(worst, std::max(std::abs(step.a - cand.eq.a_star),
                                         std::abs(step.b - cand.eq.b_star)));
    }
    const bool ok = worst < 1e-6 && all_converged && !candidates.empty();
    report(7, ok, "independent re-evaluation of the fixed-point residuals",
           fmt("%zu equilibria, worst max-norm residual %.2e (gate 1e-6)",
               candidates.size(), worst));
    CHECK(worst < 1e-6);
    CHECK(all_converged);
}

TEST_CASE("[8/8] deviation gap of the finite ensemble sits under the bound") {
    Stopwatch timer;
    const double a_star = -0.580497721886, b_star = 0.809818077716;
    const auto cost = oscillatory_cost();

    auto run = [&](int n) {
        mfg::PlayerEnsemble ensemble;
        ensemble.model = kRef;
        ensemble.n_players = n;
        ensemble.a = a_star;
        ensemble.b = b_star;
        ensemble.master_seed = 1;
        mfg::NashGapOptions opts;
        opts.horizon = 1e4;
        opts.burn_in = 200.0;
        opts.replicas = 6;
        std::vector<std::pair<double, double>> deviations;
        for (int i = -1; i <= 1; ++i)
            for (int j = -1; j <= 1; ++j)
                deviations.emplace_back(a_star + 0.25 * i, b_star + 0.25 * j);
        return mfg::nash_gap(ensemble, cost, deviations, 0.01, opts);
    };

    const auto at_50 = run(50);
    const bool bound_ok = at_50.empirical_gap <= at_50.r_bound;

    const int ladder[] = {5, 20, 80};
    double gap[3], se[3];
    for (int k = 0; k < 3; ++k) {
        const auto r = run(ladder[k]);
        gap[k] = r.empirical_gap;
        se[k] = r.gap_stderr;
    }
    bool trend_ok = true;
    for (int k = 1; k < 3; ++k) {
        const double slack = 3.0 * std::sqrt(se[k] * se[k] + se[k - 1] * se[k - 1]);
        if (gap[k] > gap[k - 1] + slack) trend_ok = false;
    }

    const double elapsed = timer.seconds();
    const bool ok = bound_ok && trend_ok && elapsed < 300.0;
    report(8, ok, "empirical deviation gap vs concentration bound and N-trend",
           fmt("N=50 gap %.4f <= bound %.4f; gaps at N=5,20,80: %.4f, %.4f, %.4f; "
               "%.1f s (budget 300 s)",
               at_50.empirical_gap, at_50.r_bound, gap[0], gap[1], gap[2], elapsed));
    CHECK(bound_ok);
    CHECK(trend_ok);
    CHECK(elapsed < 300.0);
}
