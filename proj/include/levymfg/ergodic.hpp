#pragma once

#include <cstdint>
#include <vector>

#include "levymfg/solver.hpp"

namespace mfg {

struct RegenerativeEstimate {
    double ratio = 0.0;            // long-run average cost per unit time
    double stderr_ = 0.0;
    std::size_t cycle_count = 0;   // regeneration cycles (or batches)
    double cycle_mean_reward = 0.0;
    double cycle_mean_length = 0.0;
    bool batch_means = false;      // true when regeneration is not observable
    double batch_correlation = 0.0;  // lag-1 autocorrelation diagnostic
};

struct ErgodicOptions {
    double horizon = 2e4;       // total simulated time
    double grid_step = 2e-4;    // grid families only
    std::uint64_t seed = 1;
    int workers = 1;
    std::size_t min_cycles = 30;
    double x0_offset = 0.0;     // start at a + offset
};

// Long-run average of  c(X,p) dt + q_u dU + q_d dD  for the reflected process.
// The compound Poisson estimator is regenerative with cycles delimited by
// returns to the lower barrier after having touched the upper one (ratio
// estimator over i.i.d. cycles); grid families fall back to batch means since
// exact point hits are not observable on a grid.  Throws std::runtime_error
// (budget) when fewer than min_cycles cycles complete.
RegenerativeEstimate ergodic_cost_mc(const LevyModel& model, const CostSpec& cost,
                                     double a, double b, double p,
                                     const ErgodicOptions& opts);

struct ErgodicEquilibrium {
    double a_star = 0.0, b_star = 0.0;
    double d_star = 0.0;
    double rho = 0.0;
    double loss_rate_1 = 0.0;      // E_pi dD_1 at band width 1
    double p_star = 0.0;           // E X_inf^2 under the centered band
    double j_value = 0.0;          // equilibrium long-run cost
    double stationarity_residual = 0.0;  // first-order condition at d_star
    double legacy_display_residual = 0.0;  // see below
};

// Ergodic equilibrium for the stable family with cost x^2 (1 + |y|),
// f(y) = y^2, q_u = q_d = q.  The band [a,b] = [-d rho, d (1-rho)] centers the
// stationary law; the width minimizes
//   (1 + p) rho(1-rho)/(alpha+1) d^2 + 2 q E_1 d^{1-alpha},  p = rho(1-rho)/(alpha+1) d^2,
// whose stationarity condition (best response at the self-consistent p)
//   d^{alpha+1} (1 + v d^2) = (alpha-1) q E_1 / v,   v = rho(1-rho)/(alpha+1)
// is solved by safeguarded bisection to 1e-12.  legacy_display_residual reports
// how far the returned b_star is from a historical radical-form display of the
// same condition; that display linearizes a substitution that is only valid at
// alpha = 1 and is not reproduced by the solver (see README).
ErgodicEquilibrium stable_ergodic_equilibrium(double alpha, double c_plus,
                                              double c_minus, double q);

// Closed-form long-run cost of the band (a,b) = (-d rho, d(1-rho)) at the
// self-consistent p = v d^2.
double stable_ergodic_cost(double alpha, double c_plus, double c_minus, double q,
                           double d);

struct AbelianPoint {
    double eps = 0.0;
    double eps_j_eps = 0.0;   // eps * discounted cost
    double stderr_ = 0.0;
    double gap = 0.0;         // |eps J_eps - J|
};

struct AbelianReport {
    std::vector<AbelianPoint> points;
    double ergodic_j = 0.0;
    double ergodic_stderr = 0.0;
    bool gaps_decreasing = false;      // plain ordering of the gap estimates
    bool separated_3sigma = false;     // consecutive gaps differ beyond 3 sigma
};

struct AbelianOptions {
    std::size_t n_paths = 20000;
    double horizon_eps_product = 12.0;  // discounted horizon = this / eps
    double ergodic_horizon = 2e5;
    std::uint64_t seed = 1;
    int workers = 1;
    double x0 = 0.0;
};

// Estimates eps * J_eps along eps_list and the ergodic J on the same model and
// cost, and reports the decay of |eps J_eps - J|.
AbelianReport abelian_check(const LevyModel& model, const CostSpec& cost,
                            double a, double b, double p,
                            const std::vector<double>& eps_list,
                            const AbelianOptions& opts);

}  // namespace mfg
