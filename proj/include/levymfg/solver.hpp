#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "levymfg/game.hpp"
#include "levymfg/stationary.hpp"

namespace mfg {

// Registered cost ingredients: running cost c(x,y) = g(x) h(y), barrier costs
// q_u, q_d, and the mean-field function f defining p = E f(X_inf).
enum class StateCost { Quadratic };  // g(x) = x^2 (strictly convex, min 0 at 0)
// h(y): 1, 0.01 + e^y |cos y|, 1 + |y|, and a zero weight that turns the
// running cost off entirely (cost-free sanity checks only; the equilibrium
// solvers require a positive weight)
enum class FieldWeight { One, ExpCos, OnePlusAbs, Zero };

double apply(FieldWeight h, double y);
FieldWeight field_weight_from_name(const std::string& name);
std::string to_string(FieldWeight h);

struct CostSpec {
    StateCost g = StateCost::Quadratic;
    FieldWeight h = FieldWeight::One;
    FieldFunction f = FieldFunction::Identity;
    double q_u = 0.5;
    double q_d = 0.5;
};

struct BestResponseResult {
    double a = 0.0, b = 0.0;
    double p = 0.0;       // mean-field value of the input barriers
    double delta = 0.0;   // eps q / (2 h(p))
};

// One application of the best-response map F: barriers (a,b) -> stationary
// mean-field value p -> threshold solve at delta = eps q / (2 h(p)).
// Requires q_u == q_d (the closed-form threshold system assumes a symmetric
// stopping payoff).  LegacyTables mode pairs with the legacy stationary mean
// when f is the identity.
BestResponseResult best_response(const CompoundPoissonTwoExp& m, const CostSpec& cost,
                                 double eps, double a, double b,
                                 ConstantsMode mode = ConstantsMode::Consistent);

struct EquilibriumResult {
    double a_star = 0.0, b_star = 0.0;
    double p_star = 0.0;
    double fixed_point_residual = 0.0;  // max-norm of F(a*,b*) - (a*,b*), re-evaluated
    int iterations = 0;
    bool converged = false;
    bool newton_fallback = false;
    std::vector<std::pair<double, double>> trace;
};

struct SolveOptions {
    double damping = 0.5;   // Picard step (a,b) <- (1-l)(a,b) + l F(a,b)
    double tol = 1e-9;
    int max_iter = 200;
};

// Damped Picard iteration from init.  Fixed points whose Picard multiplier
// exceeds one in modulus repel the iteration from every damping in (0,1]; when
// Picard stalls, a damped Newton solve of F(a,b) - (a,b) = 0 restarted from
// the initial guess finds those as well.  The residual in the result is always
// re-evaluated from scratch at the returned point.
EquilibriumResult find_equilibrium(const CompoundPoissonTwoExp& m, const CostSpec& cost,
                                   double eps, double a0, double b0,
                                   const SolveOptions& opts = {},
                                   ConstantsMode mode = ConstantsMode::Consistent);

// find_equilibrium from every grid point, deduplicated within merge_radius in
// max norm, sorted by a_star.  Failures are dropped (recorded in failures).
struct MultiStartResult {
    std::vector<EquilibriumResult> equilibria;
    int failures = 0;
    int starts = 0;
};
MultiStartResult multi_start(const CompoundPoissonTwoExp& m, const CostSpec& cost,
                             double eps, const std::vector<std::pair<double, double>>& inits,
                             const SolveOptions& opts = {},
                             ConstantsMode mode = ConstantsMode::Consistent,
                             double merge_radius = 1e-4);

// Uniform n x n grid of starts over [a_lo, 0] x [0, b_hi].
std::vector<std::pair<double, double>> grid_inits(double a_lo, double b_hi, int n);

struct DiscountedCostEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    double truncation_factor = 0.0;  // e^{-eps * horizon}
};

// Monte Carlo estimate of the discounted cost
//   E_x int_0^inf e^{-eps s} ( g(X_s) h(p) ds + q_u dU_s + q_d dD_s ) + u0 q_u + d0 q_d
// truncated at the given horizon (initial pushes enter undiscounted).
DiscountedCostEstimate discounted_cost_mc(const LevyModel& model, const CostSpec& cost,
                                          double eps, double a, double b, double p,
                                          double x0, std::size_t n_paths, double horizon,
                                          std::uint64_t seed, int workers = 1,
                                          double grid_step = 1e-3);

}  // namespace mfg
