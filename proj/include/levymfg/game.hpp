#pragma once

#include <cstdint>
#include <vector>

#include "levymfg/models.hpp"

namespace mfg {

// Which set of threshold constants the closed-form solvers use.
//
// Consistent: the characteristic quadratic carries (eps + lambda1 + lambda2)
// and the constants are oriented so that the computed thresholds are the
// saddle point of the stopping game below (verified independently by a
// deterministic collocation solve and by Monte Carlo perturbation tests).
//
// LegacyTables: reproduces historical tabulated equilibria: the quadratic's
// leading coefficient reads (eps + 2 lambda2), the constants keep their
// historical orientation, and the solver pairs with the legacy stationary
// mean.  Kept only so old result tables can be regenerated; the saddle
// property does not hold for these thresholds.
enum class ConstantsMode { Consistent, LegacyTables };

struct ThresholdConstants {
    double r_i = 0.0, r_s = 0.0;     // exponents of the two value-function modes
    double pi_i = 0.0, pi_s = 0.0;
    double e_i = 0.0, e_s = 0.0;
    double f_i = 0.0, f_s = 0.0;
    double g_i = 0.0, g_s = 0.0;
};

// Constants entering the closed-form best-response system.  In Consistent
// mode they are built from the quadratic of the reflected orientation
// (lambda/alpha pairs exchanged), which is the orientation under which the
// resulting thresholds pass the saddle check; for a centered model this makes
// e_i == e_s, f_i == f_s, g_i == g_s.
ThresholdConstants cp_threshold_constants(const CompoundPoissonTwoExp& m, double eps,
                                          ConstantsMode mode = ConstantsMode::Consistent);

struct DynkinSolution {
    double a_star = 0.0;
    double b_star = 0.0;
    double delta = 0.0;
    double residual_a = 0.0;   // |a - rhs_a(a,b)| at the returned point
    double residual_b = 0.0;
    int iterations = 0;
    bool newton_used = false;
    bool converged = false;
};

// Solves the two-equation threshold system
//   a = -delta - E_I + F_I (E_S e^{r_I d} - E_I G_S) / (e^{(r_I+r_S) d} - G_I G_S)
//   b =  delta + E_S + F_S (-E_I e^{r_S d} + E_S G_I) / (e^{(r_I+r_S) d} - G_I G_S)
// with d = b - a, by damped fixed-point iteration (damping 0.5) with a Newton
// polish on the residuals; residuals below 1e-10 on success.  a_init == b_init
// lets the solver pick its own starting band; the solution does not depend on
// the start (the map contracts in d = b - a on the bracket it is solved over).
DynkinSolution cp_best_response(const CompoundPoissonTwoExp& m, double eps, double delta,
                                ConstantsMode mode = ConstantsMode::Consistent,
                                double a_init = 0.0, double b_init = 0.0);

// Stopping game between a maximizer who stops the first time X <= a (receiving
// -q_u) and a minimizer who stops the first time X >= b (paying q_d), with
// running reward c_x(X_s, p) e^{-eps s} until the first stop.  The cost slope
// is c_x(x,p) = 2 h(p) x for the quadratic running cost x^2 h(p).
struct GameSpec {
    CompoundPoissonTwoExp model;
    double eps = 0.1;
    double two_h = 1.0;   // 2 h(p), the slope coefficient of c_x
    double q_u = 0.5;
    double q_d = 0.5;
};

struct GameValue {
    double value = 0.0;
    double stderr_ = 0.0;
    std::size_t n_paths = 0;
};

// Monte Carlo estimate of the game payoff under threshold strategies (a, b)
// started from x.  x <= a and x >= b stop immediately with payoff -q_u / q_d.
GameValue mc_game_value(const GameSpec& spec, double x, double a, double b,
                        std::size_t n_paths, std::uint64_t seed, int workers = 1);

struct SaddlePerturbation {
    double da = 0.0, db = 0.0;        // applied threshold shift
    double improvement = 0.0;         // payoff gain for the perturbing player
    double stderr_ = 0.0;             // of the paired (common-noise) difference
};

struct SaddleReport {
    double a_star = 0.0, b_star = 0.0;
    double base_value = 0.0;
    double base_stderr = 0.0;
    std::vector<SaddlePerturbation> perturbations;
    bool passed = false;   // no perturbation improves beyond 3 standard errors
};

// Common-random-number check that one-sided threshold perturbations of size
// +-perturbation never improve the perturbing player's payoff beyond noise.
SaddleReport saddle_check(const GameSpec& spec, double a_star, double b_star,
                          double x0, double perturbation, std::size_t n_paths,
                          std::uint64_t seed, int workers = 1,
                          double sigma_gate = 3.0);

}  // namespace mfg
