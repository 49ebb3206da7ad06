#pragma once

#include <cstdint>
#include <vector>

#include "levymfg/solver.hpp"

namespace mfg {

// N players drive i.i.d. copies of the model, all reflecting on the common
// band (a,b); each player's running cost is weighted by h of the average
// mean-field statistic of the other players.
struct PlayerEnsemble {
    LevyModel model;
    int n_players = 2;
    double a = 0.0, b = 0.0;
    std::uint64_t master_seed = 1;  // player j draws stream j
    // explicit per-player seeds (n_players entries); empty derives them from
    // master_seed, and permuting them permutes the players' noise exactly
    std::vector<std::uint64_t> player_seeds;
};

struct NashGapOptions {
    double horizon = 1e4;
    double burn_in = 200.0;
    double grid_step = 1e-3;
    int workers = 1;
    int replicas = 1;   // independent repetitions for noise estimation
};

// Per-player stationary values of f, each estimated by the time average of
// f(X^j) past burn-in on the common band.
std::vector<double> player_field_values(const PlayerEnsemble& ensemble, FieldFunction f,
                                        const NashGapOptions& opts);

// Average of f over the other players' stationary values, each estimated by
// the time average of f(X^j) past burn-in.
double empirical_mean_field(const PlayerEnsemble& ensemble, FieldFunction f,
                            int excluded_player, const NashGapOptions& opts);

struct DeviationOutcome {
    double a_dev = 0.0, b_dev = 0.0;
    double cost = 0.0;       // deviating player's long-run cost
    double stderr_ = 0.0;    // across replicas (0 when replicas == 1)
};

struct NashGapReport {
    int deviating_player = 0;
    double equilibrium_cost = 0.0;
    double equilibrium_stderr = 0.0;
    double best_deviation_cost = 0.0;
    double empirical_gap = 0.0;        // equilibrium_cost - best deviation cost
    double gap_stderr = 0.0;
    double r_bound = 0.0;
    double k_estimate = 0.0;           // time-average of g(X)^2 under the common strategy
    std::vector<DeviationOutcome> deviations;
};

// Ergodic cost of player i when it reflects on (a', b') while everyone else
// keeps (a,b); the -i players and the deviator reuse identical noise streams
// across deviations (common random numbers), so the all-equal deviation
// reproduces the equilibrium cost exactly.
NashGapReport nash_gap(const PlayerEnsemble& ensemble, const CostSpec& cost,
                       const std::vector<std::pair<double, double>>& deviations,
                       double delta_concentration, const NashGapOptions& opts);

// Approximation bound  r = h2_max * 4 K exp(-2 delta^2 / ((b-a)^2 N)) + 2K/N.
// The exponent divides by N, so the first term grows with the player count;
// hoeffding_r_rescaled reads the same bound with the standard concentration
// scaling.  Discounted mode divides by eps.
double hoeffding_r(double k, double delta, double a, double b, int n_players,
                   double h2_max, bool discounted = false, double eps = 1.0);

// Same bound with the exponent read as -2 delta^2 N / (b-a)^2 (the standard
// concentration scaling); reported alongside, clearly labeled.
double hoeffding_r_rescaled(double k, double delta, double a, double b, int n_players,
                            double h2_max, bool discounted = false, double eps = 1.0);

// max of h(y)^2 over y in [lo, hi] by dense grid scan.
double max_h_squared(FieldWeight h, double lo, double hi, int grid = 20001);

}  // namespace mfg
