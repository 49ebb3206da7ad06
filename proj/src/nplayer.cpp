#include "levymfg/nplayer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "levymfg/errors.hpp"
#include "levymfg/parallel.hpp"

namespace mfg {

namespace {

// statistics of one player's reflected trajectory over a single band
struct BandStats {
    double time = 0.0;    // occupation time past burn-in
    double f_int = 0.0;   // integral of f(x)
    double g_int = 0.0;   // integral of g(x)
    double g2_int = 0.0;  // integral of g(x)^2
    double u = 0.0;       // up-push total past burn-in
    double d = 0.0;       // down-push total past burn-in
};

std::uint64_t player_master(const PlayerEnsemble& ensemble, int j) {
    if (!ensemble.player_seeds.empty())
        return ensemble.player_seeds[static_cast<std::size_t>(j)];
    return derive_seed(ensemble.master_seed, static_cast<std::uint64_t>(j));
}

// Drives one noise stream through every band in lockstep.  The draws do not
// depend on the state, so all bands see the identical free increments; that is
// the common-random-number coupling the gap estimate relies on.
void simulate_bands(const LevyModel& model, const std::vector<Barriers>& bands,
                    FieldFunction f, const NashGapOptions& opts, Rng& rng,
                    std::vector<BandStats>& stats) {
    stats.assign(bands.size(), BandStats{});
    std::vector<double> x(bands.size());
    for (std::size_t k = 0; k < bands.size(); ++k)
        x[k] = std::clamp(0.0, bands[k].a, bands[k].b);

    const auto weigh = [&](double t0, double t1) {
        return std::max(0.0, std::min(t1, opts.horizon) - std::max(t0, opts.burn_in));
    };
    const auto occupy = [&](std::size_t k, double w) {
        auto& s = stats[k];
        const double g = x[k] * x[k];
        s.time += w;
        s.f_int += w * apply(f, x[k]);
        s.g_int += w * g;
        s.g2_int += w * g * g;
    };
    const auto move = [&](std::size_t k, double jump, bool counted) {
        double xn = x[k] + jump;
        if (xn < bands[k].a) {
            if (counted) stats[k].u += bands[k].a - xn;
            xn = bands[k].a;
        } else if (xn > bands[k].b) {
            if (counted) stats[k].d += xn - bands[k].b;
            xn = bands[k].b;
        }
        x[k] = xn;
    };

    if (std::holds_alternative<CompoundPoissonTwoExp>(model)) {
        const auto& cp = std::get<CompoundPoissonTwoExp>(model);
        const double total_rate = cp.lambda1 + cp.lambda2;
        const double p_down = cp.lambda1 / total_rate;
        double t = 0.0;
        while (t < opts.horizon) {
            const double dt = exponential(rng, total_rate);
            const double w = weigh(t, t + dt);
            for (std::size_t k = 0; k < bands.size(); ++k)
                if (w > 0) occupy(k, w);
            t += dt;
            if (t >= opts.horizon) break;
            const double jump = uniform01(rng) < p_down ? -exponential(rng, cp.alpha1)
                                                        : exponential(rng, cp.alpha2);
            for (std::size_t k = 0; k < bands.size(); ++k) move(k, jump, t >= opts.burn_in);
        }
    } else {
        double t = 0.0;
        while (t < opts.horizon) {
            const double dt = std::min(opts.grid_step, opts.horizon - t);
            const double w = weigh(t, t + dt);
            for (std::size_t k = 0; k < bands.size(); ++k)
                if (w > 0) occupy(k, w);
            t += dt;
            const double jump = sample_increment(model, dt, rng);
            for (std::size_t k = 0; k < bands.size(); ++k) move(k, jump, t >= opts.burn_in);
        }
    }
}

void check_ensemble(const PlayerEnsemble& ensemble, const NashGapOptions& opts) {
    if (ensemble.n_players < 2) throw std::invalid_argument("need at least 2 players");
    if (ensemble.a > ensemble.b)
        throw std::invalid_argument("lower barrier above upper barrier");
    if (!ensemble.player_seeds.empty() &&
        ensemble.player_seeds.size() != static_cast<std::size_t>(ensemble.n_players))
        throw std::invalid_argument("player_seeds must have one entry per player");
    if (opts.horizon <= opts.burn_in)
        throw std::invalid_argument("horizon must exceed burn_in");
    validate(ensemble.model);
}

}  // namespace

std::vector<double> player_field_values(const PlayerEnsemble& ensemble, FieldFunction f,
                                        const NashGapOptions& opts) {
    check_ensemble(ensemble, opts);
    const std::vector<Barriers> common = {{ensemble.a, ensemble.b}};
    std::vector<double> values(ensemble.n_players);
    parallel_for(values.size(), opts.workers, [&](std::size_t j) {
        auto rng = Rng(derive_seed(player_master(ensemble, static_cast<int>(j)), 0));
        std::vector<BandStats> stats;
        simulate_bands(ensemble.model, common, f, opts, rng, stats);
        if (stats[0].time <= 0) throw BudgetError("horizon too short for a tail average");
        values[j] = stats[0].f_int / stats[0].time;
    });
    return values;
}

double empirical_mean_field(const PlayerEnsemble& ensemble, FieldFunction f,
                            int excluded_player, const NashGapOptions& opts) {
    const auto values = player_field_values(ensemble, f, opts);
    double sum = 0.0;
    int n = 0;
    for (int j = 0; j < ensemble.n_players; ++j) {
        if (j == excluded_player) continue;
        sum += values[j];
        ++n;
    }
    if (n == 0) throw std::invalid_argument("no players left after exclusion");
    return sum / n;
}

NashGapReport nash_gap(const PlayerEnsemble& ensemble, const CostSpec& cost,
                       const std::vector<std::pair<double, double>>& deviations,
                       double delta_concentration, const NashGapOptions& opts) {
    check_ensemble(ensemble, opts);
    if (delta_concentration <= 0)
        throw std::invalid_argument("concentration parameter must be positive");
    for (const auto& [da, db] : deviations)
        if (da > db) throw std::invalid_argument("deviation band is inverted");

    // band 0 is the common strategy; the deviator walks all bands in lockstep
    std::vector<Barriers> bands = {{ensemble.a, ensemble.b}};
    for (const auto& [da, db] : deviations) bands.push_back({da, db});

    const int n_players = ensemble.n_players;
    const int replicas = std::max(1, opts.replicas);
    const std::size_t n_bands = bands.size();

    // per (replica, player) results; player 0 contributes per-band stats, the
    // others only their stationary f value
    std::vector<double> field_vals(static_cast<std::size_t>(replicas) * n_players, 0.0);
    std::vector<std::vector<BandStats>> dev_stats(replicas);
    const std::vector<Barriers> common = {bands[0]};

    parallel_for(static_cast<std::size_t>(replicas) * n_players, opts.workers,
                 [&](std::size_t task) {
                     const int r = static_cast<int>(task) / n_players;
                     const int j = static_cast<int>(task) % n_players;
                     auto rng = Rng(derive_seed(player_master(ensemble, j),
                                                static_cast<std::uint64_t>(r)));
                     std::vector<BandStats> stats;
                     simulate_bands(ensemble.model, j == 0 ? bands : common, cost.f, opts,
                                    rng, stats);
                     if (stats[0].time <= 0)
                         throw BudgetError("horizon too short for a tail average");
                     if (j == 0)
                         dev_stats[r] = std::move(stats);
                     else
                         field_vals[task] = stats[0].f_int / stats[0].time;
                 });

    // per-replica deviator costs at each band, against that replica's field
    std::vector<std::vector<double>> costs(replicas, std::vector<double>(n_bands));
    std::vector<double> k_per_rep(replicas);
    for (int r = 0; r < replicas; ++r) {
        double pbar = 0.0;
        for (int j = 1; j < n_players; ++j)
            pbar += field_vals[static_cast<std::size_t>(r) * n_players + j];
        pbar /= (n_players - 1);
        const double hp = apply(cost.h, pbar);
        for (std::size_t k = 0; k < n_bands; ++k) {
            const auto& s = dev_stats[r][k];
            costs[r][k] = (hp * s.g_int + cost.q_u * s.u + cost.q_d * s.d) / s.time;
        }
        k_per_rep[r] = dev_stats[r][0].g2_int / dev_stats[r][0].time;
    }

    const auto mean_se = [&](auto&& get) {
        double m = 0.0;
        for (int r = 0; r < replicas; ++r) m += get(r);
        m /= replicas;
        double se = 0.0;
        if (replicas > 1) {
            for (int r = 0; r < replicas; ++r) {
                const double dv = get(r) - m;
                se += dv * dv;
            }
            se = std::sqrt(se / ((replicas - 1.0) * replicas));
        }
        return std::pair{m, se};
    };

    NashGapReport report;
    report.deviating_player = 0;
    std::tie(report.equilibrium_cost, report.equilibrium_stderr) =
        mean_se([&](int r) { return costs[r][0]; });
    std::tie(report.k_estimate, std::ignore) = mean_se([&](int r) { return k_per_rep[r]; });

    std::size_t best = 0;  // band index of the cheapest deviation (0 = stay put)
    double best_cost = report.equilibrium_cost;
    for (std::size_t k = 1; k < n_bands; ++k) {
        DeviationOutcome out;
        out.a_dev = bands[k].a;
        out.b_dev = bands[k].b;
        std::tie(out.cost, out.stderr_) = mean_se([&](int r) { return costs[r][k]; });
        if (out.cost < best_cost) {
            best_cost = out.cost;
            best = k;
        }
        report.deviations.push_back(out);
    }
    report.best_deviation_cost = best_cost;
    report.empirical_gap = report.equilibrium_cost - best_cost;
    std::tie(std::ignore, report.gap_stderr) =
        mean_se([&](int r) { return costs[r][0] - costs[r][best]; });

    const double h2 = max_h_squared(cost.h, ensemble.a, ensemble.b);
    report.r_bound = hoeffding_r(report.k_estimate, delta_concentration, ensemble.a,
                                 ensemble.b, n_players, h2);
    return report;
}

double hoeffding_r(double k, double delta, double a, double b, int n_players,
                   double h2_max, bool discounted, double eps) {
    if (n_players < 2) throw std::invalid_argument("need at least 2 players");
    if (delta <= 0) throw std::invalid_argument("concentration parameter must be positive");
    if (k < 0) throw std::invalid_argument("second-moment cap must be nonnegative");
    if (discounted && eps <= 0)
        throw std::invalid_argument("discount rate must be positive");
    const double width2 = (b - a) * (b - a);
    const double r =
        h2_max * 4.0 * k * std::exp(-2.0 * delta * delta / (width2 * n_players)) +
        2.0 * k / n_players;
    return discounted ? r / eps : r;
}

double hoeffding_r_rescaled(double k, double delta, double a, double b, int n_players,
                            double h2_max, bool discounted, double eps) {
    if (n_players < 2) throw std::invalid_argument("need at least 2 players");
    if (delta <= 0) throw std::invalid_argument("concentration parameter must be positive");
    if (k < 0) throw std::invalid_argument("second-moment cap must be nonnegative");
    if (discounted && eps <= 0)
        throw std::invalid_argument("discount rate must be positive");
    const double width2 = (b - a) * (b - a);
    const double r =
        h2_max * 4.0 * k * std::exp(-2.0 * delta * delta * n_players / width2) +
        2.0 * k / n_players;
    return discounted ? r / eps : r;
}

double max_h_squared(FieldWeight h, double lo, double hi, int grid) {
    if (hi < lo) throw std::invalid_argument("empty scan interval");
    if (grid < 2) throw std::invalid_argument("grid too small");
    double best = 0.0;
    for (int i = 0; i < grid; ++i) {
        const double y = lo + (hi - lo) * i / (grid - 1.0);
        const double v = apply(h, y);
        best = std::max(best, v * v);
    }
    return best;
}

}  // namespace mfg
