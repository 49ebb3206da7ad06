#include "levymfg/ergodic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "levymfg/errors.hpp"
#include "levymfg/parallel.hpp"

namespace mfg {

namespace {

double lag1_correlation(const std::vector<double>& z) {
    if (z.size() < 3) return 0.0;
    const double mean = std::accumulate(z.begin(), z.end(), 0.0) / z.size();
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double zi = z[i] - mean;
        den += zi * zi;
        if (i + 1 < z.size()) num += zi * (z[i + 1] - mean);
    }
    return den > 0 ? num / den : 0.0;
}

}  // namespace

RegenerativeEstimate ergodic_cost_mc(const LevyModel& model, const CostSpec& cost,
                                     double a, double b, double p,
                                     const ErgodicOptions& opts) {
    if (a > b) throw std::invalid_argument("lower barrier above upper barrier");
    if (opts.horizon <= 0) throw std::invalid_argument("horizon must be positive");
    validate(model);
    const double hp = apply(cost.h, p);
    const bool exact = std::holds_alternative<CompoundPoissonTwoExp>(model);
    if (!exact && a == b)
        throw std::invalid_argument("degenerate band requires a bounded-variation model");

    const int replicas = std::max(1, opts.workers);
    const double rep_horizon = opts.horizon / replicas;
    RegenerativeEstimate est;

    if (exact) {
        // i.i.d. regeneration cycles: from one visit of the lower barrier that
        // follows a visit of the upper one to the next such visit
        const auto& cp = std::get<CompoundPoissonTwoExp>(model);
        std::vector<std::vector<std::pair<double, double>>> cycles(replicas);
        parallel_for(replicas, opts.workers, [&](std::size_t rep) {
            auto rng = path_rng(opts.seed, rep);
            const double total_rate = cp.lambda1 + cp.lambda2;
            const double p_down = cp.lambda1 / total_rate;
            double x = std::clamp(a + opts.x0_offset, a, b);
            bool touched_upper = false, recording = false;
            double reward = 0.0, length = 0.0, t = 0.0;
            auto& out = cycles[rep];
            while (true) {
                const double dt = exponential(rng, total_rate);
                if (t + dt >= rep_horizon) break;  // partial cycle discarded
                t += dt;
                if (recording) {
                    reward += hp * x * x * dt;
                    length += dt;
                }
                double xn = x + (uniform01(rng) < p_down ? -exponential(rng, cp.alpha1)
                                                         : exponential(rng, cp.alpha2));
                if (xn > b) {
                    if (recording) reward += cost.q_d * (xn - b);
                    xn = b;
                    touched_upper = true;
                } else if (xn < a) {
                    if (recording) reward += cost.q_u * (a - xn);
                    xn = a;
                    if (touched_upper) {
                        if (recording) {
                            out.emplace_back(reward, length);
                            reward = 0.0;
                            length = 0.0;
                        }
                        recording = true;
                        touched_upper = false;
                    }
                }
                x = xn;
            }
        });

        std::vector<double> rewards, lengths;
        for (const auto& rep : cycles)
            for (const auto& [r, l] : rep) {
                rewards.push_back(r);
                lengths.push_back(l);
            }
        const std::size_t n = rewards.size();
        if (n < opts.min_cycles)
            throw BudgetError("only " + std::to_string(n) + " regeneration cycles completed, need " +
                              std::to_string(opts.min_cycles));
        const double sum_r = std::accumulate(rewards.begin(), rewards.end(), 0.0);
        const double sum_l = std::accumulate(lengths.begin(), lengths.end(), 0.0);
        est.ratio = sum_r / sum_l;
        est.cycle_count = n;
        est.cycle_mean_reward = sum_r / n;
        est.cycle_mean_length = sum_l / n;
        // delta-method standard error of the ratio over i.i.d. cycles
        std::vector<double> resid(n);
        double s2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            resid[i] = rewards[i] - est.ratio * lengths[i];
            s2 += resid[i] * resid[i];
        }
        s2 /= (n - 1.0);
        est.stderr_ = std::sqrt(s2 / n) / est.cycle_mean_length;
        est.batch_correlation = lag1_correlation(resid);
        return est;
    }

    // grid families: regeneration points are not observable on a grid, so fall
    // back to batch means over equal time blocks
    const std::size_t target_batches = std::max<std::size_t>(opts.min_cycles, 30);
    const std::size_t per_rep = (target_batches + replicas - 1) / replicas;
    const double batch_len = rep_horizon / per_rep;
    const std::size_t steps_per_batch =
        static_cast<std::size_t>(std::ceil(batch_len / opts.grid_step));
    if (steps_per_batch < 10) throw BudgetError("batches shorter than 10 grid steps");

    std::vector<std::vector<double>> batch_cost(replicas);
    parallel_for(replicas, opts.workers, [&](std::size_t rep) {
        auto rng = path_rng(opts.seed, rep);
        double x = std::clamp(a + opts.x0_offset, a, b);
        auto& out = batch_cost[rep];
        out.assign(per_rep, 0.0);
        for (std::size_t j = 0; j < per_rep; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < steps_per_batch; ++k) {
                acc += hp * x * x * opts.grid_step;
                double xn = x + sample_increment(model, opts.grid_step, rng);
                if (xn < a) {
                    acc += cost.q_u * (a - xn);
                    xn = a;
                } else if (xn > b) {
                    acc += cost.q_d * (xn - b);
                    xn = b;
                }
                x = xn;
            }
            out[j] = acc;
        }
    });

    std::vector<double> rates;
    const double true_batch_len = steps_per_batch * opts.grid_step;
    for (const auto& rep : batch_cost)
        for (double c : rep) rates.push_back(c / true_batch_len);
    const std::size_t nb = rates.size();
    const double mean_rate = std::accumulate(rates.begin(), rates.end(), 0.0) / nb;
    double var = 0.0;
    for (double r : rates) var += (r - mean_rate) * (r - mean_rate);
    var /= (nb - 1.0);
    est.ratio = mean_rate;
    est.stderr_ = std::sqrt(var / nb);
    est.cycle_count = nb;
    est.cycle_mean_reward = mean_rate * true_batch_len;
    est.cycle_mean_length = true_batch_len;
    est.batch_means = true;
    est.batch_correlation = lag1_correlation(rates);
    return est;
}

double stable_ergodic_cost(double alpha, double c_plus, double c_minus, double q,
                           double d) {
    const double rho = stable_rho(alpha, c_plus, c_minus);
    const double v = rho * (1.0 - rho) / (alpha + 1.0);
    const double p = v * d * d;
    const double e1 = stable_loss_rate(alpha, c_plus, c_minus, 1.0);
    return (1.0 + p) * p + 2.0 * q * e1 * std::pow(d, 1.0 - alpha);
}

ErgodicEquilibrium stable_ergodic_equilibrium(double alpha, double c_plus,
                                              double c_minus, double q) {
    if (q <= 0) throw std::invalid_argument("barrier cost must be positive");
    ErgodicEquilibrium eq;
    eq.rho = stable_rho(alpha, c_plus, c_minus);
    eq.loss_rate_1 = stable_loss_rate(alpha, c_plus, c_minus, 1.0);
    const double v = eq.rho * (1.0 - eq.rho) / (alpha + 1.0);
    const double rhs = (alpha - 1.0) * q * eq.loss_rate_1 / v;

    // lhs is strictly increasing from 0, so the bracket always closes
    const auto lhs = [&](double d) {
        return std::pow(d, alpha + 1.0) * (1.0 + v * d * d);
    };
    double lo = 0.0, hi = 1.0;
    while (lhs(hi) < rhs) hi *= 2.0;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        (lhs(mid) < rhs ? lo : hi) = mid;
    }
    const double d = 0.5 * (lo + hi);

    eq.d_star = d;
    eq.a_star = -d * eq.rho;
    eq.b_star = d * (1.0 - eq.rho);
    eq.p_star = v * d * d;
    eq.j_value = stable_ergodic_cost(alpha, c_plus, c_minus, q, d);
    eq.stationarity_residual = std::abs(lhs(d) - rhs);

    // historical radical-form display of the same stationarity condition; it
    // substitutes u = (b*)^(alpha+1) as if the equation were quadratic in u,
    // which only holds at alpha = 1, so the two values disagree (see README)
    {
        const double r = eq.rho;
        const double qa = r / std::pow(1.0 - r, alpha + 2.0);
        const double qb = 1.0 / std::pow(alpha - 1.0, alpha + 1.0);
        const double rad = (alpha * alpha - 1.0) * q * eq.loss_rate_1 / (r * (1.0 - r));
        const double u =
            (-qb + std::sqrt(1.0 / std::pow(alpha - 1.0, 2.0 * alpha + 2.0) + 4.0 * qa * rad)) /
            (2.0 * qa);
        const double b_display = std::pow(u, 1.0 / (alpha + 1.0));
        eq.legacy_display_residual = std::abs(eq.b_star - b_display);
    }
    return eq;
}

AbelianReport abelian_check(const LevyModel& model, const CostSpec& cost,
                            double a, double b, double p,
                            const std::vector<double>& eps_list,
                            const AbelianOptions& opts) {
    if (eps_list.empty()) throw std::invalid_argument("need at least one discount rate");

    AbelianReport report;
    {
        ErgodicOptions eopts;
        eopts.horizon = opts.ergodic_horizon;
        eopts.seed = derive_seed(opts.seed, 901);
        eopts.workers = opts.workers;
        const auto erg = ergodic_cost_mc(model, cost, a, b, p, eopts);
        report.ergodic_j = erg.ratio;
        report.ergodic_stderr = erg.stderr_;
    }

    std::vector<double> eps_sorted = eps_list;
    std::sort(eps_sorted.begin(), eps_sorted.end(), std::greater<>());
    for (std::size_t k = 0; k < eps_sorted.size(); ++k) {
        const double eps = eps_sorted[k];
        const double horizon = opts.horizon_eps_product / eps;
        const auto est = discounted_cost_mc(model, cost, eps, a, b, p, opts.x0,
                                            opts.n_paths, horizon,
                                            derive_seed(opts.seed, 7700 + k), opts.workers);
        AbelianPoint pt;
        pt.eps = eps;
        pt.eps_j_eps = eps * est.value;
        pt.stderr_ = eps * est.stderr_;
        pt.gap = std::abs(pt.eps_j_eps - report.ergodic_j);
        report.points.push_back(pt);
    }

    report.gaps_decreasing = true;
    report.separated_3sigma = report.points.size() > 1;
    for (std::size_t k = 0; k + 1 < report.points.size(); ++k) {
        const auto& big = report.points[k];      // larger eps
        const auto& small = report.points[k + 1];
        if (small.gap > big.gap) report.gaps_decreasing = false;
        const double se = std::sqrt(big.stderr_ * big.stderr_ + small.stderr_ * small.stderr_);
        if (std::abs(big.gap - small.gap) <= 3.0 * se) report.separated_3sigma = false;
    }
    return report;
}

}  // namespace mfg
