#include "levymfg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "levymfg/errors.hpp"
#include "levymfg/parallel.hpp"

namespace mfg {

double apply(FieldWeight h, double y) {
    switch (h) {
        case FieldWeight::One: return 1.0;
        case FieldWeight::ExpCos: return 0.01 + std::exp(y) * std::abs(std::cos(y));
        case FieldWeight::OnePlusAbs: return 1.0 + std::abs(y);
        case FieldWeight::Zero: return 0.0;
    }
    return 1.0;
}

FieldWeight field_weight_from_name(const std::string& name) {
    if (name == "one") return FieldWeight::One;
    if (name == "exp_cos") return FieldWeight::ExpCos;
    if (name == "one_plus_abs") return FieldWeight::OnePlusAbs;
    if (name == "zero") return FieldWeight::Zero;
    throw std::invalid_argument("unknown field weight: " + name);
}

std::string to_string(FieldWeight h) {
    switch (h) {
        case FieldWeight::One: return "one";
        case FieldWeight::ExpCos: return "exp_cos";
        case FieldWeight::OnePlusAbs: return "one_plus_abs";
        case FieldWeight::Zero: return "zero";
    }
    return "?";
}

namespace {

double state_cost(StateCost g, double x) {
    switch (g) {
        case StateCost::Quadratic: return x * x;
    }
    return x * x;
}

// mean-field value of the band under the model's stationary law; the legacy
// path substitutes the historical mean display when f is the identity
double field_value(const CompoundPoissonTwoExp& m, const CostSpec& cost, double a,
                   double b, ConstantsMode mode) {
    if (cost.f == FieldFunction::Identity)
        return mode == ConstantsMode::LegacyTables ? cp_stationary_mean_legacy(m, a, b)
                                                   : cp_stationary_mean(m, a, b);
    return mean_field_value(cp_stationary(m, a, b), cost.f);
}

}  // namespace

BestResponseResult best_response(const CompoundPoissonTwoExp& m, const CostSpec& cost,
                                 double eps, double a, double b, ConstantsMode mode) {
    if (a > b) throw std::invalid_argument("lower barrier above upper barrier");
    if (cost.q_u != cost.q_d)
        throw std::invalid_argument(
            "closed-form best response requires equal barrier costs q_u == q_d");
    BestResponseResult r;
    r.p = field_value(m, cost, a, b, mode);
    const double hp = apply(cost.h, r.p);
    if (!(hp > 0))
        throw std::invalid_argument("field weight must be positive at the field value");
    r.delta = eps * cost.q_u / (2.0 * hp);
    const auto sol = cp_best_response(m, eps, r.delta, mode, a, b);
    r.a = sol.a_star;
    r.b = sol.b_star;
    return r;
}

EquilibriumResult find_equilibrium(const CompoundPoissonTwoExp& m, const CostSpec& cost,
                                   double eps, double a0, double b0,
                                   const SolveOptions& opts, ConstantsMode mode) {
    if (!(opts.damping > 0.0) || opts.damping > 1.0)
        throw std::invalid_argument("damping must lie in (0, 1]");
    if (!(opts.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");

    const auto F = [&](double a, double b) {
        const auto r = best_response(m, cost, eps, a, b, mode);
        return std::pair{r.a, r.b};
    };

    EquilibriumResult res;
    double a = a0, b = b0;
    res.trace.emplace_back(a, b);
    bool settled = false;
    for (int k = 0; k < opts.max_iter; ++k) {
        const auto [fa, fb] = F(a, b);
        if (std::max(std::abs(fa - a), std::abs(fb - b)) < opts.tol) {
            settled = true;
            res.iterations = k;
            break;
        }
        a = (1.0 - opts.damping) * a + opts.damping * fa;
        b = (1.0 - opts.damping) * b + opts.damping * fb;
        res.trace.emplace_back(a, b);
        if (!std::isfinite(a) || !std::isfinite(b)) break;
        res.iterations = k + 1;
    }

    if (!settled) {
        // Picard cannot settle on a fixed point whose linearized multiplier
        // exceeds one; a damped Newton solve of F(a,b)-(a,b) = 0 does not care
        // about stability, so restart it from the original initial guess
        res.newton_fallback = true;
        a = a0;
        b = b0;
        const double nan = std::numeric_limits<double>::quiet_NaN();
        const auto G = [&](double x, double y) -> std::pair<double, double> {
            try {
                const auto [fx, fy] = F(x, y);
                return {fx - x, fy - y};
            } catch (const std::exception&) {
                return {nan, nan};
            }
        };
        auto [g1, g2] = G(a, b);
        double gn = std::max(std::abs(g1), std::abs(g2));
        for (int it = 0; it < 80 && std::isfinite(gn) && gn >= opts.tol; ++it) {
            const double h1 = 1e-6 * std::max(1.0, std::abs(a));
            const double h2 = 1e-6 * std::max(1.0, std::abs(b));
            const auto [g1a, g2a] = G(a + h1, b);
            const auto [g1b, g2b] = G(a, b + h2);
            const double j11 = (g1a - g1) / h1, j21 = (g2a - g2) / h1;
            const double j12 = (g1b - g1) / h2, j22 = (g2b - g2) / h2;
            const double det = j11 * j22 - j12 * j21;
            if (!std::isfinite(det) || std::abs(det) < 1e-14) break;
            const double da = -(j22 * g1 - j12 * g2) / det;
            const double db = -(-j21 * g1 + j11 * g2) / det;
            bool accepted = false;
            double step = 1.0;
            for (int ls = 0; ls < 25; ++ls, step *= 0.5) {
                const double an = a + step * da, bn = b + step * db;
                const auto [n1, n2] = G(an, bn);
                const double nn = std::max(std::abs(n1), std::abs(n2));
                if (std::isfinite(nn) && nn < gn * (1.0 - 1e-4 * step)) {
                    a = an;
                    b = bn;
                    g1 = n1;
                    g2 = n2;
                    gn = nn;
                    accepted = true;
                    res.trace.emplace_back(a, b);
                    ++res.iterations;
                    break;
                }
            }
            if (!accepted) break;
        }
    }

    res.a_star = a;
    res.b_star = b;
    // recheck with a fresh map evaluation, never the cached iterate
    try {
        const auto [fa, fb] = F(a, b);
        res.fixed_point_residual = std::max(std::abs(fa - a), std::abs(fb - b));
        res.p_star = field_value(m, cost, a, b, mode);
    } catch (const std::exception&) {
        res.fixed_point_residual = std::numeric_limits<double>::infinity();
    }
    res.converged = std::isfinite(res.fixed_point_residual) &&
                    res.fixed_point_residual < opts.tol;
    return res;
}

MultiStartResult multi_start(const CompoundPoissonTwoExp& m, const CostSpec& cost,
                             double eps, const std::vector<std::pair<double, double>>& inits,
                             const SolveOptions& opts, ConstantsMode mode,
                             double merge_radius) {
    if (inits.empty()) throw std::invalid_argument("multi_start needs at least one init");
    MultiStartResult out;
    out.starts = static_cast<int>(inits.size());
    for (const auto& [a0, b0] : inits) {
        EquilibriumResult r;
        try {
            r = find_equilibrium(m, cost, eps, a0, b0, opts, mode);
        } catch (const std::exception&) {
            ++out.failures;
            continue;
        }
        if (!r.converged) {
            ++out.failures;
            continue;
        }
        bool duplicate = false;
        for (auto& kept : out.equilibria) {
            if (std::max(std::abs(kept.a_star - r.a_star),
                         std::abs(kept.b_star - r.b_star)) <= merge_radius) {
                duplicate = true;
                if (r.fixed_point_residual < kept.fixed_point_residual) kept = r;
                break;
            }
        }
        if (!duplicate) out.equilibria.push_back(std::move(r));
    }
    std::sort(out.equilibria.begin(), out.equilibria.end(),
              [](const auto& x, const auto& y) { return x.a_star < y.a_star; });
    return out;
}

std::vector<std::pair<double, double>> grid_inits(double a_lo, double b_hi, int n) {
    if (n < 1) throw std::invalid_argument("grid size must be positive");
    std::vector<std::pair<double, double>> out;
    out.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        const double a = (n == 1) ? a_lo : a_lo + (0.0 - a_lo) * i / (n - 1.0);
        for (int j = 0; j < n; ++j) {
            const double b = (n == 1) ? b_hi : 0.0 + b_hi * j / (n - 1.0);
            out.emplace_back(a, b);
        }
    }
    return out;
}

DiscountedCostEstimate discounted_cost_mc(const LevyModel& model, const CostSpec& cost,
                                          double eps, double a, double b, double p,
                                          double x0, std::size_t n_paths, double horizon,
                                          std::uint64_t seed, int workers,
                                          double grid_step) {
    if (a > b) throw std::invalid_argument("lower barrier above upper barrier");
    if (eps <= 0) throw std::invalid_argument("discount rate must be positive");
    if (horizon * eps < 10.0)
        throw BudgetError("horizon too short for the discount tail: need horizon * eps >= 10");
    if (n_paths < 2) throw BudgetError("need at least 2 paths");
    validate(model);
    const bool exact = std::holds_alternative<CompoundPoissonTwoExp>(model);
    if (!exact && a == b)
        throw std::invalid_argument("degenerate band requires a bounded-variation model");
    const double hp = apply(cost.h, p);

    std::vector<double> vals(n_paths);
    parallel_for(n_paths, workers, [&](std::size_t i) {
        auto rng = path_rng(seed, i);
        double acc = cost.q_u * std::max(0.0, a - x0) + cost.q_d * std::max(0.0, x0 - b);
        double x = std::clamp(x0, a, b);
        double t = 0.0;
        double disc = 1.0;
        const auto settle = [&](double x_new, double disc_now) {
            if (x_new < a) {
                acc += cost.q_u * (a - x_new) * disc_now;
                return a;
            }
            if (x_new > b) {
                acc += cost.q_d * (x_new - b) * disc_now;
                return b;
            }
            return x_new;
        };
        if (exact) {
            const auto& cp = std::get<CompoundPoissonTwoExp>(model);
            const double total_rate = cp.lambda1 + cp.lambda2;
            const double p_down = cp.lambda1 / total_rate;
            while (t < horizon) {
                const double dt = std::min(exponential(rng, total_rate), horizon - t);
                const double disc_next = disc * std::exp(-eps * dt);
                acc += hp * state_cost(cost.g, x) * (disc - disc_next) / eps;
                t += dt;
                disc = disc_next;
                if (t >= horizon) break;
                const double jump = uniform01(rng) < p_down ? -exponential(rng, cp.alpha1)
                                                            : exponential(rng, cp.alpha2);
                x = settle(x + jump, disc);
            }
        } else {
            const double decay = std::exp(-eps * grid_step);
            while (t < horizon - 0.5 * grid_step) {
                const double disc_next = disc * decay;
                acc += hp * state_cost(cost.g, x) * (disc - disc_next) / eps;
                t += grid_step;
                disc = disc_next;
                x = settle(x + sample_increment(model, grid_step, rng), disc);
            }
        }
        vals[i] = acc;
    });

    double sum = 0.0, sumsq = 0.0;
    for (double v : vals) {
        sum += v;
        sumsq += v * v;
    }
    DiscountedCostEstimate est;
    est.value = sum / n_paths;
    const double var = (sumsq - sum * sum / n_paths) / (n_paths - 1.0);
    est.stderr_ = std::sqrt(std::max(0.0, var) / n_paths);
    est.truncation_factor = std::exp(-eps * horizon);
    return est;
}

}  // namespace mfg
