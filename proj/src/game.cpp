#include "levymfg/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

#include "levymfg/parallel.hpp"

namespace mfg {

ThresholdConstants cp_threshold_constants(const CompoundPoissonTwoExp& m, double eps,
                                          ConstantsMode mode) {
    if (eps <= 0) throw std::invalid_argument("discount rate must be positive");
    validate(LevyModel{m});

    // parameter slots feeding the constants formulas; the two modes differ in
    // the slot order and in the quadratic's leading coefficient
    double l1, a1, l2, a2, r_i, r_s;
    if (mode == ConstantsMode::Consistent) {
        l1 = m.lambda2;
        a1 = m.alpha2;
        l2 = m.lambda1;
        a2 = m.alpha1;
        // exchanging the slots negates the quadratic's linear coefficient, so
        // its roots are exactly the negated roots of phi_{-X}(z) = eps; reuse
        // the polished, residual-checked pair
        const auto roots = phi_roots(m, eps);
        r_i = roots.r_sup;
        r_s = roots.r_inf;
    } else {
        l1 = m.lambda1;
        a1 = m.alpha1;
        l2 = m.lambda2;
        a2 = m.alpha2;
        // historical leading coefficient (eps + 2 lambda2); these roots do not
        // solve phi_{-X}(z) = eps and are kept for table reproduction only
        const double qa = eps + 2.0 * m.lambda2;
        const double qb = a2 * (l1 + eps) - a1 * (l2 + eps);
        const double qc = -eps * a1 * a2;
        const double disc = std::sqrt(qb * qb - 4.0 * qa * qc);
        r_i = (qb + disc) / (2.0 * qa);   // magnitude of the negative root
        r_s = (-qb + disc) / (2.0 * qa);  // positive root
    }

    ThresholdConstants c;
    c.r_i = r_i;
    c.r_s = r_s;
    c.pi_i = r_i / a2;
    c.pi_s = r_s / a1;
    c.e_i = (1.0 - c.pi_i) / r_i;
    c.e_s = (1.0 - c.pi_s) / r_s;
    const double den_i = r_i + c.pi_i * r_s;
    const double den_s = c.pi_s * r_i + r_s;
    c.f_i = (r_i + r_s) / den_i;
    c.f_s = (r_i + r_s) / den_s;
    c.g_i = (1.0 - c.pi_i) * r_s / den_i;
    c.g_s = (1.0 - c.pi_s) * r_i / den_s;
    return c;
}

namespace {

struct ThresholdMap {
    ThresholdConstants c;
    double delta = 0.0;

    std::pair<double, double> operator()(double d) const {
        const double den = std::exp((c.r_i + c.r_s) * d) - c.g_i * c.g_s;
        const double a =
            -delta - c.e_i + c.f_i * (c.e_s * std::exp(c.r_i * d) - c.e_i * c.g_s) / den;
        const double b =
            delta + c.e_s + c.f_s * (-c.e_i * std::exp(c.r_s * d) + c.e_s * c.g_i) / den;
        return {a, b};
    }

    // width residual psi(d) = B(d) - A(d) - d; a fixed point has psi = 0
    double psi(double d) const {
        const auto [a, b] = (*this)(d);
        return b - a - d;
    }
};

}  // namespace

DynkinSolution cp_best_response(const CompoundPoissonTwoExp& m, double eps, double delta,
                                ConstantsMode mode, double a_init, double b_init) {
    if (delta <= 0) throw std::invalid_argument("threshold offset delta must be positive");
    const ThresholdMap map{cp_threshold_constants(m, eps, mode), delta};

    // the image width is bounded: psi(0) = 2 delta > 0 and psi(d) -> -inf, so a
    // bracket [0, d_hi] always exists
    double d_hi = 2.0 * delta + map.c.e_i + map.c.e_s + 1.0;
    while (map.psi(d_hi) > 0) d_hi *= 2.0;

    DynkinSolution sol;
    sol.delta = delta;

    double d = std::clamp(b_init - a_init, 0.0, d_hi);
    if (d == 0.0) d = std::min(2.0 * delta, d_hi);

    // damped Picard on the band; the map moves (a,b) only through d = b - a
    const double damping = 0.5;
    double prev_step = std::numeric_limits<double>::infinity();
    bool picard_ok = false;
    for (; sol.iterations < 400; ++sol.iterations) {
        const double d_next = std::clamp((1.0 - damping) * d + damping * (d + map.psi(d)),
                                         0.0, d_hi);
        const double step = std::abs(d_next - d);
        d = d_next;
        if (step < 1e-12) {
            picard_ok = true;
            break;
        }
        if (step > 4.0 * prev_step && sol.iterations > 20) break;  // diverging
        prev_step = step;
    }
    if (!picard_ok) {
        // safeguarded bisection on the bracket, then Newton as usual
        double lo = 0.0, hi = d_hi;
        for (int k = 0; k < 200 && hi - lo > 1e-12; ++k) {
            const double mid = 0.5 * (lo + hi);
            (map.psi(mid) > 0 ? lo : hi) = mid;
        }
        d = 0.5 * (lo + hi);
    }

    // Newton polish on psi with a central finite-difference slope
    for (int k = 0; k < 50; ++k) {
        const double r = map.psi(d);
        if (std::abs(r) < 1e-13) break;
        const double h = std::max(1e-7, 1e-7 * d);
        const double dr = (map.psi(d + h) - map.psi(d - h)) / (2.0 * h);
        if (dr == 0.0) break;
        const double d_new = std::clamp(d - r / dr, 0.0, d_hi);
        sol.newton_used = true;
        if (d_new == d) break;
        d = d_new;
    }

    std::tie(sol.a_star, sol.b_star) = map(d);
    const auto [ra, rb] = map(sol.b_star - sol.a_star);
    sol.residual_a = std::abs(sol.a_star - ra);
    sol.residual_b = std::abs(sol.b_star - rb);
    sol.converged = sol.residual_a < 1e-10 && sol.residual_b < 1e-10;
    return sol;
}

namespace {

// Runs the stopping game on a common jump stream for every band in the list
// and writes the payoff of path `path` under band k to out[path * bands + k].
// All bands watch the same free path, so differences across bands are paired.
void run_game_paths(const GameSpec& spec, double x0,
                    const std::vector<std::pair<double, double>>& bands,
                    std::size_t n_paths, std::uint64_t seed, int workers,
                    std::vector<double>& out) {
    const auto& m = spec.model;
    const double total_rate = m.lambda1 + m.lambda2;
    const double p_down = m.lambda1 / total_rate;
    const double t_cap = 50.0 / spec.eps;  // residual discount ~ e^{-50}
    const std::size_t n_bands = bands.size();
    out.assign(n_paths * n_bands, 0.0);

    parallel_for(n_paths, workers, [&](std::size_t path) {
        auto rng = path_rng(seed, path);
        double* payoff = out.data() + path * n_bands;
        std::vector<bool> alive(n_bands);
        std::size_t n_alive = 0;
        for (std::size_t k = 0; k < n_bands; ++k) {
            if (x0 <= bands[k].first) {
                payoff[k] = -spec.q_u;
            } else if (x0 >= bands[k].second) {
                payoff[k] = spec.q_d;
            } else {
                alive[k] = true;
                ++n_alive;
            }
        }
        double t = 0.0, x = x0;
        while (n_alive > 0 && t < t_cap) {
            const double dt = std::min(exponential(rng, total_rate), t_cap - t);
            const double run =
                spec.two_h * x * (std::exp(-spec.eps * t) - std::exp(-spec.eps * (t + dt))) /
                spec.eps;
            for (std::size_t k = 0; k < n_bands; ++k)
                if (alive[k]) payoff[k] += run;
            t += dt;
            if (t >= t_cap) break;
            x += (uniform01(rng) < p_down ? -exponential(rng, m.alpha1)
                                          : exponential(rng, m.alpha2));
            const double disc = std::exp(-spec.eps * t);
            for (std::size_t k = 0; k < n_bands; ++k) {
                if (!alive[k]) continue;
                if (x <= bands[k].first) {
                    payoff[k] -= spec.q_u * disc;
                    alive[k] = false;
                    --n_alive;
                } else if (x >= bands[k].second) {
                    payoff[k] += spec.q_d * disc;
                    alive[k] = false;
                    --n_alive;
                }
            }
        }
    });
}

}  // namespace

GameValue mc_game_value(const GameSpec& spec, double x, double a, double b,
                        std::size_t n_paths, std::uint64_t seed, int workers) {
    if (a > b) throw std::invalid_argument("lower threshold above upper threshold");
    if (n_paths == 0) throw std::invalid_argument("n_paths must be positive");
    std::vector<double> payoffs;
    run_game_paths(spec, x, {{a, b}}, n_paths, seed, workers, payoffs);
    double sum = 0.0, sumsq = 0.0;
    for (double v : payoffs) {
        sum += v;
        sumsq += v * v;
    }
    GameValue gv;
    gv.n_paths = n_paths;
    gv.value = sum / n_paths;
    if (n_paths > 1) {
        const double var = (sumsq - sum * sum / n_paths) / (n_paths - 1.0);
        gv.stderr_ = std::sqrt(std::max(0.0, var) / n_paths);
    }
    return gv;
}

SaddleReport saddle_check(const GameSpec& spec, double a_star, double b_star,
                          double x0, double perturbation, std::size_t n_paths,
                          std::uint64_t seed, int workers, double sigma_gate) {
    if (n_paths < 2) throw std::invalid_argument("n_paths must be at least 2");
    const double p = perturbation;
    // maximizer moves a, minimizer moves b; band 0 is the candidate saddle
    const std::vector<std::pair<double, double>> bands = {
        {a_star, b_star},
        {a_star + p, b_star},
        {a_star - p, b_star},
        {a_star, b_star + p},
        {a_star, b_star - p},
    };
    std::vector<double> payoffs;
    run_game_paths(spec, x0, bands, n_paths, seed, workers, payoffs);

    SaddleReport report;
    report.a_star = a_star;
    report.b_star = b_star;

    const std::size_t nb = bands.size();
    {
        double sum = 0.0, sumsq = 0.0;
        for (std::size_t i = 0; i < n_paths; ++i) {
            const double v = payoffs[i * nb];
            sum += v;
            sumsq += v * v;
        }
        report.base_value = sum / n_paths;
        const double var = (sumsq - sum * sum / n_paths) / (n_paths - 1.0);
        report.base_stderr = std::sqrt(std::max(0.0, var) / n_paths);
    }

    report.passed = true;
    for (std::size_t k = 1; k < nb; ++k) {
        // the maximizer gains when the value rises, the minimizer when it falls
        const double sign = (k <= 2) ? 1.0 : -1.0;
        double sum = 0.0, sumsq = 0.0;
        for (std::size_t i = 0; i < n_paths; ++i) {
            const double diff = sign * (payoffs[i * nb + k] - payoffs[i * nb]);
            sum += diff;
            sumsq += diff * diff;
        }
        SaddlePerturbation pert;
        pert.da = bands[k].first - a_star;
        pert.db = bands[k].second - b_star;
        pert.improvement = sum / n_paths;
        const double var = (sumsq - sum * sum / n_paths) / (n_paths - 1.0);
        pert.stderr_ = std::sqrt(std::max(0.0, var) / n_paths);
        if (pert.improvement > sigma_gate * pert.stderr_) report.passed = false;
        report.perturbations.push_back(pert);
    }
    return report;
}

}  // namespace mfg
