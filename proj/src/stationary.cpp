#include "levymfg/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "levymfg/parallel.hpp"

namespace mfg {

namespace {
constexpr double kPi = std::numbers::pi;

// continued fraction for the regularized incomplete beta, evaluated by the
// modified Lentz recurrence
double inc_beta_cf(double p, double q, double x) {
    const double kTiny = 1e-300;
    const double qab = p + q, qap = p + 1.0, qam = p - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        const int m2 = 2 * m;
        double num = m * (q - m) * x / ((qam + m2) * (p + m2));
        d = 1.0 + num * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + num / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        num = -(p + m) * (qab + m) * x / ((p + m2) * (qap + m2));
        d = 1.0 + num * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + num / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 3e-16) break;
    }
    return h;
}

// regularized incomplete beta I_x(p, q)
double reg_inc_beta(double p, double q, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double front = std::exp(std::lgamma(p + q) - std::lgamma(p) - std::lgamma(q) +
                                  p * std::log(x) + q * std::log1p(-x));
    // the continued fraction converges fast left of the mean; reflect otherwise
    if (x < (p + 1.0) / (p + q + 2.0)) return front * inc_beta_cf(p, q, x) / p;
    return 1.0 - front * inc_beta_cf(q, p, 1.0 - x) / q;
}
}  // namespace

double StationaryLaw::total_mass() const {
    if (b <= a) return atom_a + atom_b;
    if (interior_cdf) return atom_a + atom_b + interior_cdf(b);
    double integral = 0.0;
    if (density) {
        // composite Simpson over the open interval
        const int n = 2000;
        const double h = (b - a) / n;
        for (int k = 0; k <= n; ++k) {
            const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
            integral += w * density(a + k * h);
        }
        integral *= h / 3.0;
    } else if (!bin_mass.empty()) {
        for (double m : bin_mass) integral += m;
    }
    return atom_a + atom_b + integral;
}

double StationaryLaw::expect(const std::function<double(double)>& f, int quad_points) const {
    double out = atom_a * f(a) + atom_b * f(b);
    if (b <= a) return out;
    if (interior_cdf) {
        // exact cell masses, f at cell midpoints; the first and last cells
        // are refined geometrically toward the barriers so an integrable
        // density singularity there cannot misplace its mass
        const int n = std::max(quad_points - 1, 16);
        const double w = (b - a) / n;
        auto add_cell = [&](double lo, double hi) {
            out += (interior_cdf(hi) - interior_cdf(lo)) * f(0.5 * (lo + hi));
        };
        const int kSplits = 50;
        double hi = a + w;
        for (int k = 0; k < kSplits; ++k) {
            const double lo = (k + 1 == kSplits) ? a : a + w * std::pow(0.5, k + 1);
            add_cell(lo, hi);
            hi = lo;
        }
        for (int k = 1; k + 1 < n; ++k) add_cell(a + k * w, a + (k + 1) * w);
        double lo = b - w;
        for (int k = 0; k < kSplits; ++k) {
            const double cut = (k + 1 == kSplits) ? b : b - w * std::pow(0.5, k + 1);
            add_cell(lo, cut);
            lo = cut;
        }
        return out;
    }
    if (density) {
        int n = quad_points - 1;
        if (n % 2) ++n;
        const double h = (b - a) / n;
        double integral = 0.0;
        for (int k = 0; k <= n; ++k) {
            const double x = a + k * h;
            const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
            integral += w * density(x) * f(x);
        }
        out += integral * h / 3.0;
    } else if (!bin_mass.empty()) {
        const double width = (b - a) / static_cast<double>(bin_mass.size());
        for (std::size_t k = 0; k < bin_mass.size(); ++k)
            out += bin_mass[k] * f(a + (k + 0.5) * width);  // midpoint rule
    }
    return out;
}

StationaryLaw cp_stationary(const CompoundPoissonTwoExp& m, double a, double b) {
    if (a > b) throw std::invalid_argument("lower barrier above upper barrier");
    StationaryLaw law;
    law.a = a;
    law.b = b;
    if (a == b) {
        law.atom_a = 1.0;
        return law;
    }
    // The chain regenerates on hitting each barrier; exponential overshoots
    // make the barrier sojourn weights 1/alpha2 (at a, ended by an up jump)
    // and 1/alpha1 (at b), while the interior occupation is uniform for the
    // centered model.  Depends on (a,b) only through d = b-a.
    const double d = b - a;
    const double z = d + 1.0 / m.alpha1 + 1.0 / m.alpha2;
    law.atom_a = (1.0 / m.alpha2) / z;
    law.atom_b = (1.0 / m.alpha1) / z;
    law.density = [z](double) { return 1.0 / z; };
    return law;
}

double cp_stationary_mean(const CompoundPoissonTwoExp& m, double a, double b) {
    if (a == b) return a;
    const double z = (b - a) + 1.0 / m.alpha1 + 1.0 / m.alpha2;
    return (a / m.alpha2 + 0.5 * (b * b - a * a) + b / m.alpha1) / z;
}

double cp_stationary_mean_legacy(const CompoundPoissonTwoExp& m, double a, double b) {
    if (a == b) return a;
    const double d1 = b + 1.0 / m.alpha2 + 1.0 / m.alpha1;
    const double d2 = b + 1.0 / m.alpha2 + m.alpha1;
    return (a / m.alpha2) / d1 + 0.5 * (b * b - a * a) / d2 + b * (a + 1.0 / m.alpha2) / d1;
}

double stable_rho(double alpha, double c_plus, double c_minus) {
    if (alpha <= 1.0 || alpha >= 2.0 || c_plus <= 0 || c_minus <= 0)
        throw std::invalid_argument("stable parameters out of range");
    const double beta = (c_plus - c_minus) / (c_plus + c_minus);
    return 0.5 + std::atan(beta * std::tan(kPi * alpha / 2.0)) / (kPi * alpha);
}

namespace {

// log Beta via lgamma
double log_beta(double x, double y) {
    return std::lgamma(x) + std::lgamma(y) - std::lgamma(x + y);
}

double beta_fn(double x, double y) { return std::exp(log_beta(x, y)); }

}  // namespace

StationaryLaw stable_stationary(double alpha, double c_plus, double c_minus,
                                double a, double b) {
    if (b <= a) throw std::invalid_argument("band must have positive width");
    const double rho = stable_rho(alpha, c_plus, c_minus);
    const double p1 = alpha * rho;          // exponent of the lower edge
    const double p2 = alpha * (1.0 - rho);  // exponent of the upper edge
    const double d = b - a;
    const double norm = beta_fn(p1, p2) * d;
    StationaryLaw law;
    law.a = a;
    law.b = b;
    law.density = [=](double x) {
        const double t = (x - a) / d;
        if (t <= 0.0 || t >= 1.0) return 0.0;
        return std::pow(t, p1 - 1.0) * std::pow(1.0 - t, p2 - 1.0) / norm;
    };
    law.interior_cdf = [=](double x) { return reg_inc_beta(p1, p2, (x - a) / d); };
    return law;
}

double stable_loss_rate(double alpha, double c_plus, double c_minus, double d) {
    if (d <= 0) throw std::invalid_argument("band width must be positive");
    const double rho = stable_rho(alpha, c_plus, c_minus);
    const double p1 = alpha * rho;
    const double p2 = alpha * (1.0 - rho);
    const double num = c_minus * beta_fn(2.0 - p1, p1) + c_plus * beta_fn(2.0 - p2, p2);
    const double den = beta_fn(p1, p2) * alpha * (alpha - 1.0) * (2.0 - alpha);
    return num / den * std::pow(d, 1.0 - alpha);
}

double cp_control_rate(const CompoundPoissonTwoExp& m, double a, double b) {
    // rate of pushed-up mass: each down jump from x overshoots a by an
    // Exp(alpha1) amount beyond x-a with probability e^{-alpha1 (x-a)}, and
    // the expected overshoot is 1/alpha1
    const auto law = cp_stationary(m, a, b);
    const double e = law.expect([&](double x) { return std::exp(-m.alpha1 * (x - a)); });
    return m.lambda1 * e / m.alpha1;
}

McLaw mc_stationary(const LevyModel& model, double a, double b,
                    const McStationaryOptions& opts) {
    if (a > b) throw std::invalid_argument("lower barrier above upper barrier");
    if (opts.horizon <= opts.burn_in)
        throw std::invalid_argument("horizon must exceed burn_in");
    validate(model);
    const bool exact = std::holds_alternative<CompoundPoissonTwoExp>(model);
    if (!exact && a == b)
        throw std::invalid_argument("degenerate band requires a bounded-variation model");

    const int bins = std::max(1, opts.bins);
    const double width = (b > a) ? (b - a) / bins : 1.0;
    const double edge_tol =
        exact ? 0.0 : opts.barrier_tol_factor * std::sqrt(opts.grid_step) * (b - a);

    // one independent replica per worker slot; batch means across replicas
    const int replicas = std::max(1, opts.workers);
    const double rep_horizon = opts.horizon / replicas;
    if (rep_horizon <= opts.burn_in)
        throw std::invalid_argument("per-replica horizon must exceed burn_in");

    struct Acc {
        std::vector<double> bin;
        double at_a = 0, at_b = 0, time = 0, sum_x = 0, sum_x2 = 0;
    };
    std::vector<Acc> acc(replicas);
    for (auto& s : acc) s.bin.assign(bins, 0.0);

    parallel_for(replicas, opts.workers, [&](std::size_t rep) {
        auto rng = path_rng(opts.seed, rep);
        auto& s = acc[rep];
        double x0 = std::clamp(opts.x0, a, b);
        if (exact) {
            const auto& cp = std::get<CompoundPoissonTwoExp>(model);
            const double total_rate = cp.lambda1 + cp.lambda2;
            const double p_down = cp.lambda1 / total_rate;
            double t = 0.0, x = x0;
            while (t < rep_horizon) {
                const double dt = std::min(exponential(rng, total_rate), rep_horizon - t);
                const double t_new = t + dt;
                const double weight = std::max(0.0, t_new - std::max(t, opts.burn_in));
                if (weight > 0) {
                    s.time += weight;
                    s.sum_x += weight * x;
                    s.sum_x2 += weight * x * x;
                    if (x <= a)
                        s.at_a += weight;
                    else if (x >= b)
                        s.at_b += weight;
                    else
                        s.bin[std::min<int>(bins - 1, static_cast<int>((x - a) / width))] += weight;
                }
                t = t_new;
                if (t >= rep_horizon) break;
                double xn = x + (uniform01(rng) < p_down ? -exponential(rng, cp.alpha1)
                                                         : exponential(rng, cp.alpha2));
                x = std::clamp(xn, a, b);
            }
        } else {
            double t = 0.0, x = x0;
            const double dt = opts.grid_step;
            while (t < rep_horizon) {
                if (t >= opts.burn_in) {
                    s.time += dt;
                    s.sum_x += dt * x;
                    s.sum_x2 += dt * x * x;
                    if (x <= a + edge_tol)
                        s.at_a += dt;
                    else if (x >= b - edge_tol)
                        s.at_b += dt;
                    else
                        s.bin[std::min<int>(bins - 1, static_cast<int>((x - a) / width))] += dt;
                }
                x = std::clamp(x + sample_increment(model, dt, rng), a, b);
                t += dt;
            }
        }
    });

    double total = 0.0;
    for (const auto& s : acc) total += s.time;
    if (total <= 0) throw std::runtime_error("no occupation time accumulated");

    McLaw out;
    out.law.a = a;
    out.law.b = b;
    out.law.bin_mass.assign(bins, 0.0);
    out.se_bin.assign(bins, 0.0);
    out.total_time = total;

    // pooled estimates plus replica scatter for standard errors
    auto pooled_and_se = [&](auto&& get) {
        double mean_val = 0.0;
        for (const auto& s : acc) mean_val += get(s);
        mean_val /= total;
        if (replicas < 2) return std::pair{mean_val, 0.0};
        double var = 0.0;
        for (const auto& s : acc) {
            const double v = get(s) / s.time;
            var += (v - mean_val) * (v - mean_val);
        }
        var /= (replicas - 1.0) * replicas;
        return std::pair{mean_val, std::sqrt(var)};
    };

    std::tie(out.law.atom_a, out.se_atom_a) = pooled_and_se([](const Acc& s) { return s.at_a; });
    std::tie(out.law.atom_b, out.se_atom_b) = pooled_and_se([](const Acc& s) { return s.at_b; });
    for (int k = 0; k < bins; ++k)
        std::tie(out.law.bin_mass[k], out.se_bin[k]) =
            pooled_and_se([k](const Acc& s) { return s.bin[k]; });
    std::tie(out.mean, out.se_mean) = pooled_and_se([](const Acc& s) { return s.sum_x; });
    std::tie(out.second_moment, out.se_second_moment) =
        pooled_and_se([](const Acc& s) { return s.sum_x2; });
    return out;
}

double apply(FieldFunction f, double x) {
    switch (f) {
        case FieldFunction::Identity: return x;
        case FieldFunction::AbsoluteValue: return std::abs(x);
        case FieldFunction::Square: return x * x;
    }
    return x;
}

FieldFunction field_function_from_name(const std::string& name) {
    if (name == "identity" || name == "id") return FieldFunction::Identity;
    if (name == "abs") return FieldFunction::AbsoluteValue;
    if (name == "square") return FieldFunction::Square;
    throw std::invalid_argument("unknown mean-field function: " + name);
}

std::string to_string(FieldFunction f) {
    switch (f) {
        case FieldFunction::Identity: return "identity";
        case FieldFunction::AbsoluteValue: return "abs";
        case FieldFunction::Square: return "square";
    }
    return "?";
}

double mean_field_value(const StationaryLaw& law, FieldFunction f) {
    return law.expect([f](double x) { return apply(f, x); });
}

}  // namespace mfg
