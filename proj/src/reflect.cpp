#include "levymfg/reflect.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mfg {

SamplePath simulate_path(const LevyModel& model, double x0, double horizon,
                         double grid_step, Rng& rng, std::size_t max_points) {
    if (horizon <= 0 || grid_step <= 0)
        throw std::invalid_argument("horizon and grid_step must be positive");
    validate(model);

    SamplePath path;
    path.times.push_back(0.0);
    path.values.push_back(x0);

    if (const auto* cp = std::get_if<CompoundPoissonTwoExp>(&model)) {
        const double total_rate = cp->lambda1 + cp->lambda2;
        if (total_rate * horizon > static_cast<double>(max_points))
            throw std::length_error("expected jump count exceeds the path cap");
        path.exact_jumps = true;
        double t = 0.0, x = x0;
        const double p_down = cp->lambda1 / total_rate;
        while (true) {
            t += exponential(rng, total_rate);
            if (t >= horizon) break;
            if (uniform01(rng) < p_down)
                x -= exponential(rng, cp->alpha1);
            else
                x += exponential(rng, cp->alpha2);
            path.times.push_back(t);
            path.values.push_back(x);
        }
        // closing grid point so the horizon itself is always represented
        path.times.push_back(horizon);
        path.values.push_back(x);
        return path;
    }

    const auto n_steps = static_cast<std::size_t>(std::ceil(horizon / grid_step));
    if (n_steps > max_points) throw std::length_error("grid would exceed the path cap");
    path.times.reserve(n_steps + 1);
    path.values.reserve(n_steps + 1);
    double x = x0;
    for (std::size_t k = 1; k <= n_steps; ++k) {
        const double t_next = std::min(horizon, static_cast<double>(k) * grid_step);
        x += sample_increment(model, t_next - path.times.back(), rng);
        path.times.push_back(t_next);
        path.values.push_back(x);
    }
    return path;
}

ReflectedPath reflect(const SamplePath& path, const Barriers& barriers) {
    const double a = barriers.a, b = barriers.b;
    if (a > b) throw std::invalid_argument("lower barrier above upper barrier");
    const std::size_t n = path.values.size();
    if (n == 0) throw std::invalid_argument("empty path");

    ReflectedPath rp;
    rp.base = path;
    rp.x_reflected.resize(n);
    rp.u.resize(n);
    rp.d.resize(n);

    // initial pushes bring x0 into [a,b]
    const double x0 = path.values[0];
    rp.u0 = std::max(a - x0, 0.0);
    rp.d0 = std::max(x0 - b, 0.0);
    double u = rp.u0, d = rp.d0;
    double x = x0 + u - d;
    rp.x_reflected[0] = x;
    rp.u[0] = u;
    rp.d[0] = d;

    if (a == b) {
        // degenerate band: every increment is immediately absorbed by the
        // controls, splitting the path into its up and down movements
        for (std::size_t k = 1; k < n; ++k) {
            const double inc = path.values[k] - path.values[k - 1];
            if (inc < 0)
                u -= inc;
            else
                d += inc;
            rp.x_reflected[k] = a;
            rp.u[k] = u;
            rp.d[k] = d;
        }
        return rp;
    }

    for (std::size_t k = 1; k < n; ++k) {
        // free increment first, then one push to the violated barrier; a jump
        // past a barrier is pushed back at the jump instant, so overshoot goes
        // entirely into the control
        x += path.values[k] - path.values[k - 1];
        if (x < a) {
            u += a - x;
            x = a;
        } else if (x > b) {
            d += x - b;
            x = b;
        }
        rp.x_reflected[k] = x;
        rp.u[k] = u;
        rp.d[k] = d;
    }
    return rp;
}

ComplementaritySums complementarity(const ReflectedPath& rp, const Barriers& barriers) {
    ComplementaritySums s;
    const std::size_t n = rp.x_reflected.size();
    for (std::size_t k = 0; k < n; ++k) {
        const double du = rp.u[k] - (k ? rp.u[k - 1] : 0.0);
        const double dd = rp.d[k] - (k ? rp.d[k - 1] : 0.0);
        s.lower += (rp.x_reflected[k] - barriers.a) * du;
        s.upper += (barriers.b - rp.x_reflected[k]) * dd;
        s.control_total_variation += du + dd;
    }
    return s;
}

}  // namespace mfg
