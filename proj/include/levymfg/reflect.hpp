#pragma once

#include <cstddef>
#include <vector>

#include "levymfg/models.hpp"

namespace mfg {

// A sampled trajectory of the free (uncontrolled) process.  For the compound
// Poisson family the grid contains every jump time exactly and the path is
// piecewise constant between entries; for the grid-based families the entries
// are equally spaced increments.
struct SamplePath {
    std::vector<double> times;   // strictly increasing, times[0] == 0
    std::vector<double> values;  // values[0] == x0
    bool exact_jumps = false;    // true when every grid point is a jump time
};

struct Barriers {
    double a = 0.0;
    double b = 0.0;
};

// Output of the two-sided Skorokhod map: x_reflected = value + u - d stays in
// [a,b], u and d are nondecreasing and act only at the respective barrier.
struct ReflectedPath {
    SamplePath base;
    std::vector<double> x_reflected;
    std::vector<double> u;  // cumulative up-pushes, u[0] = (a - x0)^+
    std::vector<double> d;  // cumulative down-pushes, d[0] = (x0 - b)^+
    double u0 = 0.0;
    double d0 = 0.0;
};

// Exact jump-time simulation for the compound Poisson family, grid-increment
// simulation otherwise.  Throws std::length_error when the expected number of
// grid points exceeds max_points.
SamplePath simulate_path(const LevyModel& model, double x0, double horizon,
                         double grid_step, Rng& rng,
                         std::size_t max_points = 200'000'000);

// Two-sided Skorokhod reflection by the one-step recursion: add the free
// increment, then push back to the violated barrier.  Exact for piecewise
// constant paths.  For a == b (bounded-variation inputs only) the controls
// absorb the increment decomposition and the state stays at a.
ReflectedPath reflect(const SamplePath& path, const Barriers& barriers);

// Complementarity sums  sum (x-a) du  and  sum (b-x) dd  over the grid;
// both vanish for the exact Skorokhod solution.
struct ComplementaritySums {
    double lower = 0.0;
    double upper = 0.0;
    double control_total_variation = 0.0;
};
ComplementaritySums complementarity(const ReflectedPath& rp, const Barriers& barriers);

}  // namespace mfg
