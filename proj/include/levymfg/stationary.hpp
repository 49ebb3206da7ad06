#pragma once

#include <functional>
#include <string>
#include <vector>

#include "levymfg/models.hpp"
#include "levymfg/reflect.hpp"

namespace mfg {

// Stationary law of the reflected process on [a,b]: point masses at the
// barriers plus a density on the interior, represented on a uniform bin grid
// when it comes from simulation and as a closed form otherwise.
struct StationaryLaw {
    double a = 0.0;
    double b = 0.0;
    double atom_a = 0.0;
    double atom_b = 0.0;
    // interior density evaluator (normalized so atoms + integral = 1)
    std::function<double(double)> density;
    // exact interior distribution function, mass of (a, x]; when present,
    // expect integrates against exact cell masses instead of sampling the
    // density, which keeps mass conservation exact even when the density
    // blows up integrably at the barriers
    std::function<double(double)> interior_cdf;
    // optional binned view (filled by mc_stationary; derivable for closed forms)
    std::vector<double> bin_mass;  // mass per equal-width bin over (a,b)
    double total_mass() const;
    double expect(const std::function<double(double)>& f, int quad_points = 20001) const;
};

// Closed-form stationary law for the centered compound Poisson family:
// with d = b-a and Z = d + 1/alpha1 + 1/alpha2, an atom (1/alpha2)/Z at a,
// uniform density 1/Z on (a,b) and an atom (1/alpha1)/Z at b.  Derived from
// the exponential overshoot of the first entry into each barrier half-line;
// translation invariant in (a,b) by construction.  a == b degenerates to a
// point mass.
StationaryLaw cp_stationary(const CompoundPoissonTwoExp& m, double a, double b);

// Mean of cp_stationary, closed form.
double cp_stationary_mean(const CompoundPoissonTwoExp& m, double a, double b);

// Compatibility variant of the mean kept to reproduce legacy tabulated
// equilibria: evaluates the historical display
//   (a/alpha2)/D1 + (b^2-a^2)/(2 D2) + b(a + 1/alpha2)/D1,
//   D1 = b + 1/alpha2 + 1/alpha1,   D2 = b + 1/alpha2 + alpha1,
// which is not translation invariant (it effectively pins a = 0 and carries a
// rate/length mixup in D2).  Not used outside the legacy solver path.
double cp_stationary_mean_legacy(const CompoundPoissonTwoExp& m, double a, double b);

// Positivity parameter rho = 1/2 + arctan(beta tan(pi alpha/2)) / (pi alpha).
double stable_rho(double alpha, double c_plus, double c_minus);

// Stationary law of the stable process reflected on [0,d], rescaled to [a,b]:
// Beta(alpha rho, alpha (1-rho)) density, no atoms.  Mean a + d*rho and
// variance d^2 rho (1-rho) / (alpha+1), d = b-a.
StationaryLaw stable_stationary(double alpha, double c_plus, double c_minus,
                                double a, double b);

// Long-run upward control rate E_pi dD_1 for the stable process reflected on
// [0,d]:
//   [ c- B(2-alpha rho, alpha rho) + c+ B(2-alpha(1-rho), alpha(1-rho)) ]
//   / [ B(alpha rho, alpha(1-rho)) alpha (alpha-1) (2-alpha) ] * d^{1-alpha}.
double stable_loss_rate(double alpha, double c_plus, double c_minus, double d);

// Long-run control rates for the centered compound Poisson family on [a,b]
// (equal by stationarity of the mean): lambda1 E_pi exp(-alpha1 (X-a)) / alpha1.
double cp_control_rate(const CompoundPoissonTwoExp& m, double a, double b);

struct McStationaryOptions {
    double horizon = 1e4;      // time units of occupation measured
    double burn_in = 100.0;
    double grid_step = 1e-3;   // grid families only
    int bins = 50;
    std::uint64_t seed = 1;
    int workers = 1;
    double x0 = 0.0;
    // barrier tolerance for atom detection on grid paths; exact-jump paths hit
    // the barrier exactly and use equality
    double barrier_tol_factor = 1.0;  // multiplies sqrt(grid_step) * (b-a)
};

struct McLaw {
    StationaryLaw law;              // atoms + binned density estimate
    double mean = 0.0;
    double second_moment = 0.0;
    double se_mean = 0.0;           // batch-means standard error
    double se_atom_a = 0.0;
    double se_atom_b = 0.0;
    std::vector<double> se_bin;     // per-bin standard errors
    double se_second_moment = 0.0;
    double total_time = 0.0;
};

// Occupation-measure estimate of the stationary law from a long reflected
// trajectory (time-weighted histogram with endpoint atoms).  Standard errors
// come from batch means over equal time blocks.
McLaw mc_stationary(const LevyModel& model, double a, double b,
                    const McStationaryOptions& opts);

// Registered mean-field functions; laws integrate them by quadrature.
enum class FieldFunction { Identity, AbsoluteValue, Square };
double apply(FieldFunction f, double x);
FieldFunction field_function_from_name(const std::string& name);
std::string to_string(FieldFunction f);

// p = E f(X_inf) under the law; for a point mass at a this is f(a).
double mean_field_value(const StationaryLaw& law, FieldFunction f);

}  // namespace mfg
