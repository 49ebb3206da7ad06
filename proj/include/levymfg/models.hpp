#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <variant>

#include "levymfg/rng.hpp"

namespace mfg {

// Compound Poisson process with two-sided exponential jumps:
// downward jumps arrive at rate lambda1 with Exp(alpha1) magnitudes,
// upward jumps at rate lambda2 with Exp(alpha2) magnitudes.
struct CompoundPoissonTwoExp {
    double lambda1 = 1.0;  // down-jump intensity (1/time)
    double alpha1 = 1.0;   // down-jump magnitude rate (1/space)
    double lambda2 = 1.0;  // up-jump intensity
    double alpha2 = 1.0;   // up-jump magnitude rate
};

// Strictly stable process, index alpha in (1,2), jump density
// c_plus * x^{-alpha-1} on (0,inf) and c_minus * |x|^{-alpha-1} on (-inf,0).
// Centered (no drift): strictly stable with alpha > 1 has mean zero.
struct StrictlyStable {
    double alpha = 1.5;
    double c_plus = 1.0;
    double c_minus = 1.0;
};

// Brownian motion with drift; not part of the modeled families of interest,
// kept as a test model because most functionals have elementary closed forms.
struct BrownianDrift {
    double mu = 0.0;
    double sigma = 1.0;
};

using LevyModel = std::variant<CompoundPoissonTwoExp, StrictlyStable, BrownianDrift>;

void validate(const LevyModel& model);  // throws std::invalid_argument

bool has_bounded_variation(const LevyModel& model);

// E X_1 per unit time.
double mean(const LevyModel& model);

// Characteristic exponent evaluated on the imaginary axis: returns phi(i*theta),
// with the sign convention  E exp(i theta X_t) = exp(t * phi(i theta)).
// For the stable family the power-law jump density integrates to
//   phi(i theta) = -C_alpha (c+ + c-) |theta|^alpha (1 - i beta sgn(theta) tan(pi alpha/2)),
// where beta = (c+ - c-)/(c+ + c-) and C_alpha = -Gamma(-alpha) cos(pi alpha/2)
// is the Levy-Khintchine normalization of x^{-alpha-1}.  Keeping C_alpha makes the
// exponent agree with the increment sampler and with the occupation-law and
// loss-rate formulas, which are all stated for the same jump density.
std::complex<double> characteristic_exponent(const LevyModel& model, double theta);

// Laplace-style exponent of -X for the compound Poisson family on the real line,
// phi_{-X}(z) with E exp(z (-X_t)) = exp(t phi_{-X}(z)), valid for -alpha2 < z < alpha1.
double cp_exponent_neg(const CompoundPoissonTwoExp& m, double z);

// Normalization constant -Gamma(-alpha) cos(pi alpha / 2) for the stable family.
double stable_lk_constant(double alpha);

struct PhiRoots {
    double r_inf = 0.0;   // magnitude of the negative root of phi_{-X}(z) = eps
    double r_sup = 0.0;   // the positive root
    double residual_inf = 0.0;  // |phi_{-X}(-r_inf) - eps|
    double residual_sup = 0.0;
};

// Roots -r_inf < 0 < r_sup of phi_{-X}(z) = eps, from the quadratic
//   (eps + lambda1 + lambda2) z^2 + (alpha2 (lambda1+eps) - alpha1 (lambda2+eps)) z
//     - eps alpha1 alpha2 = 0,
// polished and residual-checked against cp_exponent_neg (tolerance 1e-10).
PhiRoots phi_roots(const CompoundPoissonTwoExp& m, double eps);

// One increment X_{t+dt} - X_t.
double sample_increment(const LevyModel& model, double dt, Rng& rng);

// Standard stable variate: S(alpha, beta) with scale 1 in the parameterization
// whose characteristic function is exp(-|t|^alpha (1 - i beta sgn(t) tan(pi alpha/2))).
double sample_standard_stable(double alpha, double beta, Rng& rng);

std::string family_name(const LevyModel& model);

}  // namespace mfg
