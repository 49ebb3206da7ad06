#include "levymfg/models.hpp"

#include <cmath>
#include <numbers>

namespace mfg {

namespace {

constexpr double kPi = std::numbers::pi;

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

void validate(const LevyModel& model) {
    if (const auto* cp = std::get_if<CompoundPoissonTwoExp>(&model)) {
        require(cp->lambda1 > 0 && cp->lambda2 > 0, "jump intensities must be positive");
        require(cp->alpha1 > 0 && cp->alpha2 > 0, "jump magnitude rates must be positive");
    } else if (const auto* st = std::get_if<StrictlyStable>(&model)) {
        require(st->alpha > 1.0 && st->alpha < 2.0, "stability index must lie in (1,2)");
        require(st->c_plus > 0 && st->c_minus > 0, "jump coefficients must be positive");
    } else {
        const auto& bm = std::get<BrownianDrift>(model);
        require(bm.sigma >= 0, "volatility must be nonnegative");
    }
}

bool has_bounded_variation(const LevyModel& model) {
    if (std::holds_alternative<CompoundPoissonTwoExp>(model)) return true;
    if (std::holds_alternative<StrictlyStable>(model)) return false;  // alpha in (1,2)
    const auto& bm = std::get<BrownianDrift>(model);
    return bm.sigma == 0.0;
}

double mean(const LevyModel& model) {
    if (const auto* cp = std::get_if<CompoundPoissonTwoExp>(&model))
        return -cp->lambda1 / cp->alpha1 + cp->lambda2 / cp->alpha2;
    if (std::holds_alternative<StrictlyStable>(model)) return 0.0;
    return std::get<BrownianDrift>(model).mu;
}

double stable_lk_constant(double alpha) {
    // -Gamma(-alpha) cos(pi alpha/2) via Gamma(-alpha) = Gamma(2-alpha) / (alpha (alpha-1))
    return -std::tgamma(2.0 - alpha) / (alpha * (alpha - 1.0)) * std::cos(kPi * alpha / 2.0);
}

std::complex<double> characteristic_exponent(const LevyModel& model, double theta) {
    using namespace std::complex_literals;
    if (const auto* cp = std::get_if<CompoundPoissonTwoExp>(&model)) {
        const std::complex<double> it = 1i * theta;
        return cp->lambda1 * (cp->alpha1 / (cp->alpha1 + it) - 1.0) +
               cp->lambda2 * (cp->alpha2 / (cp->alpha2 - it) - 1.0);
    }
    if (const auto* st = std::get_if<StrictlyStable>(&model)) {
        if (theta == 0.0) return 0.0;
        const double total = st->c_plus + st->c_minus;
        const double beta = (st->c_plus - st->c_minus) / total;
        const double scale_a = stable_lk_constant(st->alpha) * total;
        const double sgn = theta > 0 ? 1.0 : -1.0;
        const std::complex<double> skew =
            1.0 - 1i * beta * sgn * std::tan(kPi * st->alpha / 2.0);
        return -scale_a * std::pow(std::abs(theta), st->alpha) * skew;
    }
    const auto& bm = std::get<BrownianDrift>(model);
    return 1i * bm.mu * theta - 0.5 * bm.sigma * bm.sigma * theta * theta;
}

double cp_exponent_neg(const CompoundPoissonTwoExp& m, double z) {
    // exponent of -X: up jumps Exp(alpha1) at rate lambda1, down jumps
    // Exp(alpha2) at rate lambda2; finite for -alpha2 < z < alpha1
    return m.lambda1 * (m.alpha1 / (m.alpha1 - z) - 1.0) +
           m.lambda2 * (m.alpha2 / (m.alpha2 + z) - 1.0);
}

PhiRoots phi_roots(const CompoundPoissonTwoExp& m, double eps) {
    if (eps <= 0) throw std::invalid_argument("discount rate must be positive");
    const double qa = eps + m.lambda1 + m.lambda2;
    const double qb = m.alpha2 * (m.lambda1 + eps) - m.alpha1 * (m.lambda2 + eps);
    const double qc = -eps * m.alpha1 * m.alpha2;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc <= 0) throw std::runtime_error("characteristic quadratic has no real roots");
    const double sq = std::sqrt(disc);
    double z_neg = (-qb - sq) / (2.0 * qa);
    double z_pos = (-qb + sq) / (2.0 * qa);

    // Newton polish against the exponent itself, then require agreement; this
    // guards the quadratic's coefficients against transcription slips.
    auto polish = [&](double z) {
        for (int k = 0; k < 3; ++k) {
            const double f = cp_exponent_neg(m, z) - eps;
            const double h = 1e-7 * (1.0 + std::abs(z));
            const double df = (cp_exponent_neg(m, z + h) - cp_exponent_neg(m, z - h)) / (2 * h);
            if (df == 0.0) break;
            z -= f / df;
        }
        return z;
    };
    z_neg = polish(z_neg);
    z_pos = polish(z_pos);

    PhiRoots out;
    out.r_inf = -z_neg;
    out.r_sup = z_pos;
    out.residual_inf = std::abs(cp_exponent_neg(m, z_neg) - eps);
    out.residual_sup = std::abs(cp_exponent_neg(m, z_pos) - eps);
    if (out.r_inf <= 0 || out.r_sup <= 0 || out.residual_inf > 1e-10 || out.residual_sup > 1e-10)
        throw std::runtime_error("characteristic roots failed the residual check");
    return out;
}

namespace {

double cp_increment(const CompoundPoissonTwoExp& m, double dt, Rng& rng) {
    const auto n_down = std::poisson_distribution<long>(m.lambda1 * dt)(rng);
    const auto n_up = std::poisson_distribution<long>(m.lambda2 * dt)(rng);
    double x = 0.0;
    // sum of k unit exponentials is Gamma(k,1)
    if (n_down > 0)
        x -= std::gamma_distribution<double>(static_cast<double>(n_down), 1.0)(rng) / m.alpha1;
    if (n_up > 0)
        x += std::gamma_distribution<double>(static_cast<double>(n_up), 1.0)(rng) / m.alpha2;
    return x;
}

}  // namespace

double sample_standard_stable(double alpha, double beta, Rng& rng) {
    // polar construction for S(alpha, beta) with characteristic function
    // exp(-|t|^alpha (1 - i beta sgn(t) tan(pi alpha/2)))
    const double tphi = beta * std::tan(kPi * alpha / 2.0);
    const double theta0 = std::atan(tphi) / alpha;
    const double scale = std::pow(1.0 + tphi * tphi, 1.0 / (2.0 * alpha));
    const double u = (uniform01(rng) - 0.5) * kPi;  // uniform on (-pi/2, pi/2)
    double w = exponential(rng, 1.0);
    if (w <= 0) w = 1e-300;
    const double s = alpha * (u + theta0);
    return scale * std::sin(s) / std::pow(std::cos(u), 1.0 / alpha) *
           std::pow(std::cos(u - s) / w, (1.0 - alpha) / alpha);
}

double sample_increment(const LevyModel& model, double dt, Rng& rng) {
    if (dt <= 0) throw std::invalid_argument("dt must be positive");
    if (const auto* cp = std::get_if<CompoundPoissonTwoExp>(&model))
        return cp_increment(*cp, dt, rng);
    if (const auto* st = std::get_if<StrictlyStable>(&model)) {
        const double total = st->c_plus + st->c_minus;
        const double beta = (st->c_plus - st->c_minus) / total;
        const double sigma = std::pow(stable_lk_constant(st->alpha) * total, 1.0 / st->alpha);
        return sigma * std::pow(dt, 1.0 / st->alpha) *
               sample_standard_stable(st->alpha, beta, rng);
    }
    const auto& bm = std::get<BrownianDrift>(model);
    return bm.mu * dt + bm.sigma * std::sqrt(dt) * normal01(rng);
}

std::string family_name(const LevyModel& model) {
    if (std::holds_alternative<CompoundPoissonTwoExp>(model)) return "compound_poisson";
    if (std::holds_alternative<StrictlyStable>(model)) return "stable";
    return "brownian";
}

}  // namespace mfg
