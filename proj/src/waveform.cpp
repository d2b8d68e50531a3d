#include "tinsim/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "tinsim/errors.hpp"

namespace tinsim {

namespace {

constexpr double kPi = std::numbers::pi;

// Roots closer than this (relative) are treated as a repeated pair.
constexpr double kRepeatedRootTol = 1e-9;
// Discriminant treated as negative only below this, for stability near
// the parabola phi1^2 + 4 phi2 = 0.
constexpr double kDiscriminantTol = 1e-12;

}  // namespace

StationarityVerdict check_stationarity(double phi1, double phi2) {
    if (!std::isfinite(phi1) || !std::isfinite(phi2)) {
        throw std::invalid_argument("check_stationarity: coefficients must be finite");
    }
    const double slack_diff = 1.0 - (phi2 - phi1);
    const double slack_sum = 1.0 - (phi2 + phi1);
    const double slack_mag = 1.0 - std::abs(phi2);

    StationarityVerdict v;
    v.margin = std::min({slack_diff, slack_sum, slack_mag});
    v.stationary = v.margin > 0.0;
    if (!v.stationary) {
        if (slack_diff <= 0.0) {
            v.violated = StationarityCondition::kDiffBound;
        } else if (slack_sum <= 0.0) {
            v.violated = StationarityCondition::kSumBound;
        } else {
            v.violated = StationarityCondition::kMagnitudeBound;
        }
    }
    return v;
}

std::string to_string(StationarityCondition c) {
    switch (c) {
        case StationarityCondition::kDiffBound: return "phi2 - phi1 < 1";
        case StationarityCondition::kSumBound: return "phi2 + phi1 < 1";
        case StationarityCondition::kMagnitudeBound: return "|phi2| < 1";
    }
    return "?";
}

ArCoefficients::ArCoefficients(double phi1, double phi2) : phi1_(phi1), phi2_(phi2) {
    const auto v = check_stationarity(phi1, phi2);
    if (!v.stationary) {
        throw std::invalid_argument("ArCoefficients: stationarity violated (" +
                                    to_string(*v.violated) + ")");
    }
}

CharacteristicRoots characteristic_roots(const ArCoefficients& ar) {
    const double phi1 = ar.phi1();
    const double phi2 = ar.phi2();
    CharacteristicRoots out;

    if (phi2 == 0.0) {
        // Degenerate AR(1): 1 - phi1*L = 0. phi1 = 0 would leave no lag
        // structure at all; report an infinite root in that case.
        out.r1 = (phi1 == 0.0) ? std::complex<double>(std::numeric_limits<double>::infinity(), 0.0)
                               : std::complex<double>(1.0 / phi1, 0.0);
        return out;
    }

    const double disc = phi1 * phi1 + 4.0 * phi2;
    if (disc < -kDiscriminantTol) {
        const double re = phi1 / (-2.0 * phi2);
        const double im = std::sqrt(-disc) / (-2.0 * phi2);
        out.r1 = {re, im};
        out.r2 = std::complex<double>(re, -im);
        out.complex_pair = true;
        return out;
    }

    const double sq = std::sqrt(std::max(disc, 0.0));
    const double r1 = (phi1 + sq) / (-2.0 * phi2);
    const double r2 = (phi1 - sq) / (-2.0 * phi2);
    out.r1 = {r1, 0.0};
    out.r2 = std::complex<double>(r2, 0.0);
    out.repeated = std::abs(r1 - r2) <= kRepeatedRootTol * std::max(std::abs(r1), std::abs(r2));
    return out;
}

std::optional<double> resonant_frequency(const ArCoefficients& ar) {
    const double phi1 = ar.phi1();
    const double phi2 = ar.phi2();
    if (phi1 * phi1 + 4.0 * phi2 >= -kDiscriminantTol) {
        return std::nullopt;
    }
    return std::acos(phi1 / (2.0 * std::sqrt(-phi2))) / (2.0 * kPi);
}

EnvelopeParams::EnvelopeParams(double theta0, double mu_t, double sigma_t)
    : theta0_(theta0), mu_t_(mu_t), sigma_t_(sigma_t) {
    if (!(theta0 >= 0.0) || !std::isfinite(theta0)) {
        throw std::invalid_argument("EnvelopeParams: theta0 must be finite and >= 0");
    }
    if (!(sigma_t > 0.0) || !std::isfinite(sigma_t) || !std::isfinite(mu_t)) {
        throw std::invalid_argument("EnvelopeParams: require finite mu_t and sigma_t > 0");
    }
}

double innovation_std(std::int64_t t, const EnvelopeParams& env) {
    if (t < 0) {
        throw std::invalid_argument("innovation_std: t must be >= 0");
    }
    if (t == 0) {
        return 0.0;
    }
    const double td = static_cast<double>(t);
    const double z = (std::log(td) - env.mu_t()) / env.sigma_t();
    return env.theta0() / (td * env.sigma_t() * std::sqrt(2.0 * kPi)) * std::exp(-0.5 * z * z);
}

double envelope_peak(const EnvelopeParams& env) {
    // The continuous maximizer is exp(mu - sigma^2); check its integer
    // neighbours plus t = 1.
    const double tstar = std::exp(env.mu_t() - env.sigma_t() * env.sigma_t());
    double best = innovation_std(1, env);
    const auto lo = static_cast<std::int64_t>(std::floor(tstar));
    for (std::int64_t t = std::max<std::int64_t>(1, lo - 1); t <= lo + 2; ++t) {
        best = std::max(best, innovation_std(t, env));
    }
    return best;
}

double envelope_mean_square(const EnvelopeParams& env, std::size_t length) {
    if (length == 0) {
        throw std::invalid_argument("envelope_mean_square: length must be positive");
    }
    double acc = 0.0;
    for (std::size_t t = 0; t < length; ++t) {
        const double v = innovation_std(static_cast<std::int64_t>(t), env);
        acc += v * v;
    }
    return acc / static_cast<double>(length);
}

bool ImpulseConfig::envelope_decayed() const {
    if (length == 0) {
        return false;
    }
    const double peak = envelope_peak(envelope);
    if (peak == 0.0) {
        return true;
    }
    return innovation_std(static_cast<std::int64_t>(length) - 1, envelope) < 1e-3 * peak;
}

Trace generate_impulse(const ImpulseConfig& cfg, RngStream& rng) {
    if (cfg.length == 0) {
        throw std::invalid_argument("generate_impulse: length must be positive");
    }
    Trace out;
    out.samples.resize(cfg.length);
    const double phi1 = cfg.ar.phi1();
    const double phi2 = cfg.ar.phi2();
    double u1 = 0.0;  // U_{t-1}
    double u2 = 0.0;  // U_{t-2}
    for (std::size_t t = 0; t < cfg.length; ++t) {
        const double theta = innovation_std(static_cast<std::int64_t>(t), cfg.envelope);
        const double u = phi1 * u1 + phi2 * u2 + theta * rng.normal();
        out.samples[t] = u;
        u2 = u1;
        u1 = u;
    }
    return out;
}

double theoretical_acf(const ArCoefficients& ar, std::uint64_t lag) {
    const double phi1 = ar.phi1();
    const double phi2 = ar.phi2();
    if (lag == 0) {
        return 1.0;
    }
    const double k = static_cast<double>(lag);

    if (phi2 == 0.0) {
        // AR(1) limit.
        return std::pow(phi1, k);
    }

    const double disc = phi1 * phi1 + 4.0 * phi2;
    if (disc < -kDiscriminantTol) {
        // Complex roots: damped sinusoid at the resonant frequency. The
        // phase zeta is fixed by rho_0 = 1 and rho_1 = phi1/(1 - phi2);
        // atan2 keeps it well-defined when phi1 = 0 (f0 = 1/4).
        const double radius = std::sqrt(-phi2);
        const double f0 = std::acos(phi1 / (2.0 * radius)) / (2.0 * kPi);
        const double w0 = 2.0 * kPi * f0;
        const double zeta = std::atan2((1.0 - phi2) * std::sin(w0), (1.0 + phi2) * std::cos(w0));
        return std::pow(radius, k) * std::sin(w0 * k + zeta) / std::sin(zeta);
    }

    const auto roots = characteristic_roots(ar);
    const double g1 = 1.0 / roots.r1.real();
    const double g2 = 1.0 / roots.r2->real();
    if (roots.repeated) {
        // Repeated root: inverse root is phi1/2.
        const double g = 0.5 * phi1;
        return (1.0 + (1.0 + phi2) * k / (1.0 - phi2)) * std::pow(g, k);
    }
    const double num = (1.0 - g2 * g2) * std::pow(g1, k + 1.0) -
                       (1.0 - g1 * g1) * std::pow(g2, k + 1.0);
    const double den = (g1 - g2) * (1.0 + g1 * g2);
    return num / den;
}

double ar2_psd(const ArCoefficients& ar, double sigma_theta_sq, double f) {
    if (sigma_theta_sq < 0.0) {
        throw std::invalid_argument("ar2_psd: sigma_theta_sq must be >= 0");
    }
    const double w = 2.0 * kPi * f;
    const std::complex<double> e1 = std::polar(1.0, w);
    const std::complex<double> e2 = std::polar(1.0, 2.0 * w);
    const std::complex<double> denom = 1.0 - ar.phi1() * e1 - ar.phi2() * e2;
    return sigma_theta_sq / std::norm(denom);
}

EquivalentWaveformParams::EquivalentWaveformParams(double amplitude_k, double fall_a,
                                                   double rise_b,
                                                   std::optional<double> resonant_f0,
                                                   double phase)
    : amplitude_k_(amplitude_k),
      fall_a_(fall_a),
      rise_b_(rise_b),
      resonant_f0_(resonant_f0),
      phase_(phase) {
    if (!(fall_a > 0.0) || !(rise_b > 0.0)) {
        throw std::invalid_argument("EquivalentWaveformParams: rates must be positive");
    }
    if (!(rise_b > fall_a)) {
        throw std::invalid_argument("EquivalentWaveformParams: rise_b must exceed fall_a");
    }
    if (resonant_f0 && !(*resonant_f0 > 0.0 && *resonant_f0 < 0.5)) {
        throw std::invalid_argument("EquivalentWaveformParams: resonant_f0 must lie in (0, 0.5)");
    }
}

double equivalent_waveform(const EquivalentWaveformParams& p, double t) {
    if (t < 0.0) {
        return 0.0;
    }
    double v = p.amplitude_k() * (std::exp(-p.fall_a() * t) - std::exp(-p.rise_b() * t));
    if (p.resonant_f0()) {
        v *= std::cos(2.0 * kPi * *p.resonant_f0() * t + p.phase());
    }
    return v;
}

EquivalentRates equivalent_rates(const ArCoefficients& ar) {
    const auto roots = characteristic_roots(ar);
    if (roots.complex_pair) {
        throw model_mismatch_error(
            "equivalent_rates: complex roots have no double-exponential form");
    }
    if (!roots.r2) {
        throw model_mismatch_error("equivalent_rates: AR(1) degenerate pair");
    }
    const double g1 = 1.0 / roots.r1.real();
    const double g2 = 1.0 / roots.r2->real();
    if (!(g1 > 0.0) || !(g2 > 0.0)) {
        throw model_mismatch_error("equivalent_rates: requires positive real inverse roots");
    }
    const double g_slow = std::max(g1, g2);
    const double g_fast = std::min(g1, g2);
    return {-std::log(g_slow), -std::log(g_fast)};
}

}  // namespace tinsim
