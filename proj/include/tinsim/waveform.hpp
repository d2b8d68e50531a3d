#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>

#include "tinsim/rng.hpp"
#include "tinsim/trace.hpp"

namespace tinsim {

enum class StationarityCondition {
    kDiffBound,       // phi2 - phi1 < 1
    kSumBound,        // phi2 + phi1 < 1
    kMagnitudeBound,  // |phi2| < 1
};

struct StationarityVerdict {
    bool stationary = false;
    // First violated condition, in the order above; empty when stationary.
    std::optional<StationarityCondition> violated;
    // Smallest slack across the three inequalities. Positive iff strictly
    // inside the triangle; boundary points report 0 and are rejected.
    double margin = 0.0;
};

StationarityVerdict check_stationarity(double phi1, double phi2);

std::string to_string(StationarityCondition c);

/// AR(2) coefficient pair. The constructor rejects non-stationary pairs,
/// so every instance satisfies the stationarity triangle.
class ArCoefficients {
  public:
    ArCoefficients(double phi1, double phi2);

    double phi1() const { return phi1_; }
    double phi2() const { return phi2_; }

  private:
    double phi1_;
    double phi2_;
};

/// Roots of 1 - phi1*L - phi2*L^2 = 0. With phi2 = 0 the quadratic
/// degenerates to AR(1) and only the single root 1/phi1 is returned.
struct CharacteristicRoots {
    std::complex<double> r1;
    std::optional<std::complex<double>> r2;
    bool complex_pair = false;
    bool repeated = false;
};

CharacteristicRoots characteristic_roots(const ArCoefficients& ar);

/// Spectral peak location for a complex-root pair, in cycles/sample.
/// Absent when the roots are real (baseband peak at f = 0 or 0.5 instead).
std::optional<double> resonant_frequency(const ArCoefficients& ar);

/// Log-normal-shaped envelope of the innovation standard deviation.
class EnvelopeParams {
  public:
    EnvelopeParams(double theta0, double mu_t, double sigma_t);

    double theta0() const { return theta0_; }
    double mu_t() const { return mu_t_; }
    double sigma_t() const { return sigma_t_; }

  private:
    double theta0_;
    double mu_t_;
    double sigma_t_;
};

/// Innovation standard deviation at integer time t. Zero at t = 0 (the
/// envelope formula is singular there; the impulse starts from silence).
double innovation_std(std::int64_t t, const EnvelopeParams& env);

/// Largest envelope value over integer t >= 1.
double envelope_peak(const EnvelopeParams& env);

/// Time-averaged innovation variance (1/N) sum theta_t^2 over the window;
/// the flat spectral level of the heteroscedastic innovations, and the
/// sigma_theta_sq that makes ar2_psd reproduce an averaged periodogram.
double envelope_mean_square(const EnvelopeParams& env, std::size_t length);

struct ImpulseConfig {
    ArCoefficients ar;
    EnvelopeParams envelope;
    std::size_t length;

    // True when the envelope has decayed below 1e-3 of its peak by the end
    // of the window. Callers should warn (not fail) when this is false.
    bool envelope_decayed() const;
};

/// One random transient: U_t = phi1*U_{t-1} + phi2*U_{t-2} + theta_t*W_t,
/// started from rest (U_{-1} = U_{-2} = 0), W_t iid standard normal.
Trace generate_impulse(const ImpulseConfig& cfg, RngStream& rng);

/// Closed-form autocorrelation of the stationary AR(2) process at the
/// given lag. Branches on the root pattern; every branch agrees with the
/// Yule-Walker recursion rho_k = phi1*rho_{k-1} + phi2*rho_{k-2}.
double theoretical_acf(const ArCoefficients& ar, std::uint64_t lag);

/// Two-sided AR(2) spectrum sigma_theta_sq / |1 - phi1 e^{j2pif} - phi2 e^{j4pif}|^2
/// at normalized frequency f. Integrates to the process variance over
/// [-1/2, 1/2]; double it when overlaying on a one-sided estimate.
double ar2_psd(const ArCoefficients& ar, double sigma_theta_sq, double f);

/// Deterministic equivalent of the random impulse: a double-exponential
/// pulse, optionally modulated at a resonant frequency.
class EquivalentWaveformParams {
  public:
    EquivalentWaveformParams(double amplitude_k, double fall_a, double rise_b,
                             std::optional<double> resonant_f0 = std::nullopt,
                             double phase = 0.0);

    double amplitude_k() const { return amplitude_k_; }
    double fall_a() const { return fall_a_; }
    double rise_b() const { return rise_b_; }
    std::optional<double> resonant_f0() const { return resonant_f0_; }
    double phase() const { return phase_; }

  private:
    double amplitude_k_;
    double fall_a_;
    double rise_b_;
    std::optional<double> resonant_f0_;
    double phase_;
};

double equivalent_waveform(const EquivalentWaveformParams& p, double t);

/// Decay rates of the equivalent pulse for a real-root AR(2): the inverse
/// roots G = 1/r give fall_a = -ln(max G), rise_b = -ln(min G). Throws
/// model_mismatch_error for complex roots (no double-exponential form).
struct EquivalentRates {
    double fall_a;
    double rise_b;
};

EquivalentRates equivalent_rates(const ArCoefficients& ar);

}  // namespace tinsim
