#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tinsim/stats.hpp"
#include "tinsim/trace.hpp"

namespace tinsim {

/// Power spectral density on a frequency grid in [0, 0.5] cycles/sample.
///
/// Closed-form model spectra (carson_psd, gamma_psd, ar2_psd, Burg) are
/// stored as two-sided densities: they integrate to the process variance
/// over (-1/2, 1/2). The Welch periodogram is one-sided and integrates to
/// the trace's mean power over [0, 1/2]; multiply a model by 2 when
/// overlaying the two. The singular DC term of the shot spectrum is kept
/// out of the continuous values and carried as dc_impulse_mass.
struct Psd {
    std::vector<double> frequencies;
    std::vector<double> values;
    double dc_impulse_mass = 0.0;
};

/// Shot-noise spectrum lambda <K^2> (b-a)^2 / ((a^2+w^2)(b^2+w^2)) + sigma_n^2
/// with w = 2 pi f. The DC mass is the squared mean (lambda <K> (b-a)/(ab))^2.
double carson_psd_value(double f, const ShotParams& p);
Psd carson_psd(std::span<const double> frequencies, const ShotParams& p);

/// Energy spectrum of the unit pulse scaled by <K^2>; carson_psd with
/// lambda = 1 and no background or DC mass.
double gamma_psd_value(double f, double k2, double fall_a, double rise_b);
Psd gamma_psd(std::span<const double> frequencies, double k2, double fall_a, double rise_b);

struct WelchOptions {
    std::size_t segment = 4096;
    double overlap = 0.5;
    enum class Window { kHann, kRect } window = Window::kHann;
};

/// Welch-averaged one-sided periodogram, rescaled so the trapezoid
/// integral over the grid equals the trace's mean power exactly.
Psd periodogram(const Trace& trace, const WelchOptions& options = {});

struct BurgResult {
    std::vector<double> coefficients;  // phi_i: x_t = sum phi_i x_{t-i} + e_t
    double innovation_variance = 0.0;
    Psd psd;
};

/// Burg reflection-coefficient AR fit on the de-meaned trace. The
/// recursion keeps every reflection coefficient inside the unit circle,
/// so the returned polynomial is minimum-phase. Throws numerical_error
/// on a constant trace.
BurgResult burg_estimate(const Trace& trace, unsigned order, std::size_t psd_bins = 513);

/// Biased autocorrelation estimate, rho_0 = 1, |rho_k| <= 1.
std::vector<double> empirical_acf(const Trace& trace, std::size_t max_lag);

/// Uniform frequency grid with the given number of points spanning [0, 0.5].
std::vector<double> frequency_grid(std::size_t points);

}  // namespace tinsim
