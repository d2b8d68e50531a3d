#include "tinsim/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <fftw3.h>

#include "tinsim/errors.hpp"

namespace tinsim {

namespace {

constexpr double kPi = std::numbers::pi;

double trapezoid(std::span<const double> x, std::span<const double> y) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        acc += 0.5 * (y[i] + y[i + 1]) * (x[i + 1] - x[i]);
    }
    return acc;
}

}  // namespace

std::vector<double> frequency_grid(std::size_t points) {
    if (points < 2) {
        throw std::invalid_argument("frequency_grid: need at least two points");
    }
    std::vector<double> f(points);
    for (std::size_t i = 0; i < points; ++i) {
        f[i] = 0.5 * static_cast<double>(i) / static_cast<double>(points - 1);
    }
    return f;
}

double carson_psd_value(double f, const ShotParams& p) {
    // composed exactly as lambda * gamma spectrum + background
    return p.lambda * gamma_psd_value(f, p.k_moments.at(1), p.fall_a, p.rise_b) +
           p.sigma_n_sq;
}

Psd carson_psd(std::span<const double> frequencies, const ShotParams& p) {
    p.validate();
    if (p.k_moments.size() < 2) {
        throw std::invalid_argument("carson_psd: needs <K> and <K^2>");
    }
    Psd out;
    out.frequencies.assign(frequencies.begin(), frequencies.end());
    out.values.reserve(frequencies.size());
    for (double f : frequencies) {
        out.values.push_back(carson_psd_value(f, p));
    }
    const double a = p.fall_a;
    const double b = p.rise_b;
    const double mean = p.lambda * p.k_moments[0] * (b - a) / (a * b);
    out.dc_impulse_mass = mean * mean;
    return out;
}

double gamma_psd_value(double f, double k2, double fall_a, double rise_b) {
    const double w = 2.0 * kPi * f;
    const double num = k2 * (rise_b - fall_a) * (rise_b - fall_a);
    return num / ((fall_a * fall_a + w * w) * (rise_b * rise_b + w * w));
}

Psd gamma_psd(std::span<const double> frequencies, double k2, double fall_a, double rise_b) {
    if (!(fall_a > 0.0) || !(rise_b > fall_a) || !(k2 >= 0.0)) {
        throw std::invalid_argument("gamma_psd: require 0 < fall_a < rise_b and <K^2> >= 0");
    }
    Psd out;
    out.frequencies.assign(frequencies.begin(), frequencies.end());
    out.values.reserve(frequencies.size());
    for (double f : frequencies) {
        out.values.push_back(gamma_psd_value(f, k2, fall_a, rise_b));
    }
    return out;
}

Psd periodogram(const Trace& trace, const WelchOptions& options) {
    const std::size_t n = trace.samples.size();
    const std::size_t seg = options.segment;
    if (seg < 4 || seg > n) {
        throw std::invalid_argument("periodogram: segment must lie in [4, trace length]");
    }
    if (!(options.overlap >= 0.0 && options.overlap < 1.0)) {
        throw std::invalid_argument("periodogram: overlap must lie in [0, 1)");
    }

    std::vector<double> window(seg, 1.0);
    if (options.window == WelchOptions::Window::kHann) {
        for (std::size_t i = 0; i < seg; ++i) {
            window[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) /
                                             static_cast<double>(seg));
        }
    }

    const std::size_t bins = seg / 2 + 1;
    std::vector<double> in(seg);
    std::vector<std::complex<double>> out(bins);
    fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(seg), in.data(),
                                          reinterpret_cast<fftw_complex*>(out.data()),
                                          FFTW_ESTIMATE);
    if (plan == nullptr) {
        throw numerical_error("periodogram: FFT planning failed");
    }

    const auto step = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(static_cast<double>(seg) *
                                                (1.0 - options.overlap))));
    std::vector<double> acc(bins, 0.0);
    std::size_t count = 0;
    for (std::size_t start = 0; start + seg <= n; start += step) {
        for (std::size_t i = 0; i < seg; ++i) {
            in[i] = window[i] * trace.samples[start + i];
        }
        fftw_execute(plan);
        for (std::size_t k = 0; k < bins; ++k) {
            acc[k] += std::norm(out[k]);
        }
        ++count;
    }
    fftw_destroy_plan(plan);

    Psd psd;
    psd.frequencies.resize(bins);
    for (std::size_t k = 0; k < bins; ++k) {
        psd.frequencies[k] = static_cast<double>(k) / static_cast<double>(seg);
    }
    double wss = 0.0;
    for (double w : window) {
        wss += w * w;
    }
    psd.values.resize(bins);
    const bool even = (seg % 2 == 0);
    for (std::size_t k = 0; k < bins; ++k) {
        double v = acc[k] / (static_cast<double>(count) * wss);
        const bool interior = k != 0 && (!even || k != bins - 1);
        if (interior) {
            v *= 2.0;
        }
        psd.values[k] = v;
    }

    // Exact power normalization over the grid.
    const double mean_power =
        std::inner_product(trace.samples.begin(), trace.samples.end(), trace.samples.begin(),
                           0.0) /
        static_cast<double>(n);
    const double integral = trapezoid(psd.frequencies, psd.values);
    if (integral > 0.0 && mean_power > 0.0) {
        const double scale = mean_power / integral;
        for (double& v : psd.values) {
            v *= scale;
        }
    }
    return psd;
}

BurgResult burg_estimate(const Trace& trace, unsigned order, std::size_t psd_bins) {
    const std::size_t n = trace.samples.size();
    if (order < 1) {
        throw std::invalid_argument("burg_estimate: order must be >= 1");
    }
    if (n < 10 * static_cast<std::size_t>(order)) {
        throw std::invalid_argument("burg_estimate: trace too short for the requested order");
    }

    const double mean = std::accumulate(trace.samples.begin(), trace.samples.end(), 0.0) /
                        static_cast<double>(n);
    std::vector<double> fwd(n);
    for (std::size_t i = 0; i < n; ++i) {
        fwd[i] = trace.samples[i] - mean;
    }
    double energy = std::inner_product(fwd.begin(), fwd.end(), fwd.begin(), 0.0) /
                    static_cast<double>(n);
    if (!(energy > 0.0)) {
        throw numerical_error("burg_estimate: degenerate (constant) trace");
    }
    std::vector<double> bwd = fwd;

    // Prediction-error polynomial A(z) = 1 + sum a_i z^{-i}.
    std::vector<double> a;
    std::vector<double> a_prev;
    for (unsigned m = 1; m <= order; ++m) {
        double num = 0.0;
        double den = 0.0;
        for (std::size_t t = m; t < n; ++t) {
            num += fwd[t] * bwd[t - 1];
            den += fwd[t] * fwd[t] + bwd[t - 1] * bwd[t - 1];
        }
        if (!(den > 0.0)) {
            throw numerical_error("burg_estimate: zero prediction-error energy");
        }
        const double k = -2.0 * num / den;

        a_prev = a;
        a.resize(m);
        for (unsigned i = 1; i < m; ++i) {
            a[i - 1] = a_prev[i - 1] + k * a_prev[m - 1 - i];
        }
        a[m - 1] = k;

        for (std::size_t t = n - 1; t >= m; --t) {
            const double f_new = fwd[t] + k * bwd[t - 1];
            bwd[t] = bwd[t - 1] + k * fwd[t];
            fwd[t] = f_new;
        }
        energy *= (1.0 - k * k);
    }

    BurgResult result;
    result.coefficients.resize(order);
    for (unsigned i = 0; i < order; ++i) {
        result.coefficients[i] = -a[i];
    }
    result.innovation_variance = energy;

    const auto grid = frequency_grid(psd_bins);
    result.psd.frequencies = grid;
    result.psd.values.reserve(grid.size());
    for (double f : grid) {
        std::complex<double> denom(1.0, 0.0);
        for (unsigned i = 1; i <= order; ++i) {
            denom -= result.coefficients[i - 1] *
                     std::polar(1.0, -2.0 * kPi * f * static_cast<double>(i));
        }
        result.psd.values.push_back(energy / std::norm(denom));
    }
    return result;
}

std::vector<double> empirical_acf(const Trace& trace, std::size_t max_lag) {
    const std::size_t n = trace.samples.size();
    if (n == 0 || max_lag >= n) {
        throw std::invalid_argument("empirical_acf: max_lag must be below the trace length");
    }
    const double mean = std::accumulate(trace.samples.begin(), trace.samples.end(), 0.0) /
                        static_cast<double>(n);
    double denom = 0.0;
    for (double x : trace.samples) {
        denom += (x - mean) * (x - mean);
    }
    std::vector<double> rho(max_lag + 1, 1.0);
    if (!(denom > 0.0)) {
        throw degenerate_variance_error("empirical_acf: constant trace");
    }
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double acc = 0.0;
        for (std::size_t t = 0; t + k < n; ++t) {
            acc += (trace.samples[t] - mean) * (trace.samples[t + k] - mean);
        }
        rho[k] = acc / denom;
    }
    return rho;
}

}  // namespace tinsim
