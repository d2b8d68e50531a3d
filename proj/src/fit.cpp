#include "tinsim/fit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "tinsim/errors.hpp"

namespace tinsim {

namespace {

constexpr double kPi = std::numbers::pi;

// Fixed regression grids on the standardized scale.
constexpr unsigned kModulusPoints = 10;   // xi_k = pi k / 25
constexpr unsigned kPhasePoints = 10;     // xi_l = pi l / 50
constexpr double kAlphaMin = 0.1;

double quantile_sorted(std::span<const double> sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

struct LineFit {
    double slope;
    double intercept;
};

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    double sx = 0.0;
    double sy = 0.0;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    return {(n * sxy - sx * sy) / denom, (sy * sxx - sx * sxy) / denom};
}

// Two-regressor least squares without intercept: y ~ c1 u + c2 v.
struct PairFit {
    double c1;
    double c2;
};

PairFit least_squares2(std::span<const double> u, std::span<const double> v,
                       std::span<const double> y) {
    double suu = 0.0;
    double svv = 0.0;
    double suv = 0.0;
    double suy = 0.0;
    double svy = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        suu += u[i] * u[i];
        svv += v[i] * v[i];
        suv += u[i] * v[i];
        suy += u[i] * y[i];
        svy += v[i] * y[i];
    }
    const double det = suu * svv - suv * suv;
    return {(svv * suy - suv * svy) / det, (suu * svy - suv * suy) / det};
}

struct EmpiricalCf {
    std::vector<double> re;
    std::vector<double> im;
};

EmpiricalCf empirical_cf(std::span<const double> z, std::span<const double> xi) {
    EmpiricalCf cf;
    cf.re.assign(xi.size(), 0.0);
    cf.im.assign(xi.size(), 0.0);
    for (double x : z) {
        for (std::size_t k = 0; k < xi.size(); ++k) {
            cf.re[k] += std::cos(xi[k] * x);
            cf.im[k] += std::sin(xi[k] * x);
        }
    }
    const double n = static_cast<double>(z.size());
    for (std::size_t k = 0; k < xi.size(); ++k) {
        cf.re[k] /= n;
        cf.im[k] /= n;
    }
    return cf;
}

}  // namespace

StableFit estimate_stable(std::span<const double> samples) {
    if (samples.size() < 100) {
        throw insufficient_data_error("estimate_stable: need at least 100 samples");
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double scale0 = (quantile_sorted(sorted, 0.72) - quantile_sorted(sorted, 0.28)) / 1.654;
    if (!(scale0 > 0.0)) {
        throw degenerate_variance_error("estimate_stable: sample has no spread");
    }
    std::vector<double> z(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        z[i] = samples[i] / scale0;
    }

    bool clamped = false;

    // Modulus regression for alpha and the standardized scale.
    std::vector<double> xi1(kModulusPoints);
    for (unsigned k = 0; k < kModulusPoints; ++k) {
        xi1[k] = kPi * static_cast<double>(k + 1) / 25.0;
    }
    const EmpiricalCf cf1 = empirical_cf(z, xi1);
    std::vector<double> logxi(kModulusPoints);
    std::vector<double> y(kModulusPoints);
    for (unsigned k = 0; k < kModulusPoints; ++k) {
        double mod2 = cf1.re[k] * cf1.re[k] + cf1.im[k] * cf1.im[k];
        mod2 = std::clamp(mod2, 1e-300, 1.0 - 1e-12);
        logxi[k] = std::log(xi1[k]);
        y[k] = std::log(-std::log(mod2));
    }
    const LineFit mod_fit = least_squares(logxi, y);
    double alpha = mod_fit.slope;
    if (alpha < kAlphaMin || alpha > 2.0) {
        alpha = std::clamp(alpha, kAlphaMin, 2.0);
        clamped = true;
    }
    double sigma_std = std::exp((mod_fit.intercept - std::log(2.0)) / alpha);

    // Phase regression for beta and the standardized location. Near
    // alpha = 1 the |xi|^alpha regressor collapses onto xi; the
    // logarithmic branch separates them again.
    std::vector<double> xi2(kPhasePoints);
    for (unsigned l = 0; l < kPhasePoints; ++l) {
        xi2[l] = kPi * static_cast<double>(l + 1) / 50.0;
    }
    const EmpiricalCf cf2 = empirical_cf(z, xi2);
    std::vector<double> phase(kPhasePoints);
    for (unsigned l = 0; l < kPhasePoints; ++l) {
        phase[l] = std::atan2(cf2.im[l], cf2.re[l]);
    }
    std::vector<double> reg2(kPhasePoints);
    const bool near_one = std::abs(alpha - 1.0) < 0.05;
    for (unsigned l = 0; l < kPhasePoints; ++l) {
        reg2[l] = near_one ? xi2[l] * std::log(xi2[l]) : std::pow(xi2[l], alpha);
    }
    const PairFit ph_fit = least_squares2(xi2, reg2, phase);
    const double mu_std = ph_fit.c1;
    double beta;
    if (alpha > 1.95) {
        beta = 0.0;  // unidentifiable at the gaussian boundary, tan -> 0
    } else if (near_one) {
        beta = -ph_fit.c2 * kPi / (2.0 * sigma_std);
    } else {
        beta = ph_fit.c2 / (std::tan(kPi * alpha / 2.0) * std::pow(sigma_std, alpha));
    }
    if (beta < -1.0 || beta > 1.0) {
        beta = std::clamp(beta, -1.0, 1.0);
        clamped = true;
    }

    double sigma = sigma_std * scale0;
    double mu = mu_std * scale0;
    if (near_one) {
        mu += (2.0 / kPi) * beta * sigma * std::log(scale0);
    }
    return {StableParams(alpha, beta, sigma, mu), clamped};
}

ClassAFit estimate_class_a(std::span<const double> samples) {
    if (samples.size() < 10000) {
        throw insufficient_data_error("estimate_class_a: need at least 1e4 samples");
    }
    const SampleMoments sm = sample_moments(samples);
    if (!(sm.variance > 0.0)) {
        throw degenerate_variance_error("estimate_class_a: zero variance");
    }
    const double excess = sm.excess_kurtosis;
    if (!(excess > 0.0)) {
        throw model_mismatch_error("estimate_class_a: sample is not leptokurtic");
    }
    double m6 = 0.0;
    for (double x : samples) {
        const double d = x - sm.mean;
        const double d3 = d * d * d;
        m6 += d3 * d3;
    }
    m6 /= static_cast<double>(samples.size());
    const double r6 = m6 / (sm.variance * sm.variance * sm.variance);

    // Given A, the kurtosis relation fixes Gamma'; the 6th-moment relation
    // then selects A. g(A) is strictly decreasing, so bisection suffices.
    const auto gamma_of = [&](double a_idx) { return std::sqrt(3.0 / (a_idx * excess)) - 1.0; };
    const auto residual = [&](double a_idx) {
        const double gp = gamma_of(a_idx);
        const double one_gp = 1.0 + gp;
        return 15.0 * (1.0 + excess + 1.0 / (a_idx * a_idx * one_gp * one_gp * one_gp)) - r6;
    };

    double lo = 1e-3;
    double hi = std::min(20.0, (3.0 / excess) * (1.0 - 1e-9));
    bool clamped = false;
    double a_hat;
    if (hi <= lo) {
        a_hat = lo;
        clamped = true;
    } else {
        double f_lo = residual(lo);
        const double f_hi = residual(hi);
        if (f_lo <= 0.0) {
            a_hat = lo;
            clamped = true;
        } else if (f_hi >= 0.0) {
            a_hat = hi;
            clamped = true;
        } else {
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double f_mid = residual(mid);
                if (f_lo * f_mid <= 0.0) {
                    hi = mid;
                } else {
                    lo = mid;
                    f_lo = f_mid;
                }
            }
            a_hat = 0.5 * (lo + hi);
        }
    }
    double gamma_prime = gamma_of(a_hat);
    if (!(gamma_prime > 0.0)) {
        gamma_prime = 1e-6;
        clamped = true;
    }
    const auto truncation = static_cast<unsigned>(
        std::max(10.0, std::ceil(a_hat + 10.0 * std::sqrt(a_hat) + 10.0)));
    return {ClassAParams(a_hat, gamma_prime, sm.variance, truncation), clamped};
}

std::vector<double> sample_stable(const StableParams& p, std::size_t n, RngStream& rng) {
    std::vector<double> out(n);
    const double alpha = p.alpha();
    const double beta = p.beta();
    const double sigma = p.sigma();
    const double mu = p.mu();

    if (alpha == 1.0) {
        const double hp = kPi / 2.0;
        const double shift = (2.0 / kPi) * beta * sigma * (sigma > 0.0 ? std::log(sigma) : 0.0);
        for (double& x : out) {
            const double v = kPi * (rng.uniform() - 0.5);
            const double w = rng.exponential(1.0);
            const double z = (2.0 / kPi) * ((hp + beta * v) * std::tan(v) -
                                            beta * std::log((hp * w * std::cos(v)) /
                                                            (hp + beta * v)));
            x = sigma * z + shift + mu;
        }
        return out;
    }

    const double eta = std::tan(kPi * alpha / 2.0);
    const double b0 = std::atan(beta * eta) / alpha;
    const double s0 = std::pow(1.0 + beta * beta * eta * eta, 1.0 / (2.0 * alpha));
    const double expo = (1.0 - alpha) / alpha;
    for (double& x : out) {
        const double v = kPi * (rng.uniform() - 0.5);
        const double w = rng.exponential(1.0);
        const double z = s0 * std::sin(alpha * (v + b0)) /
                         std::pow(std::cos(v), 1.0 / alpha) *
                         std::pow(std::cos(v - alpha * (v + b0)) / w, expo);
        x = sigma * z + mu;
    }
    return out;
}

FitReport compare_fits(const Trace& trace, std::size_t bins, std::size_t tail_points) {
    if (trace.samples.size() < 100000) {
        throw insufficient_data_error("compare_fits: need at least 1e5 samples");
    }
    if (tail_points < 2) {
        throw std::invalid_argument("compare_fits: need at least two tail grid points");
    }

    const StableFit stable = estimate_stable(trace.samples);
    const ClassAFit class_a = estimate_class_a(trace.samples);

    const Histogram hist = empirical_pdf(trace, bins);
    const GriddedFunction p = hist.to_gridded();
    const double width = hist.bin_width();

    // Model densities enter the KL as bin averages so a sharp empirical
    // core is compared against the same bin mass, not a point value.
    GriddedFunction q_stable{hist.centers, {}};
    GriddedFunction q_class_a{hist.centers, {}};
    q_stable.values.reserve(bins);
    q_class_a.values.reserve(bins);
    double stable_cdf_left = stable_cdf(hist.edges.front(), stable.params);
    double class_a_cdf_left = class_a_cdf(hist.edges.front(), class_a.params);
    for (std::size_t i = 1; i <= bins; ++i) {
        const double stable_cdf_right = stable_cdf(hist.edges[i], stable.params);
        const double class_a_cdf_right = class_a_cdf(hist.edges[i], class_a.params);
        q_stable.values.push_back(std::max(stable_cdf_right - stable_cdf_left, 0.0) / width);
        q_class_a.values.push_back(std::max(class_a_cdf_right - class_a_cdf_left, 0.0) / width);
        stable_cdf_left = stable_cdf_right;
        class_a_cdf_left = class_a_cdf_right;
    }

    // Tail grid: log-spaced from the median absolute amplitude to the max.
    const EmpiricalCcdf ecdf(trace);
    std::vector<double> abs_sorted(trace.samples.size());
    std::transform(trace.samples.begin(), trace.samples.end(), abs_sorted.begin(),
                   [](double v) { return std::abs(v); });
    std::sort(abs_sorted.begin(), abs_sorted.end());
    const double tail_lo = std::max(quantile_sorted(abs_sorted, 0.5), 1e-300);
    const double tail_hi = std::max(abs_sorted.back(), tail_lo * (1.0 + 1e-9));
    std::vector<double> tail_grid(tail_points);
    const double log_lo = std::log(tail_lo);
    const double log_step = (std::log(tail_hi) - log_lo) / static_cast<double>(tail_points - 1);
    for (std::size_t i = 0; i < tail_points; ++i) {
        tail_grid[i] = std::exp(log_lo + log_step * static_cast<double>(i));
    }
    const GriddedFunction tail_emp = ecdf.on_grid(tail_grid);
    GriddedFunction tail_stable{tail_grid, {}};
    GriddedFunction tail_class_a{tail_grid, {}};
    tail_stable.values.reserve(tail_points);
    tail_class_a.values.reserve(tail_points);
    for (double x : tail_grid) {
        tail_stable.values.push_back(stable_ccdf(x, stable.params));
        tail_class_a.values.push_back(1.0 - class_a_cdf(x, class_a.params));
    }

    FitReport report{stable,
                     kl_divergence(p, q_stable),
                     mse_tail(tail_emp, tail_stable),
                     class_a,
                     kl_divergence(p, q_class_a),
                     mse_tail(tail_emp, tail_class_a),
                     trace.samples.size(),
                     bins,
                     tail_points,
                     tail_lo,
                     tail_hi};
    return report;
}

}  // namespace tinsim
