#include "tinsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_gamma.h>

#include "tinsim/errors.hpp"

namespace tinsim {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kKlFloor = 1e-12;
constexpr double kStablePdfAbsTol = 1e-8;
constexpr double kStableCdfAbsTol = 1e-10;

// GSL reports through return codes here, not the abort handler.
const auto kGslHandlerOff = [] {
    gsl_set_error_handler_off();
    return 0;
}();

// Exact for the small orders used here: every partial product below is an
// integer representable in a double.
double binom(unsigned n, unsigned k) {
    if (k > n) {
        return 0.0;
    }
    k = std::min(k, n - k);
    double r = 1.0;
    for (unsigned i = 1; i <= k; ++i) {
        r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    }
    return r;
}

struct QuadSpec {
    double (*f)(double, void*);
    void* params;
    double a;
    double b;
    double epsabs;
    double epsrel;
};

double integrate_qag(const QuadSpec& q, const char* what) {
    gsl_integration_workspace* ws = gsl_integration_workspace_alloc(8192);
    gsl_function gf{q.f, q.params};
    double result = 0.0;
    double abserr = 0.0;
    const int status = gsl_integration_qag(&gf, q.a, q.b, q.epsabs, q.epsrel, 8192,
                                           GSL_INTEG_GAUSS61, ws, &result, &abserr);
    gsl_integration_workspace_free(ws);
    if (status != 0 && abserr > 10.0 * q.epsabs) {
        throw numerical_error(std::string(what) + ": quadrature failed (status " +
                              std::to_string(status) + ", abserr " + std::to_string(abserr) +
                              ")");
    }
    return result;
}

struct StableIntegrandParams {
    double alpha;
    double beta;
    double sigma;
    double shift;  // mu - x
};

// Re[phi(xi) e^{-j xi x}] for xi > 0.
double stable_pdf_integrand(double xi, void* raw) {
    const auto* p = static_cast<const StableIntegrandParams*>(raw);
    const double s = std::pow(p->sigma * xi, p->alpha);
    double phase = xi * p->shift;
    if (p->alpha == 1.0) {
        phase -= p->beta * (2.0 / kPi) * p->sigma * xi * std::log(xi);
    } else {
        phase += p->beta * std::tan(kPi * p->alpha / 2.0) * s;
    }
    return std::exp(-s) * std::cos(phase);
}

// Im[phi(xi) e^{-j xi x}] / xi for xi > 0 (Gil-Pelaez kernel).
double stable_cdf_integrand(double xi, void* raw) {
    const auto* p = static_cast<const StableIntegrandParams*>(raw);
    const double s = std::pow(p->sigma * xi, p->alpha);
    double phase = xi * p->shift;
    if (p->alpha == 1.0) {
        phase -= p->beta * (2.0 / kPi) * p->sigma * xi * std::log(xi);
    } else {
        phase += p->beta * std::tan(kPi * p->alpha / 2.0) * s;
    }
    return std::exp(-s) * std::sin(phase) / xi;
}

double stable_cutoff(const StableParams& p) {
    // Envelope exp(-(sigma xi)^alpha) is below 4e-18 past this point.
    return std::pow(40.0, 1.0 / p.alpha()) / p.sigma();
}

void require_same_grid(const GriddedFunction& p, const GriddedFunction& q, const char* what) {
    if (p.grid.size() != q.grid.size() || p.grid.size() != p.values.size() ||
        q.grid.size() != q.values.size()) {
        throw std::invalid_argument(std::string(what) + ": grid size mismatch");
    }
    if (p.grid.size() < 2) {
        throw std::invalid_argument(std::string(what) + ": grid too short");
    }
    const double span = std::abs(p.grid.back() - p.grid.front());
    for (std::size_t i = 0; i < p.grid.size(); ++i) {
        if (std::abs(p.grid[i] - q.grid[i]) > 1e-9 * std::max(1.0, span)) {
            throw std::invalid_argument(std::string(what) + ": grids differ at index " +
                                        std::to_string(i));
        }
    }
}

}  // namespace

void ShotParams::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("ShotParams: lambda must be finite and >= 0");
    }
    if (!(fall_a > 0.0) || !(rise_b > fall_a)) {
        throw std::invalid_argument("ShotParams: require 0 < fall_a < rise_b");
    }
    if (!(sigma_n_sq >= 0.0)) {
        throw std::invalid_argument("ShotParams: sigma_n_sq must be >= 0");
    }
    if (k_moments.size() >= 2) {
        const double k1 = k_moments[0];
        const double k2 = k_moments[1];
        if (k2 < 0.0 || k2 < k1 * k1) {
            throw std::invalid_argument("ShotParams: <K^2> must be >= <K>^2 >= 0");
        }
    }
    for (std::size_t m = 2; m <= k_moments.size(); m += 2) {
        if (k_moments[m - 1] < 0.0) {
            throw std::invalid_argument("ShotParams: even moments of K must be >= 0");
        }
    }
}

double log_waveform_moment_integral(double fall_a, double rise_b, unsigned m) {
    if (m == 0) {
        throw std::invalid_argument("waveform_moment_integral: m must be >= 1");
    }
    const double d = rise_b - fall_a;
    const double x = fall_a * static_cast<double>(m) / d;
    const double y = static_cast<double>(m) + 1.0;
    // log Beta(x, y) - log d
    return gsl_sf_lngamma(x) + gsl_sf_lngamma(y) - gsl_sf_lngamma(x + y) - std::log(d);
}

double waveform_moment_integral(double fall_a, double rise_b, unsigned m) {
    return std::exp(log_waveform_moment_integral(fall_a, rise_b, m));
}

double cumulant(unsigned m, const ShotParams& p) {
    p.validate();
    if (m == 0) {
        throw std::invalid_argument("cumulant: order must be >= 1");
    }
    if (m > p.k_moments.size()) {
        throw std::invalid_argument("cumulant: order exceeds supplied k_moments");
    }
    double value = 0.0;
    if (p.lambda > 0.0) {
        value = p.lambda * p.k_moments[m - 1] * waveform_moment_integral(p.fall_a, p.rise_b, m);
    }
    if (m == 2) {
        value += p.sigma_n_sq;
    }
    return value;
}

CumulantSet cumulants(const ShotParams& p, unsigned m_max) {
    CumulantSet c;
    c.kappa.reserve(m_max);
    for (unsigned m = 1; m <= m_max; ++m) {
        c.kappa.push_back(cumulant(m, p));
    }
    return c;
}

std::pair<double, double> skewness_kurtosis(const CumulantSet& c) {
    if (c.order() < 4) {
        throw std::invalid_argument("skewness_kurtosis: need cumulants through order 4");
    }
    const double k2 = c[2];
    if (!(k2 > 0.0)) {
        throw degenerate_variance_error("skewness_kurtosis: kappa_2 must be positive");
    }
    return {c[3] / std::pow(k2, 1.5), c[4] / (k2 * k2)};
}

std::vector<double> moments_from_cumulants(const CumulantSet& c) {
    const std::size_t m_max = c.order();
    std::vector<double> mu(m_max + 1, 0.0);
    mu[0] = 1.0;
    for (std::size_t m = 1; m <= m_max; ++m) {
        double acc = 0.0;
        for (std::size_t i = 1; i <= m; ++i) {
            acc += binom(static_cast<unsigned>(m - 1), static_cast<unsigned>(i - 1)) *
                   c.kappa[i - 1] * mu[m - i];
        }
        mu[m] = acc;
    }
    return {mu.begin() + 1, mu.end()};
}

CumulantSet cumulants_from_moments(std::span<const double> moments) {
    const std::size_t m_max = moments.size();
    std::vector<double> mu(m_max + 1, 0.0);
    mu[0] = 1.0;
    std::copy(moments.begin(), moments.end(), mu.begin() + 1);
    CumulantSet c;
    c.kappa.assign(m_max, 0.0);
    for (std::size_t m = 1; m <= m_max; ++m) {
        double acc = 0.0;
        for (std::size_t i = 1; i < m; ++i) {
            acc += binom(static_cast<unsigned>(m - 1), static_cast<unsigned>(i - 1)) *
                   c.kappa[i - 1] * mu[m - i];
        }
        c.kappa[m - 1] = mu[m] - acc;
    }
    return c;
}

namespace {

// Probabilists' Hermite polynomials appearing in the expansion.
double hermite3(double v) { return v * (v * v - 3.0); }
double hermite4(double v) {
    const double v2 = v * v;
    return v2 * v2 - 6.0 * v2 + 3.0;
}
double hermite6(double v) {
    const double v2 = v * v;
    return ((v2 - 15.0) * v2 + 45.0) * v2 - 15.0;
}

double edgeworth_raw(double x, const CumulantSet& c, int order) {
    if (order < 1 || order > 3) {
        throw std::invalid_argument("edgeworth_pdf: order must be 1, 2 or 3");
    }
    if (c.order() < (order >= 3 ? 4u : (order == 2 ? 3u : 2u))) {
        throw std::invalid_argument("edgeworth_pdf: not enough cumulants for this order");
    }
    const double k1 = c[1];
    const double k2 = c[2];
    if (!(k2 > 0.0)) {
        throw degenerate_variance_error("edgeworth_pdf: kappa_2 must be positive");
    }
    const double sigma = std::sqrt(k2);
    const double nu = (x - k1) / sigma;

    double bracket = 1.0;
    if (order >= 2) {
        const double k3 = c[3];
        bracket += k3 / (6.0 * k2 * sigma) * hermite3(nu);
    }
    if (order >= 3) {
        const double k3 = c[3];
        const double k4 = c[4];
        bracket += k4 / (24.0 * k2 * k2) * hermite4(nu);
        bracket += k3 * k3 / (72.0 * k2 * k2 * k2) * hermite6(nu);
    }
    // order 1 must coincide with the gaussian term exactly
    return normal_pdf(x, k1, k2) * bracket;
}

}  // namespace

double edgeworth_pdf(double x, const CumulantSet& c, int order) {
    return std::max(edgeworth_raw(x, c, order), 0.0);
}

EdgeworthGrid edgeworth_pdf_grid(std::span<const double> grid, const CumulantSet& c, int order) {
    if (grid.size() < 2) {
        throw std::invalid_argument("edgeworth_pdf_grid: need at least two grid points");
    }
    EdgeworthGrid out;
    out.grid.assign(grid.begin(), grid.end());
    out.raw.reserve(grid.size());
    for (double x : grid) {
        out.raw.push_back(edgeworth_raw(x, c, order));
    }
    out.density.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out.density[i] = std::max(out.raw[i], 0.0);
    }
    // Trapezoid renormalization over the grid.
    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        integral += 0.5 * (out.density[i] + out.density[i + 1]) * (grid[i + 1] - grid[i]);
    }
    if (integral > 0.0) {
        for (double& v : out.density) {
            v /= integral;
        }
    }
    return out;
}

ClassAParams::ClassAParams(double overlap_a, double gamma_prime, double sigma_sq,
                           unsigned truncation_m)
    : overlap_a_(overlap_a),
      gamma_prime_(gamma_prime),
      sigma_sq_(sigma_sq),
      truncation_m_(truncation_m) {
    if (!(overlap_a > 0.0) || !(gamma_prime > 0.0) || !(sigma_sq > 0.0)) {
        throw std::invalid_argument("ClassAParams: A, Gamma' and sigma_sq must be positive");
    }
    if (truncation_m < 10) {
        throw std::invalid_argument("ClassAParams: truncation_m must be >= 10");
    }
    weights_.resize(truncation_m + 1);
    double sum = 0.0;
    for (unsigned m = 0; m <= truncation_m; ++m) {
        const double lw = -overlap_a + m * std::log(overlap_a) - gsl_sf_lngamma(m + 1.0);
        weights_[m] = std::exp(lw);
        sum += weights_[m];
    }
    if (sum < 1.0 - 1e-6) {
        throw std::invalid_argument(
            "ClassAParams: truncation too small, Poisson weights sum to " + std::to_string(sum));
    }
    for (double& w : weights_) {
        w /= sum;
    }
}

double ClassAParams::component_variance(unsigned m) const {
    return sigma_sq_ * (static_cast<double>(m) / overlap_a_ + gamma_prime_) /
           (1.0 + gamma_prime_);
}

double class_a_pdf(double x, const ClassAParams& p) {
    double acc = 0.0;
    for (unsigned m = 0; m <= p.truncation_m(); ++m) {
        acc += p.weights()[m] * normal_pdf(x, 0.0, p.component_variance(m));
    }
    return acc;
}

double class_a_cdf(double x, const ClassAParams& p) {
    double acc = 0.0;
    for (unsigned m = 0; m <= p.truncation_m(); ++m) {
        acc += p.weights()[m] * normal_cdf(x, 0.0, p.component_variance(m));
    }
    return acc;
}

StableParams::StableParams(double alpha, double beta, double sigma, double mu)
    : alpha_(alpha), beta_(beta), sigma_(sigma), mu_(mu) {
    if (!(alpha > 0.0 && alpha <= 2.0)) {
        throw std::invalid_argument("StableParams: alpha must lie in (0, 2]");
    }
    if (!(beta >= -1.0 && beta <= 1.0)) {
        throw std::invalid_argument("StableParams: beta must lie in [-1, 1]");
    }
    if (!(sigma >= 0.0) || !std::isfinite(mu)) {
        throw std::invalid_argument("StableParams: require sigma >= 0 and finite mu");
    }
}

std::complex<double> stable_cf(double xi, const StableParams& p) {
    if (xi == 0.0) {
        return {1.0, 0.0};
    }
    const double s = std::pow(std::abs(p.sigma() * xi), p.alpha());
    double imag = xi * p.mu();
    if (p.alpha() == 1.0) {
        // Logarithmic branch; the 2/pi factor keeps the family closed under
        // the scaling used by the sampler.
        imag -= p.beta() * (2.0 / kPi) * p.sigma() * xi * std::log(std::abs(xi));
    } else {
        const double eta = std::tan(kPi * p.alpha() / 2.0);
        imag += p.beta() * eta * s * (xi > 0.0 ? 1.0 : -1.0);
    }
    return std::exp(std::complex<double>(-s, imag));
}

double stable_pdf(double x, const StableParams& p) {
    if (!(p.sigma() > 0.0)) {
        throw std::invalid_argument("stable_pdf: sigma must be positive");
    }
    StableIntegrandParams ip{p.alpha(), p.beta(), p.sigma(), p.mu() - x};
    const double value = integrate_qag(
        {&stable_pdf_integrand, &ip, 0.0, stable_cutoff(p), kStablePdfAbsTol, 1e-10},
        "stable_pdf");
    const double pdf = value / kPi;
    if (pdf < -1e-8) {
        throw numerical_error("stable_pdf: inversion produced a significantly negative value");
    }
    return std::max(pdf, 0.0);
}

double stable_cdf(double x, const StableParams& p) {
    if (!(p.sigma() > 0.0)) {
        throw std::invalid_argument("stable_cdf: sigma must be positive");
    }
    StableIntegrandParams ip{p.alpha(), p.beta(), p.sigma(), p.mu() - x};
    const double value = integrate_qag(
        {&stable_cdf_integrand, &ip, 0.0, stable_cutoff(p), kStableCdfAbsTol, 1e-9},
        "stable_cdf");
    return std::clamp(0.5 - value / kPi, 0.0, 1.0);
}

double stable_ccdf(double x, const StableParams& p) {
    if (!(p.sigma() > 0.0)) {
        throw std::invalid_argument("stable_ccdf: sigma must be positive");
    }
    StableIntegrandParams ip{p.alpha(), p.beta(), p.sigma(), p.mu() - x};
    const double value = integrate_qag(
        {&stable_cdf_integrand, &ip, 0.0, stable_cutoff(p), kStableCdfAbsTol, 1e-9},
        "stable_ccdf");
    return std::clamp(0.5 + value / kPi, 0.0, 1.0);
}

Histogram empirical_pdf(const Trace& trace, std::size_t bins) {
    if (trace.samples.size() < 1000) {
        throw std::invalid_argument("empirical_pdf: need at least 1000 samples");
    }
    if (bins < 16) {
        throw std::invalid_argument("empirical_pdf: need at least 16 bins");
    }
    const auto [mn_it, mx_it] = std::minmax_element(trace.samples.begin(), trace.samples.end());
    double lo = *mn_it;
    double hi = *mx_it;
    if (!(hi > lo)) {
        lo -= 0.5;  // constant trace: unit-width window around the value
        hi += 0.5;
    }
    Histogram h;
    h.edges.resize(bins + 1);
    h.centers.resize(bins);
    h.density.assign(bins, 0.0);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t i = 0; i <= bins; ++i) {
        h.edges[i] = lo + width * static_cast<double>(i);
    }
    for (std::size_t i = 0; i < bins; ++i) {
        h.centers[i] = lo + width * (static_cast<double>(i) + 0.5);
    }
    for (double x : trace.samples) {
        auto idx = static_cast<std::size_t>((x - lo) / width);
        if (idx >= bins) {
            idx = bins - 1;  // top edge inclusive
        }
        h.density[idx] += 1.0;
    }
    const double norm = static_cast<double>(trace.samples.size()) * width;
    for (double& d : h.density) {
        d /= norm;
    }
    return h;
}

EmpiricalCcdf::EmpiricalCcdf(const Trace& trace) : sorted_(trace.samples) {
    if (sorted_.empty()) {
        throw std::invalid_argument("EmpiricalCcdf: empty trace");
    }
    std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCcdf::operator()(double x) const {
    const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
    return static_cast<double>(sorted_.end() - it) / static_cast<double>(sorted_.size());
}

GriddedFunction EmpiricalCcdf::on_grid(std::span<const double> grid) const {
    GriddedFunction out;
    out.grid.assign(grid.begin(), grid.end());
    out.values.reserve(grid.size());
    for (double x : grid) {
        out.values.push_back((*this)(x));
    }
    return out;
}

double kl_divergence(const GriddedFunction& p, const GriddedFunction& q) {
    require_same_grid(p, q, "kl_divergence");
    const double dx = (p.grid.back() - p.grid.front()) / static_cast<double>(p.grid.size() - 1);
    double acc = 0.0;
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        const double pi = p.values[i];
        if (pi <= kKlFloor) {
            continue;  // below the floor both densities count as empty
        }
        const double qi = std::max(q.values[i], kKlFloor);
        acc += pi * std::log(pi / qi);
    }
    return acc * dx;
}

double mse_tail(const GriddedFunction& empirical, const GriddedFunction& model) {
    require_same_grid(empirical, model, "mse_tail");
    double acc = 0.0;
    for (std::size_t i = 0; i < empirical.values.size(); ++i) {
        const double d = empirical.values[i] - model.values[i];
        acc += d * d;
    }
    return acc / static_cast<double>(empirical.values.size());
}

ConvergenceDiagnostics cumulant_convergence_diagnostics(const ShotParams& p, unsigned m_max) {
    p.validate();
    if (!(p.lambda > 0.0)) {
        throw std::invalid_argument("cumulant_convergence_diagnostics: lambda must be positive");
    }
    if (m_max < 2 || m_max > p.k_moments.size()) {
        throw std::invalid_argument(
            "cumulant_convergence_diagnostics: m_max must lie in [2, k_moments]");
    }
    for (unsigned m = 1; m <= m_max; ++m) {
        if (p.k_moments[m - 1] == 0.0) {
            throw std::invalid_argument(
                "cumulant_convergence_diagnostics: requires nonzero <K^m> up to m_max");
        }
    }

    ConvergenceDiagnostics d;

    // Ratio of consecutive binomial-sum terms inside kappa_{m_max}; the
    // <K^m> factor is common to every term and cancels.
    const double a = p.fall_a;
    const double diff = p.rise_b - p.fall_a;
    const double md = static_cast<double>(m_max);
    d.term_ratio.reserve(m_max);
    for (unsigned k = 0; k < m_max; ++k) {
        const double kd = static_cast<double>(k);
        const double ratio = (md - kd) / (kd + 1.0) *
                             ((a * md + diff * kd) / (a * md + diff * (kd + 1.0)));
        d.term_ratio.push_back(std::abs(ratio));
    }

    // log |kappa_m| without forming kappa_m; only m = 2 mixes in the
    // background term, handled by log-sum-exp.
    const double log_lambda = std::log(p.lambda);
    std::vector<double> log_abs(m_max + 1, 0.0);
    for (unsigned m = 1; m <= m_max; ++m) {
        double la = log_lambda + std::log(std::abs(p.k_moments[m - 1])) +
                    log_waveform_moment_integral(p.fall_a, p.rise_b, m);
        if (m == 2 && p.sigma_n_sq > 0.0) {
            // kappa_2 contributions are both positive.
            const double lb = std::log(p.sigma_n_sq);
            const double hi = std::max(la, lb);
            la = hi + std::log1p(std::exp(std::min(la, lb) - hi));
        }
        log_abs[m] = la;
    }
    d.log_abs_kappa.assign(log_abs.begin() + 1, log_abs.end());

    d.cumulant_ratio.reserve(m_max - 1);
    for (unsigned m = 1; m + 1 <= m_max; ++m) {
        d.cumulant_ratio.push_back(
            std::exp(log_abs[m + 1] - log_abs[m] - std::log(static_cast<double>(m + 1))));
    }

    d.log_kappa_over_factorial.reserve(m_max);
    for (unsigned m = 1; m <= m_max; ++m) {
        d.log_kappa_over_factorial.push_back(log_abs[m] - gsl_sf_lngamma(m + 1.0));
    }
    return d;
}

SampleMoments sample_moments(std::span<const double> samples) {
    if (samples.empty()) {
        throw std::invalid_argument("sample_moments: empty sample");
    }
    SampleMoments sm;
    sm.count = samples.size();
    const double n = static_cast<double>(samples.size());
    double mean = 0.0;
    sm.min = samples[0];
    sm.max = samples[0];
    for (double x : samples) {
        mean += x;
        sm.min = std::min(sm.min, x);
        sm.max = std::max(sm.max, x);
    }
    mean /= n;
    double c2 = 0.0;
    double c3 = 0.0;
    double c4 = 0.0;
    for (double x : samples) {
        const double d = x - mean;
        const double d2 = d * d;
        c2 += d2;
        c3 += d2 * d;
        c4 += d2 * d2;
    }
    c2 /= n;
    c3 /= n;
    c4 /= n;
    sm.mean = mean;
    sm.variance = c2;
    sm.central3 = c3;
    sm.central4 = c4;
    if (c2 > 0.0) {
        sm.skewness = c3 / std::pow(c2, 1.5);
        sm.excess_kurtosis = c4 / (c2 * c2) - 3.0;
    }
    return sm;
}

double normal_pdf(double x, double mean, double variance) {
    const double d = x - mean;
    return std::exp(-0.5 * d * d / variance) / std::sqrt(2.0 * kPi * variance);
}

double normal_cdf(double x, double mean, double variance) {
    return 0.5 * std::erfc(-(x - mean) / std::sqrt(2.0 * variance));
}

}  // namespace tinsim
