#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "tinsim/trace.hpp"

namespace tinsim {

/// Parameters of the analytic shot-noise description: Poisson rate per
/// sample, double-exponential pulse rates, amplitude-factor moments
/// <K^m> for m = 1..M, and the background Gaussian variance.
struct ShotParams {
    double lambda;                  // >= 0 (0 means pure background)
    double fall_a;                  // decay rate per sample, > 0
    double rise_b;                  // rise rate per sample, > fall_a
    std::vector<double> k_moments;  // k_moments[m-1] = <K^m>
    double sigma_n_sq = 0.0;        // background variance, >= 0

    void validate() const;
};

struct CumulantSet {
    std::vector<double> kappa;  // kappa[m-1] = kappa_m

    double operator[](std::size_t m) const { return kappa.at(m - 1); }
    std::size_t order() const { return kappa.size(); }
};

/// Integral of the unit double-exponential pulse raised to the m-th power,
/// int_0^inf (e^{-at} - e^{-bt})^m dt. Equals the alternating binomial sum
/// sum_k C(m,k)(-1)^k / (a(m-k) + bk); evaluated through the Beta function
/// so large m does not cancel catastrophically.
double waveform_moment_integral(double fall_a, double rise_b, unsigned m);
double log_waveform_moment_integral(double fall_a, double rise_b, unsigned m);

/// m-th cumulant of the shot process; the background adds sigma_n_sq to
/// kappa_2 only. Throws std::invalid_argument for m = 0 or m beyond the
/// supplied k_moments.
double cumulant(unsigned m, const ShotParams& p);

CumulantSet cumulants(const ShotParams& p, unsigned m_max);

/// (skewness, excess kurtosis) = (kappa3/kappa2^{3/2}, kappa4/kappa2^2).
std::pair<double, double> skewness_kurtosis(const CumulantSet& c);

/// Raw moments mu_1..mu_M from cumulants (Bell recursion).
std::vector<double> moments_from_cumulants(const CumulantSet& c);

/// Inverse of the above; moments[m-1] = mu_m.
CumulantSet cumulants_from_moments(std::span<const double> moments);

/// Edgeworth density around the Gaussian at nu = (x - kappa1)/sqrt(kappa2).
/// order 1: Gaussian term only; order 2 adds the kappa3 correction;
/// order 3 adds the kappa4 and kappa3^2 corrections. Pointwise values are
/// clamped at 0; use the grid variant for a renormalized density.
double edgeworth_pdf(double x, const CumulantSet& c, int order);

struct EdgeworthGrid {
    std::vector<double> grid;
    std::vector<double> density;  // clamped and renormalized on the grid
    std::vector<double> raw;      // unclamped series values, for diagnostics
};

EdgeworthGrid edgeworth_pdf_grid(std::span<const double> grid, const CumulantSet& c, int order);

/// Poisson-weighted Gaussian mixture with impulsive index A, power ratio
/// Gamma', total variance sigma_sq. Component variances follow the
/// canonical normalization sigma_m^2 = sigma^2 (m/A + Gamma')/(1 + Gamma').
class ClassAParams {
  public:
    ClassAParams(double overlap_a, double gamma_prime, double sigma_sq,
                 unsigned truncation_m = 64);

    double overlap_a() const { return overlap_a_; }
    double gamma_prime() const { return gamma_prime_; }
    double sigma_sq() const { return sigma_sq_; }
    unsigned truncation_m() const { return truncation_m_; }

    /// Truncated Poisson weights, renormalized to sum to 1.
    const std::vector<double>& weights() const { return weights_; }
    double component_variance(unsigned m) const;

  private:
    double overlap_a_;
    double gamma_prime_;
    double sigma_sq_;
    unsigned truncation_m_;
    std::vector<double> weights_;
};

double class_a_pdf(double x, const ClassAParams& p);
double class_a_cdf(double x, const ClassAParams& p);

/// Alpha-stable parameter set (characteristic exponent, skewness, scale,
/// location) in the parametrization whose characteristic function is
/// exp(j xi mu - |sigma xi|^alpha (1 - j beta sign(xi) tan(pi alpha/2)))
/// for alpha != 1, with the logarithmic branch at alpha = 1.
class StableParams {
  public:
    StableParams(double alpha, double beta, double sigma, double mu);

    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    double sigma() const { return sigma_; }
    double mu() const { return mu_; }

  private:
    double alpha_;
    double beta_;
    double sigma_;
    double mu_;
};

std::complex<double> stable_cf(double xi, const StableParams& p);

/// Density by Fourier inversion of the characteristic function, adaptive
/// quadrature to 1e-8 absolute. Throws numerical_error on non-convergence.
double stable_pdf(double x, const StableParams& p);

double stable_cdf(double x, const StableParams& p);
double stable_ccdf(double x, const StableParams& p);

/// (grid, values) pair; the exchange format for densities and ccdfs.
struct GriddedFunction {
    std::vector<double> grid;
    std::vector<double> values;
};

/// Histogram density: integrates to exactly 1 with bin-width weighting.
struct Histogram {
    std::vector<double> edges;    // bins + 1
    std::vector<double> centers;  // bins
    std::vector<double> density;  // bins

    double bin_width() const { return edges[1] - edges[0]; }
    GriddedFunction to_gridded() const { return {centers, density}; }
};

Histogram empirical_pdf(const Trace& trace, std::size_t bins);

/// Right-tail function P(X > x) of a sample, queryable at any x.
class EmpiricalCcdf {
  public:
    explicit EmpiricalCcdf(const Trace& trace);

    double operator()(double x) const;
    GriddedFunction on_grid(std::span<const double> grid) const;
    const std::vector<double>& sorted_samples() const { return sorted_; }

  private:
    std::vector<double> sorted_;
};

/// sum p_i ln(p_i / q_i) dx over a shared uniform grid, q floored at 1e-12.
double kl_divergence(const GriddedFunction& p, const GriddedFunction& q);

/// Mean squared difference between empirical and model ccdf on a shared grid.
double mse_tail(const GriddedFunction& empirical, const GriddedFunction& model);

/// Ratio-test diagnostics for the cumulant sequence, evaluated in log
/// space so no order up to m_max overflows.
struct ConvergenceDiagnostics {
    std::vector<double> term_ratio;      // |z_{k+1}/z_k| within kappa_{m_max}
    std::vector<double> cumulant_ratio;  // |kappa_{m+1} / ((m+1) kappa_m)|
    std::vector<double> log_abs_kappa;   // ln |kappa_m|
    std::vector<double> log_kappa_over_factorial;
};

ConvergenceDiagnostics cumulant_convergence_diagnostics(const ShotParams& p, unsigned m_max);

struct SampleMoments {
    std::size_t count = 0;
    double mean = 0.0;
    double variance = 0.0;  // population normalization
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    double central3 = 0.0;
    double central4 = 0.0;
    double min = 0.0;
    double max = 0.0;
};

SampleMoments sample_moments(std::span<const double> samples);

double normal_pdf(double x, double mean, double variance);
double normal_cdf(double x, double mean, double variance);

}  // namespace tinsim
