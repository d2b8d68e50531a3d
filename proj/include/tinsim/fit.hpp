#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tinsim/rng.hpp"
#include "tinsim/stats.hpp"
#include "tinsim/trace.hpp"

namespace tinsim {

struct StableFit {
    StableParams params;
    // True when a regression estimate left the parameter domain and was
    // clamped to the boundary.
    bool clamped = false;
};

/// Regression-type estimator on the empirical characteristic function:
/// log(-log |cf|^2) against log xi gives (alpha, sigma); the phase gives
/// (beta, mu). Samples are standardized by a quantile scale first; the
/// xi grids are the fixed constants xi_k = pi k/25 (k = 1..10) for the
/// modulus and pi l/50 (l = 1..10) for the phase.
/// Throws insufficient_data_error below 100 samples.
StableFit estimate_stable(std::span<const double> samples);

struct ClassAFit {
    ClassAParams params;
    bool clamped = false;
};

/// Method of moments for the canonical Class A mixture: sigma^2 from the
/// sample variance, then (A, Gamma') from the 4th/6th standardized moment
/// relations by bisection on A in [1e-3, 20].
/// Throws insufficient_data_error below 1e4 samples and
/// model_mismatch_error when the sample is not leptokurtic.
ClassAFit estimate_class_a(std::span<const double> samples);

/// Chambers-Mallows-Stuck sampler for the stable family; alpha = 2
/// reduces to Gaussian, alpha = 1 takes its logarithmic branch.
std::vector<double> sample_stable(const StableParams& p, std::size_t n, RngStream& rng);

struct FitReport {
    StableFit stable;
    double stable_kl = 0.0;
    double stable_tail_mse = 0.0;
    ClassAFit class_a;
    double class_a_kl = 0.0;
    double class_a_tail_mse = 0.0;
    std::size_t sample_count = 0;
    std::size_t bins = 0;
    std::size_t tail_points = 0;
    double tail_lo = 0.0;
    double tail_hi = 0.0;
};

/// Fits both families and scores each against the empirical density (KL
/// on the histogram grid, model mass bin-averaged) and the empirical tail
/// (mean squared ccdf error on a log-spaced grid from the median absolute
/// amplitude to the maximum). Deterministic given the trace and grids.
FitReport compare_fits(const Trace& trace, std::size_t bins, std::size_t tail_points = 200);

}  // namespace tinsim
