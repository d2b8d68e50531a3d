#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tinsim/rng.hpp"
#include "tinsim/trace.hpp"
#include "tinsim/waveform.hpp"

namespace tinsim {

/// Configuration of the Poisson field of impulse sources over Gaussian
/// background. The effective arrival rate is lambda_r * lambda_t impulses
/// per trace, i.e. lambda_r * lambda_t / trace_length per sample.
struct FieldConfig {
    double lambda_r;       // mean active sources per unit volume
    double lambda_t;       // mean emissions per source per unit time
    double mean_energy;    // mean impulse energy <|U|^2>
    double gamma_ratio;    // background-to-shot variance ratio, in (0, 1)
    std::size_t trace_length;
    ImpulseConfig impulse;
    std::uint64_t seed;
    double sample_rate = 1.0;

    double arrivals_per_sample() const {
        return lambda_r * lambda_t / static_cast<double>(trace_length);
    }

    /// Throws std::invalid_argument on any violated invariant.
    void validate() const;
};

/// Homogeneous Poisson arrivals on [0, horizon), sample-aligned, sorted.
/// Built from exponential inter-arrival gaps so that extending the horizon
/// only appends arrivals (prefix stability).
std::vector<std::int64_t> sample_arrivals(double lambda_per_sample, std::size_t horizon,
                                          RngStream& rng);

/// An impulse scheduled at a sample offset. The ordinal selects the
/// impulse's private random substream, derived from (config seed, ordinal).
struct ScheduledImpulse {
    std::int64_t at;
    std::uint64_t ordinal;
};

/// Renders the given impulses into a trace of cfg.trace_length. Each
/// impulse draws, from its own substream: an Exponential(mean_energy)
/// energy, a fair sign, then its AR(2) innovations; it is scaled so its
/// full-length energy equals the drawn value, then added at its offset
/// (tail truncated at the trace end). Rendering order is ordinal order.
Trace render_shot(const FieldConfig& cfg, std::span<const ScheduledImpulse> impulses);

/// The shot-noise component I_t: Poisson arrivals + rendered impulses.
Trace simulate_shot_noise(const FieldConfig& cfg);

/// Adds iid zero-mean Gaussian background with variance
/// gamma_ratio * Var(shot), the variance taken over the realized trace.
/// Throws degenerate_variance_error when the shot trace has zero variance.
Trace add_background(const Trace& shot, double gamma_ratio, RngStream& rng);

/// Full non-Gaussian trace X_t = I_t + n_t, deterministic per cfg.seed.
Trace simulate(const FieldConfig& cfg);

/// Independent traces with seeds derived from (cfg.seed, trace index).
std::vector<Trace> simulate_ensemble(const FieldConfig& cfg, std::size_t count);

}  // namespace tinsim
