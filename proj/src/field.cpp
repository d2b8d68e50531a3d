#include "tinsim/field.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tinsim/errors.hpp"

namespace tinsim {

void FieldConfig::validate() const {
    if (!(lambda_r > 0.0) || !(lambda_t > 0.0)) {
        throw std::invalid_argument("FieldConfig: lambda_r and lambda_t must be positive");
    }
    if (!(mean_energy > 0.0)) {
        throw std::invalid_argument("FieldConfig: mean_energy must be positive");
    }
    if (!(gamma_ratio > 0.0 && gamma_ratio < 1.0)) {
        throw std::invalid_argument("FieldConfig: gamma_ratio must lie in (0, 1)");
    }
    if (impulse.length == 0) {
        throw std::invalid_argument("FieldConfig: impulse length must be positive");
    }
    if (trace_length < 10 * impulse.length) {
        throw std::invalid_argument(
            "FieldConfig: trace_length must be at least 10x the impulse length");
    }
}

std::vector<std::int64_t> sample_arrivals(double lambda_per_sample, std::size_t horizon,
                                          RngStream& rng) {
    if (!(lambda_per_sample > 0.0)) {
        throw std::invalid_argument("sample_arrivals: lambda must be positive");
    }
    std::vector<std::int64_t> arrivals;
    const double mean_gap = 1.0 / lambda_per_sample;
    double t = rng.exponential(mean_gap);
    while (t < static_cast<double>(horizon)) {
        arrivals.push_back(static_cast<std::int64_t>(t));
        t += rng.exponential(mean_gap);
    }
    return arrivals;
}

Trace render_shot(const FieldConfig& cfg, std::span<const ScheduledImpulse> impulses) {
    cfg.validate();
    Trace out;
    out.samples.assign(cfg.trace_length, 0.0);
    out.sample_rate = cfg.sample_rate;
    out.seed = cfg.seed;

    for (const auto& sched : impulses) {
        RngStream stream(derive_seed(cfg.seed, kPurposeImpulse, sched.ordinal));
        const double energy = stream.exponential(cfg.mean_energy);
        const double sign = stream.sign();
        const Trace impulse = generate_impulse(cfg.impulse, stream);

        const double raw_energy = std::inner_product(impulse.samples.begin(),
                                                     impulse.samples.end(),
                                                     impulse.samples.begin(), 0.0);
        if (raw_energy <= 0.0) {
            continue;  // all-zero impulse (e.g. theta0 = 0) carries nothing
        }
        const double scale = sign * std::sqrt(energy / raw_energy);

        const std::int64_t start = sched.at;
        const auto n = static_cast<std::int64_t>(cfg.trace_length);
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(impulse.samples.size()); ++i) {
            const std::int64_t pos = start + i;
            if (pos < 0) continue;
            if (pos >= n) break;
            out.samples[static_cast<std::size_t>(pos)] +=
                scale * impulse.samples[static_cast<std::size_t>(i)];
        }
    }
    return out;
}

Trace simulate_shot_noise(const FieldConfig& cfg) {
    cfg.validate();
    RngStream arrivals_rng(derive_seed(cfg.seed, kPurposeArrivals, 0));
    const auto arrivals = sample_arrivals(cfg.arrivals_per_sample(), cfg.trace_length,
                                          arrivals_rng);
    std::vector<ScheduledImpulse> sched;
    sched.reserve(arrivals.size());
    for (std::size_t j = 0; j < arrivals.size(); ++j) {
        sched.push_back({arrivals[j], j});
    }
    return render_shot(cfg, sched);
}

Trace add_background(const Trace& shot, double gamma_ratio, RngStream& rng) {
    if (shot.samples.empty()) {
        throw std::invalid_argument("add_background: empty shot trace");
    }
    if (!(gamma_ratio > 0.0 && gamma_ratio < 1.0)) {
        throw std::invalid_argument("add_background: gamma_ratio must lie in (0, 1)");
    }
    const double n = static_cast<double>(shot.samples.size());
    const double mean = std::accumulate(shot.samples.begin(), shot.samples.end(), 0.0) / n;
    double var = 0.0;
    for (double x : shot.samples) {
        var += (x - mean) * (x - mean);
    }
    var /= n;
    if (var <= 0.0) {
        throw degenerate_variance_error("add_background: shot trace has zero variance");
    }
    const double sigma_n = std::sqrt(gamma_ratio * var);

    Trace out = shot;
    for (double& x : out.samples) {
        x += sigma_n * rng.normal();
    }
    return out;
}

Trace simulate(const FieldConfig& cfg) {
    Trace shot = simulate_shot_noise(cfg);
    RngStream background_rng(derive_seed(cfg.seed, kPurposeBackground, 0));
    Trace x = add_background(shot, cfg.gamma_ratio, background_rng);
    x.seed = cfg.seed;
    return x;
}

std::vector<Trace> simulate_ensemble(const FieldConfig& cfg, std::size_t count) {
    std::vector<Trace> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        FieldConfig per_trace = cfg;
        per_trace.seed = derive_seed(cfg.seed, kPurposeTrace, i);
        out.push_back(simulate(per_trace));
    }
    return out;
}

}  // namespace tinsim
