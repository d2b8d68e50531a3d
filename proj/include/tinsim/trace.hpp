#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace tinsim {

/// Uniformly sampled real-valued sequence.
///
/// Time is a dimensionless sample index throughout the library; sample_rate
/// is carried for display only and never enters a formula.
struct Trace {
    std::vector<double> samples;
    double sample_rate = 1.0;
    std::optional<std::uint64_t> seed;  // absent for ingested traces

    std::size_t size() const { return samples.size(); }
};

}  // namespace tinsim
