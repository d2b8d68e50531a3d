#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tinsim/field.hpp"
#include "tinsim/spectral.hpp"
#include "tinsim/stats.hpp"
#include "tinsim/trace.hpp"

namespace tinsim {

/// Fixed shortest-round-trip formatting; identical inputs always produce
/// identical bytes.
std::string format_double(double v);

/// Ordered flat key = value document.
struct KeyValueDoc {
    std::vector<std::pair<std::string, std::string>> items;
    std::vector<std::string> comments;  // emitted first, one '#' line each

    void add(std::string key, std::string value);
    void add(std::string key, double value);
    void add(std::string key, std::uint64_t value);
};

void write_key_values(const std::filesystem::path& path, const KeyValueDoc& doc);

/// Trace CSV: header line "index,value", one row per sample.
void write_trace_csv(const std::filesystem::path& path, const Trace& trace);
Trace read_trace_csv(const std::filesystem::path& path);

/// PSD CSV: '#' comment lines carrying dc_impulse_mass (and any extra
/// notes), then "frequency,power" rows.
void write_psd_csv(const std::filesystem::path& path, const Psd& psd,
                   const std::vector<std::string>& notes = {});

/// Generic two-column CSV for densities and ccdfs.
void write_gridded_csv(const std::filesystem::path& path, std::string_view x_name,
                       std::string_view y_name, const GriddedFunction& g);

struct AnalysisOptions {
    std::size_t bins = 401;
    std::size_t segment = 4096;
    unsigned order = 2;
    std::size_t tail_points = 200;
};

/// Parsed run configuration: the field/impulse model plus analysis options.
///
/// The file format is line-oriented "key = value" with [field], [impulse]
/// and [analysis] sections (or equivalently dotted keys such as
/// field.lambda_r); '#' starts a comment. Parse errors carry the file name,
/// line number and field name.
struct RunConfig {
    FieldConfig field;
    AnalysisOptions analysis;

    static RunConfig parse_file(const std::filesystem::path& path);
    static RunConfig parse_string(std::string_view text, const std::string& diag_name);

    /// Dotted-key document that parses back to an equivalent RunConfig.
    KeyValueDoc to_metadata() const;
};

/// Equivalent analytic shot description of a simulation config: pulse
/// rates from the AR roots, amplitude moments from the exponential energy
/// law (odd moments vanish under the symmetric sign), background variance
/// from the ensemble shot power and the gamma ratio.
ShotParams equivalent_shot_params(const FieldConfig& cfg, unsigned m_max = 8);

}  // namespace tinsim
