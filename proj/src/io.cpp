#include "tinsim/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <gsl/gsl_sf_gamma.h>

#include "tinsim/errors.hpp"

namespace tinsim {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return "";
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

struct RawEntry {
    std::string value;
    int line;
};

using RawConfig = std::map<std::string, RawEntry>;

RawConfig read_raw(std::string_view text, const std::string& name) {
    RawConfig raw;
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        std::string_view line_view =
            text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
        ++line_no;

        std::string line = trim(line_view);
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line = trim(std::string_view(line).substr(0, hash));
        }
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw std::invalid_argument(name + ":" + std::to_string(line_no) +
                                            ": unterminated section header");
            }
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument(name + ":" + std::to_string(line_no) +
                                        ": expected 'key = value'");
        }
        std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw std::invalid_argument(name + ":" + std::to_string(line_no) +
                                        ": empty key or value");
        }
        if (key.find('.') == std::string::npos && !section.empty()) {
            key = section + "." + key;
        }
        raw[key] = {value, line_no};
    }
    return raw;
}

class ConfigReader {
  public:
    ConfigReader(RawConfig raw, std::string name) : raw_(std::move(raw)), name_(std::move(name)) {}

    double number(const std::string& key) {
        const RawEntry e = take(key);
        double v = 0.0;
        const auto* begin = e.value.data();
        const auto* end = begin + e.value.size();
        const auto [ptr, ec] = std::from_chars(begin, end, v);
        if (ec != std::errc() || ptr != end) {
            throw std::invalid_argument(name_ + ":" + std::to_string(e.line) + ": field '" +
                                        key + "' is not a number: '" + e.value + "'");
        }
        return v;
    }

    std::uint64_t unsigned_int(const std::string& key) {
        const RawEntry e = take(key);
        std::uint64_t v = 0;
        const auto* begin = e.value.data();
        const auto* end = begin + e.value.size();
        const auto [ptr, ec] = std::from_chars(begin, end, v);
        if (ec != std::errc() || ptr != end) {
            throw std::invalid_argument(name_ + ":" + std::to_string(e.line) + ": field '" +
                                        key + "' is not a non-negative integer: '" + e.value +
                                        "'");
        }
        return v;
    }

    std::optional<double> optional_number(const std::string& key) {
        if (raw_.find(key) == raw_.end()) {
            return std::nullopt;
        }
        return number(key);
    }

    std::optional<std::uint64_t> optional_unsigned(const std::string& key) {
        if (raw_.find(key) == raw_.end()) {
            return std::nullopt;
        }
        return unsigned_int(key);
    }

    // Any leftover key in a known section is a typo; other sections are
    // tolerated so metadata documents can round-trip.
    void finish() const {
        for (const auto& [key, entry] : raw_) {
            if (key.rfind("field.", 0) == 0 || key.rfind("impulse.", 0) == 0 ||
                key.rfind("analysis.", 0) == 0) {
                throw std::invalid_argument(name_ + ":" + std::to_string(entry.line) +
                                            ": unknown field '" + key + "'");
            }
        }
    }

    const std::string& name() const { return name_; }

  private:
    RawEntry take(const std::string& key) {
        const auto it = raw_.find(key);
        if (it == raw_.end()) {
            throw std::invalid_argument(name_ + ": missing required field '" + key + "'");
        }
        RawEntry e = it->second;
        raw_.erase(it);
        return e;
    }

    RawConfig raw_;
    std::string name_;
};

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw io_error("cannot open for writing: " + path.string());
    }
    return out;
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void KeyValueDoc::add(std::string key, std::string value) {
    items.emplace_back(std::move(key), std::move(value));
}

void KeyValueDoc::add(std::string key, double value) {
    items.emplace_back(std::move(key), format_double(value));
}

void KeyValueDoc::add(std::string key, std::uint64_t value) {
    items.emplace_back(std::move(key), std::to_string(value));
}

void write_key_values(const std::filesystem::path& path, const KeyValueDoc& doc) {
    auto out = open_out(path);
    for (const auto& c : doc.comments) {
        out << "# " << c << "\n";
    }
    for (const auto& [k, v] : doc.items) {
        out << k << " = " << v << "\n";
    }
    if (!out) {
        throw io_error("write failed: " + path.string());
    }
}

void write_trace_csv(const std::filesystem::path& path, const Trace& trace) {
    auto out = open_out(path);
    out << "index,value\n";
    for (std::size_t i = 0; i < trace.samples.size(); ++i) {
        out << i << ',' << format_double(trace.samples[i]) << '\n';
    }
    if (!out) {
        throw io_error("write failed: " + path.string());
    }
}

Trace read_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("cannot open trace: " + path.string());
    }
    std::string line;
    if (!std::getline(in, line) || trim(line) != "index,value") {
        throw io_error(path.string() + ":1: expected header 'index,value'");
    }
    Trace trace;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        const std::string t = trim(line);
        if (t.empty()) {
            throw io_error(path.string() + ":" + std::to_string(row) + ": empty row");
        }
        const auto comma = t.find(',');
        if (comma == std::string::npos) {
            throw io_error(path.string() + ":" + std::to_string(row) + ": expected 'index,value'");
        }
        const std::string value_str = trim(std::string_view(t).substr(comma + 1));
        double v = 0.0;
        const auto* begin = value_str.data();
        const auto* end = begin + value_str.size();
        const auto [ptr, ec] = std::from_chars(begin, end, v);
        if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
            throw io_error(path.string() + ":" + std::to_string(row) +
                           ": bad sample value '" + value_str + "'");
        }
        trace.samples.push_back(v);
    }
    return trace;
}

void write_psd_csv(const std::filesystem::path& path, const Psd& psd,
                   const std::vector<std::string>& notes) {
    auto out = open_out(path);
    out << "# dc_impulse_mass = " << format_double(psd.dc_impulse_mass) << "\n";
    for (const auto& n : notes) {
        out << "# " << n << "\n";
    }
    out << "frequency,power\n";
    for (std::size_t i = 0; i < psd.frequencies.size(); ++i) {
        out << format_double(psd.frequencies[i]) << ',' << format_double(psd.values[i]) << '\n';
    }
    if (!out) {
        throw io_error("write failed: " + path.string());
    }
}

void write_gridded_csv(const std::filesystem::path& path, std::string_view x_name,
                       std::string_view y_name, const GriddedFunction& g) {
    auto out = open_out(path);
    out << x_name << ',' << y_name << '\n';
    for (std::size_t i = 0; i < g.grid.size(); ++i) {
        out << format_double(g.grid[i]) << ',' << format_double(g.values[i]) << '\n';
    }
    if (!out) {
        throw io_error("write failed: " + path.string());
    }
}

RunConfig RunConfig::parse_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("cannot open config: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path.string());
}

RunConfig RunConfig::parse_string(std::string_view text, const std::string& diag_name) {
    ConfigReader reader(read_raw(text, diag_name), diag_name);

    const double phi1 = reader.number("impulse.phi1");
    const double phi2 = reader.number("impulse.phi2");
    const double theta0 = reader.number("impulse.theta0");
    const double mu_t = reader.number("impulse.mu_t");
    const double sigma_t = reader.number("impulse.sigma_t");
    const std::uint64_t impulse_length = reader.unsigned_int("impulse.length");

    const double lambda_r = reader.number("field.lambda_r");
    const double lambda_t = reader.number("field.lambda_t");
    const double mean_energy = reader.number("field.mean_energy");
    const double gamma_ratio = reader.number("field.gamma_ratio");
    const std::uint64_t trace_length = reader.unsigned_int("field.trace_length");
    const std::uint64_t seed = reader.unsigned_int("field.seed");
    const double sample_rate = reader.optional_number("field.sample_rate").value_or(1.0);

    AnalysisOptions analysis;
    if (const auto v = reader.optional_unsigned("analysis.bins")) {
        analysis.bins = static_cast<std::size_t>(*v);
    }
    if (const auto v = reader.optional_unsigned("analysis.segment")) {
        analysis.segment = static_cast<std::size_t>(*v);
    }
    if (const auto v = reader.optional_unsigned("analysis.order")) {
        analysis.order = static_cast<unsigned>(*v);
    }
    if (const auto v = reader.optional_unsigned("analysis.tail_points")) {
        analysis.tail_points = static_cast<std::size_t>(*v);
    }
    reader.finish();

    try {
        RunConfig cfg{FieldConfig{lambda_r,
                                  lambda_t,
                                  mean_energy,
                                  gamma_ratio,
                                  static_cast<std::size_t>(trace_length),
                                  ImpulseConfig{ArCoefficients(phi1, phi2),
                                                EnvelopeParams(theta0, mu_t, sigma_t),
                                                static_cast<std::size_t>(impulse_length)},
                                  seed,
                                  sample_rate},
                      analysis};
        cfg.field.validate();
        return cfg;
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(diag_name + ": " + e.what());
    }
}

KeyValueDoc RunConfig::to_metadata() const {
    KeyValueDoc doc;
    doc.add("field.lambda_r", field.lambda_r);
    doc.add("field.lambda_t", field.lambda_t);
    doc.add("field.mean_energy", field.mean_energy);
    doc.add("field.gamma_ratio", field.gamma_ratio);
    doc.add("field.trace_length", static_cast<std::uint64_t>(field.trace_length));
    doc.add("field.seed", field.seed);
    doc.add("field.sample_rate", field.sample_rate);
    doc.add("impulse.phi1", field.impulse.ar.phi1());
    doc.add("impulse.phi2", field.impulse.ar.phi2());
    doc.add("impulse.theta0", field.impulse.envelope.theta0());
    doc.add("impulse.mu_t", field.impulse.envelope.mu_t());
    doc.add("impulse.sigma_t", field.impulse.envelope.sigma_t());
    doc.add("impulse.length", static_cast<std::uint64_t>(field.impulse.length));
    doc.add("analysis.bins", static_cast<std::uint64_t>(analysis.bins));
    doc.add("analysis.segment", static_cast<std::uint64_t>(analysis.segment));
    doc.add("analysis.order", static_cast<std::uint64_t>(analysis.order));
    doc.add("analysis.tail_points", static_cast<std::uint64_t>(analysis.tail_points));
    return doc;
}

ShotParams equivalent_shot_params(const FieldConfig& cfg, unsigned m_max) {
    cfg.validate();
    const EquivalentRates rates = equivalent_rates(cfg.impulse.ar);
    const double unit_energy =
        waveform_moment_integral(rates.fall_a, rates.rise_b, 2);
    const double k2_scale = cfg.mean_energy / unit_energy;

    ShotParams p;
    p.lambda = cfg.arrivals_per_sample();
    p.fall_a = rates.fall_a;
    p.rise_b = rates.rise_b;
    p.sigma_n_sq = cfg.gamma_ratio * p.lambda * cfg.mean_energy;
    p.k_moments.assign(m_max, 0.0);
    for (unsigned m = 2; m <= m_max; m += 2) {
        const unsigned half = m / 2;
        // <E^j> = j! mean^j for exponential energies.
        p.k_moments[m - 1] = std::exp(gsl_sf_lngamma(half + 1.0)) * std::pow(k2_scale, half);
    }
    return p;
}

}  // namespace tinsim
