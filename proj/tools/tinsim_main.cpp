#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tinsim/errors.hpp"
#include "tinsim/field.hpp"
#include "tinsim/fit.hpp"
#include "tinsim/io.hpp"
#include "tinsim/spectral.hpp"
#include "tinsim/stats.hpp"
#include "tinsim/version.hpp"

namespace fs = std::filesystem;
using namespace tinsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

struct CommonArgs {
    std::string out_dir = ".";
};

fs::path ensure_out_dir(const CommonArgs& args) {
    fs::path dir(args.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw io_error("cannot create output directory " + dir.string() + ": " + ec.message());
    }
    return dir;
}

KeyValueDoc base_metadata(const std::string& command) {
    KeyValueDoc doc;
    doc.comments.push_back("tinsim " + std::string(kVersion));
    doc.comments.push_back("command: " + command);
    return doc;
}

void run_simulate(const std::string& config_path, std::optional<std::uint64_t> seed_override,
                  const CommonArgs& common) {
    RunConfig cfg = RunConfig::parse_file(config_path);
    if (seed_override) {
        cfg.field.seed = *seed_override;
    }
    if (!cfg.field.impulse.envelope_decayed()) {
        std::cerr << "warning: innovation envelope has not decayed below 1e-3 of its peak "
                     "within impulse.length; consider a longer impulse window\n";
    }
    const fs::path dir = ensure_out_dir(common);
    const Trace trace = simulate(cfg.field);
    write_trace_csv(dir / "trace.csv", trace);

    KeyValueDoc meta = base_metadata("simulate");
    for (auto& item : cfg.to_metadata().items) {
        meta.items.push_back(std::move(item));
    }
    meta.add("output.samples", static_cast<std::uint64_t>(trace.samples.size()));
    write_key_values(dir / "trace.meta", meta);
    std::cout << "wrote " << (dir / "trace.csv").string() << " ("
              << trace.samples.size() << " samples)\n";
}

void run_analyze(const std::string& trace_path, std::size_t bins, const CommonArgs& common) {
    const Trace trace = read_trace_csv(trace_path);
    const fs::path dir = ensure_out_dir(common);

    const SampleMoments sm = sample_moments(trace.samples);
    const bool degenerate = !(sm.variance > 0.0);

    KeyValueDoc doc = base_metadata("analyze");
    doc.add("input.trace", trace_path);
    doc.add("samples", static_cast<std::uint64_t>(sm.count));
    doc.add("mean", sm.mean);
    doc.add("variance", sm.variance);
    doc.add("skewness", sm.skewness);
    doc.add("excess_kurtosis", sm.excess_kurtosis);
    doc.add("kappa1", sm.mean);
    doc.add("kappa2", sm.variance);
    doc.add("kappa3", sm.central3);
    doc.add("kappa4", sm.central4 - 3.0 * sm.variance * sm.variance);
    doc.add("min", sm.min);
    doc.add("max", sm.max);
    doc.add("degenerate", std::string(degenerate ? "1" : "0"));
    doc.add("grid.bins", static_cast<std::uint64_t>(bins));
    write_key_values(dir / "stats.txt", doc);

    if (trace.samples.size() >= 1000) {
        const Histogram hist = empirical_pdf(trace, bins);
        write_gridded_csv(dir / "pdf.csv", "x", "density", hist.to_gridded());
        const EmpiricalCcdf ccdf(trace);
        GriddedFunction tail = ccdf.on_grid(hist.edges);
        write_gridded_csv(dir / "ccdf.csv", "x", "ccdf", tail);
    } else {
        std::cerr << "warning: trace too short for a histogram; pdf/ccdf not written\n";
    }
    std::cout << "wrote " << (dir / "stats.txt").string() << "\n";
}

void run_psd(const std::string& trace_path, std::size_t segment, unsigned order,
             const std::string& config_path, const CommonArgs& common) {
    const Trace trace = read_trace_csv(trace_path);
    const fs::path dir = ensure_out_dir(common);

    WelchOptions opts;
    opts.segment = segment;
    const Psd welch = periodogram(trace, opts);
    write_psd_csv(dir / "psd_welch.csv", welch, {"one-sided Welch periodogram"});

    BurgResult burg = burg_estimate(trace, order, welch.frequencies.size());
    Psd burg_one_sided = burg.psd;
    for (double& v : burg_one_sided.values) {
        v *= 2.0;  // two-sided AR model density -> one-sided overlay
    }
    std::vector<std::string> burg_notes{"one-sided (2x two-sided Burg AR model)"};
    burg_notes.push_back("order = " + std::to_string(order));
    for (unsigned i = 0; i < order; ++i) {
        burg_notes.push_back("phi" + std::to_string(i + 1) + " = " +
                             format_double(burg.coefficients[i]));
    }
    burg_notes.push_back("innovation_variance = " + format_double(burg.innovation_variance));
    write_psd_csv(dir / "psd_burg.csv", burg_one_sided, burg_notes);

    if (!config_path.empty()) {
        const RunConfig cfg = RunConfig::parse_file(config_path);
        const ShotParams shot = equivalent_shot_params(cfg.field);
        Psd carson = carson_psd(welch.frequencies, shot);
        for (double& v : carson.values) {
            v *= 2.0;  // same one-sided overlay convention
        }
        write_psd_csv(dir / "psd_carson.csv", carson,
                      {"one-sided (2x two-sided closed form)",
                       "fall_a = " + format_double(shot.fall_a),
                       "rise_b = " + format_double(shot.rise_b),
                       "lambda = " + format_double(shot.lambda)});
    }

    KeyValueDoc meta = base_metadata("psd");
    meta.add("input.trace", trace_path);
    meta.add("segment", static_cast<std::uint64_t>(segment));
    meta.add("order", static_cast<std::uint64_t>(order));
    if (!config_path.empty()) {
        meta.add("config", config_path);
    }
    write_key_values(dir / "psd.meta", meta);
    std::cout << "wrote " << (dir / "psd_welch.csv").string() << "\n";
}

void run_fit(const std::string& trace_path, std::size_t bins, std::size_t tail_points,
             const CommonArgs& common) {
    const Trace trace = read_trace_csv(trace_path);
    const fs::path dir = ensure_out_dir(common);

    const FitReport report = compare_fits(trace, bins, tail_points);

    KeyValueDoc doc = base_metadata("fit");
    doc.add("input.trace", trace_path);
    doc.add("sample_count", static_cast<std::uint64_t>(report.sample_count));
    doc.add("stable.alpha", report.stable.params.alpha());
    doc.add("stable.beta", report.stable.params.beta());
    doc.add("stable.sigma", report.stable.params.sigma());
    doc.add("stable.mu", report.stable.params.mu());
    doc.add("stable.clamped", std::string(report.stable.clamped ? "1" : "0"));
    doc.add("stable.kl", report.stable_kl);
    doc.add("stable.tail_mse", report.stable_tail_mse);
    doc.add("class_a.overlap_a", report.class_a.params.overlap_a());
    doc.add("class_a.gamma_prime", report.class_a.params.gamma_prime());
    doc.add("class_a.sigma_sq", report.class_a.params.sigma_sq());
    doc.add("class_a.truncation_m",
            static_cast<std::uint64_t>(report.class_a.params.truncation_m()));
    doc.add("class_a.clamped", std::string(report.class_a.clamped ? "1" : "0"));
    doc.add("class_a.kl", report.class_a_kl);
    doc.add("class_a.tail_mse", report.class_a_tail_mse);
    doc.add("grid.bins", static_cast<std::uint64_t>(report.bins));
    doc.add("grid.tail_points", static_cast<std::uint64_t>(report.tail_points));
    doc.add("grid.tail_lo", report.tail_lo);
    doc.add("grid.tail_hi", report.tail_hi);
    write_key_values(dir / "fit_report.txt", doc);
    std::cout << "wrote " << (dir / "fit_report.txt").string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Poisson-field transient impulsive noise simulator and analyzer"};
    app.require_subcommand(1);

    CommonArgs common;

    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    auto* sim = app.add_subcommand("simulate", "synthesize a noise trace from a config");
    sim->add_option("--config", config_path, "run configuration file")->required();
    sim->add_option("--seed", seed_override, "override the config seed");
    sim->add_option("--out-dir", common.out_dir, "output directory");

    std::string trace_path;
    std::size_t bins = 401;
    auto* ana = app.add_subcommand("analyze", "first-order statistics of a trace CSV");
    ana->add_option("--trace", trace_path, "trace CSV (index,value)")->required();
    ana->add_option("--bins", bins, "histogram bins");
    ana->add_option("--out-dir", common.out_dir, "output directory");

    std::size_t segment = 4096;
    unsigned order = 2;
    std::string psd_config;
    auto* psd = app.add_subcommand("psd", "spectral estimates of a trace CSV");
    psd->add_option("--trace", trace_path, "trace CSV (index,value)")->required();
    psd->add_option("--segment", segment, "Welch segment length");
    psd->add_option("--order", order, "Burg AR order");
    psd->add_option("--config", psd_config, "config for the closed-form overlay");
    psd->add_option("--out-dir", common.out_dir, "output directory");

    std::size_t tail_points = 200;
    auto* fit = app.add_subcommand("fit", "stable and Class A fits of a trace CSV");
    fit->add_option("--trace", trace_path, "trace CSV (index,value)")->required();
    fit->add_option("--bins", bins, "histogram bins");
    fit->add_option("--tail-points", tail_points, "tail grid points");
    fit->add_option("--out-dir", common.out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            run_simulate(config_path, seed_override, common);
        } else if (ana->parsed()) {
            run_analyze(trace_path, bins, common);
        } else if (psd->parsed()) {
            run_psd(trace_path, segment, order, psd_config, common);
        } else if (fit->parsed()) {
            run_fit(trace_path, bins, tail_points, common);
        }
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const numerical_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const degenerate_variance_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const model_mismatch_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const insufficient_data_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}
