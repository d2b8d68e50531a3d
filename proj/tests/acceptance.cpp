// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Usage: tinsim_acceptance <cli-binary> <paper_vi.cfg> <scratch-dir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <gsl/gsl_integration.h>

#include "test_util.hpp"
#include "tinsim/field.hpp"
#include "tinsim/fit.hpp"
#include "tinsim/io.hpp"
#include "tinsim/rng.hpp"
#include "tinsim/spectral.hpp"
#include "tinsim/stats.hpp"
#include "tinsim/waveform.hpp"

using namespace tinsim;
namespace tu = tinsim::testutil;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;
std::vector<std::string> g_notes;

void expect(bool ok, const std::string& what) {
    if (!ok) {
        ++g_failures;
        g_notes.push_back(what);
    }
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

void report(int id, const std::string& label, int failures_before, double elapsed,
            double budget_s) {
    const bool ok = (g_failures == failures_before);
    expect(elapsed < budget_s,
           "criterion " + std::to_string(id) + " exceeded its runtime budget (" +
               std::to_string(elapsed) + " s)");
    const bool ok_with_time = (g_failures == failures_before);
    std::printf("[%s] criterion %d: %s (%.1f s)\n", ok_with_time ? "PASS" : "FAIL", id,
                label.c_str(), elapsed);
    if (!ok) {
        for (const auto& n : g_notes) {
            std::printf("       %s\n", n.c_str());
        }
    }
    g_notes.clear();
}

ShotParams random_shot_params(RngStream& rng) {
    ShotParams p;
    p.lambda = 0.2 + 3.0 * rng.uniform();
    p.fall_a = 0.05 + 1.5 * rng.uniform();
    p.rise_b = p.fall_a * (1.3 + 3.0 * rng.uniform());
    p.sigma_n_sq = rng.uniform();
    const double k1 = 2.0 * rng.uniform() - 1.0;
    const double k2 = k1 * k1 + 0.2 + 2.0 * rng.uniform();
    const double k3 = (rng.sign() > 0 ? 1.0 : -1.0) * (0.2 + 3.0 * rng.uniform());
    p.k_moments = {k1, k2, k3};
    return p;
}

bool roots_outside_unit_circle(double phi1, double phi2) {
    if (phi2 == 0.0) {
        return phi1 == 0.0 || std::abs(1.0 / phi1) > 1.0;
    }
    const std::complex<double> disc = std::sqrt(std::complex<double>(phi1 * phi1 + 4.0 * phi2));
    const std::complex<double> r1 = (phi1 + disc) / (-2.0 * phi2);
    const std::complex<double> r2 = (phi1 - disc) / (-2.0 * phi2);
    return std::abs(r1) > 1.0 && std::abs(r2) > 1.0;
}

Trace ar2_run(double phi1, double phi2, std::size_t n, std::uint64_t seed) {
    RngStream rng(seed);
    Trace t;
    t.samples.resize(n);
    double u1 = 0.0;
    double u2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = phi1 * u1 + phi2 * u2 + rng.normal();
        t.samples[i] = u;
        u2 = u1;
        u1 = u;
    }
    return t;
}

double gamma_psd_gsl_integrand(double f, void* raw) {
    const auto* q = static_cast<const double*>(raw);
    return gamma_psd_value(f, q[0], q[1], q[2]);
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) {
        return "<missing:" + p.string() + ">";
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run_cli(const std::string& cmd) {
    return std::system(cmd.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 4) {
        std::fprintf(stderr, "usage: %s <cli-binary> <config> <scratch-dir>\n", argv[0]);
        return 2;
    }
    const std::string cli = argv[1];
    const std::string config_path = argv[2];
    const fs::path scratch = argv[3];
    fs::create_directories(scratch);

    const RunConfig cfg = RunConfig::parse_file(config_path);
    const ShotParams eq = equivalent_shot_params(cfg.field);

    // ---- criterion 1: closed-form cumulants vs quadrature ----
    {
        Timer timer;
        const int before = g_failures;
        RngStream rng(90210);
        for (int rep = 0; rep < 20; ++rep) {
            const ShotParams p = random_shot_params(rng);
            for (unsigned m = 1; m <= 3; ++m) {
                const double closed = cumulant(m, p);
                const double oracle = tu::campbell_cumulant_quadrature(m, p);
                expect(std::abs(closed - oracle) <= 1e-8 * std::max(1.0, std::abs(oracle)),
                       "cumulant mismatch at m=" + std::to_string(m));
            }
        }
        report(1, "Campbell cumulants match numerical integration (1e-8)", before,
               timer.seconds(), 10.0);
    }

    // Shared ensemble for criteria 2-4.
    const std::size_t kTraces = 32;
    std::vector<Trace> shots;
    std::vector<Trace> xs;
    {
        for (std::size_t i = 0; i < kTraces; ++i) {
            FieldConfig per = cfg.field;
            per.seed = derive_seed(cfg.field.seed, kPurposeTrace, i);
            Trace shot = simulate_shot_noise(per);
            RngStream bg(derive_seed(per.seed, kPurposeBackground, 0));
            xs.push_back(add_background(shot, per.gamma_ratio, bg));
            shots.push_back(std::move(shot));
        }
    }

    // ---- criterion 2: Monte-Carlo moments of the simulated ensemble ----
    {
        Timer timer;
        const int before = g_failures;
        const double kappa1 = cumulant(1, eq);
        const double kappa2 = cumulant(2, eq);

        std::vector<double> means;
        std::vector<double> vars;
        Trace pooled;
        pooled.samples.reserve(kTraces * cfg.field.trace_length);
        for (const auto& x : xs) {
            const SampleMoments sm = sample_moments(x.samples);
            means.push_back(sm.mean);
            vars.push_back(sm.variance);
            pooled.samples.insert(pooled.samples.end(), x.samples.begin(), x.samples.end());
        }
        expect(pooled.samples.size() >= 10000000, "ensemble smaller than 1e7 samples");

        const SampleMoments mm = sample_moments(means);
        const SampleMoments vm = sample_moments(vars);
        const double se_mean = std::sqrt(mm.variance / double(kTraces));
        const double se_var = std::sqrt(vm.variance / double(kTraces));
        expect(std::abs(mm.mean - kappa1) < 3.0 * se_mean,
               "ensemble mean " + std::to_string(mm.mean) + " vs kappa1 " +
                   std::to_string(kappa1) + " (3se = " + std::to_string(3.0 * se_mean) + ")");
        expect(std::abs(vm.mean - kappa2) < 3.0 * se_var,
               "ensemble variance " + std::to_string(vm.mean) + " vs kappa2 " +
                   std::to_string(kappa2) + " (3se = " + std::to_string(3.0 * se_var) + ")");
        expect(sample_moments(pooled.samples).excess_kurtosis > 0.0,
               "pooled sample is not leptokurtic");

        report(2, "ensemble mean/variance match kappa_1, kappa_2; leptokurtic", before,
               timer.seconds(), 300.0);

        // ---- criterion 3: fit ordering on the pooled ensemble ----
        Timer timer3;
        const int before3 = g_failures;
        const FitReport fit = compare_fits(pooled, cfg.analysis.bins, cfg.analysis.tail_points);
        expect(fit.stable_kl < fit.class_a_kl,
               "KL ordering violated: stable " + std::to_string(fit.stable_kl) + " vs class A " +
                   std::to_string(fit.class_a_kl));
        expect(fit.stable_tail_mse < fit.class_a_tail_mse,
               "tail MSE ordering violated: stable " + std::to_string(fit.stable_tail_mse) +
                   " vs class A " + std::to_string(fit.class_a_tail_mse));
        expect(fit.stable_kl < 0.05,
               "stable KL too large: " + std::to_string(fit.stable_kl));
        std::printf("       KL: stable %.4g vs class A %.4g; tail MSE: %.3g vs %.3g\n",
                    fit.stable_kl, fit.class_a_kl, fit.stable_tail_mse, fit.class_a_tail_mse);
        std::printf("       stable fit: alpha %.3f beta %.3f sigma %.4g mu %.3g\n",
                    fit.stable.params.alpha(), fit.stable.params.beta(),
                    fit.stable.params.sigma(), fit.stable.params.mu());
        report(3, "alpha-stable beats Class A on KL and tail MSE; KL(stable) < 0.05", before3,
               timer3.seconds(), 600.0);
    }

    // ---- criterion 4: Carson spectrum vs Welch periodogram ----
    {
        Timer timer;
        const int before = g_failures;
        WelchOptions opts;
        opts.segment = cfg.analysis.segment;
        std::vector<double> freq;
        std::vector<double> avg;
        for (const auto& shot : shots) {
            const Psd p = periodogram(shot, opts);
            if (avg.empty()) {
                freq = p.frequencies;
                avg.assign(p.values.size(), 0.0);
            }
            for (std::size_t k = 0; k < avg.size(); ++k) {
                avg[k] += p.values[k] / double(kTraces);
            }
        }
        ShotParams shot_only = eq;
        shot_only.sigma_n_sq = 0.0;
        double err = 0.0;
        double norm = 0.0;
        for (std::size_t k = 1; k + 1 < freq.size(); ++k) {
            const double df = freq[k + 1] - freq[k];
            const double model = 2.0 * carson_psd_value(freq[k], shot_only);
            err += std::abs(avg[k] - model) * df;
            norm += model * df;
        }
        const double integrated_err = err / norm;
        expect(integrated_err < 0.15,
               "integrated spectral error " + std::to_string(integrated_err));

        const double slope = (std::log(carson_psd_value(10.0, shot_only)) -
                              std::log(carson_psd_value(1.0, shot_only))) /
                             std::log(10.0);
        expect(std::abs(slope + 4.0) < 0.1, "high-frequency slope " + std::to_string(slope));
        std::printf("       integrated spectral error %.3f; high-frequency slope %.3f\n",
                    integrated_err, slope);
        report(4, "Welch agrees with the Carson form (15% integrated); slope -4 +/- 0.1",
               before, timer.seconds(), 120.0);
    }

    // ---- criterion 5: AR machinery ----
    {
        Timer timer;
        const int before = g_failures;

        RngStream rng(777);
        std::size_t tested = 0;
        while (tested < 10000) {
            const double phi1 = 4.0 * rng.uniform() - 2.0;
            const double phi2 = 4.0 * rng.uniform() - 2.0;
            const auto v = check_stationarity(phi1, phi2);
            if (std::abs(v.margin) < 1e-9) {
                continue;
            }
            expect(v.stationary == roots_outside_unit_circle(phi1, phi2),
                   "stationarity disagreement at phi1=" + std::to_string(phi1) +
                       " phi2=" + std::to_string(phi2));
            ++tested;
        }

        int done = 0;
        while (done < 200) {
            const double phi1 = 4.0 * rng.uniform() - 2.0;
            const double phi2 = 4.0 * rng.uniform() - 2.0;
            const auto v = check_stationarity(phi1, phi2);
            if (!v.stationary || v.margin < 1e-6 ||
                std::abs(phi1 * phi1 + 4.0 * phi2) < 1e-4) {
                continue;
            }
            const ArCoefficients ar(phi1, phi2);
            const auto ref = tu::yule_walker_acf(phi1, phi2, 100);
            for (std::size_t k = 0; k <= 100; ++k) {
                const double closed = theoretical_acf(ar, k);
                expect(std::abs(closed - ref[k]) <=
                           1e-10 * std::max({1.0, std::abs(closed), std::abs(ref[k])}),
                       "ACF branch mismatch at k=" + std::to_string(k));
            }
            ++done;
        }

        const Trace baseband = ar2_run(1.2, -0.3, 1000000, 20240811);
        const BurgResult burg = burg_estimate(baseband, 2);
        expect(std::abs(burg.coefficients[0] - 1.2) < 0.01,
               "Burg phi1 " + std::to_string(burg.coefficients[0]));
        expect(std::abs(burg.coefficients[1] + 0.3) < 0.01,
               "Burg phi2 " + std::to_string(burg.coefficients[1]));

        const Trace ringing = ar2_run(0.9, -0.81, 1000000, 814);
        const BurgResult rb = burg_estimate(ringing, 2);
        const auto peak =
            std::max_element(rb.psd.values.begin(), rb.psd.values.end()) - rb.psd.values.begin();
        const double df = rb.psd.frequencies[1] - rb.psd.frequencies[0];
        expect(std::abs(rb.psd.frequencies[std::size_t(peak)] - 1.0 / 6.0) <= df,
               "Burg resonance at " + std::to_string(rb.psd.frequencies[std::size_t(peak)]));

        report(5, "stationarity/roots agree; ACF forms match recursion; Burg round trips",
               before, timer.seconds(), 120.0);
    }

    // ---- criterion 6: distribution-family identities ----
    {
        Timer timer;
        const int before = g_failures;

        const StableParams gauss(2.0, 0.0, 1.0 / std::sqrt(2.0), 0.0);
        for (int i = 0; i <= 160; ++i) {
            const double x = -8.0 + 0.1 * i;
            expect(std::abs(stable_pdf(x, gauss) - normal_pdf(x, 0.0, 1.0)) < 1e-6,
                   "stable(2) deviates from the gaussian at x=" + std::to_string(x));
        }
        const StableParams cauchy(1.0, 0.0, 1.0, 0.0);
        for (int i = 0; i <= 160; ++i) {
            const double x = -8.0 + 0.1 * i;
            const double ref = 1.0 / (std::numbers::pi * (1.0 + x * x));
            expect(std::abs(stable_pdf(x, cauchy) - ref) < 1e-6,
                   "stable(1) deviates from the cauchy at x=" + std::to_string(x));
        }

        RngStream rng(4096);
        const auto gs = sample_stable(gauss, 100000, rng);
        expect(tu::ks_statistic(gs, [](double x) { return normal_cdf(x, 0.0, 1.0); }) <
                   tu::ks_critical(0.01, gs.size()),
               "CMS gaussian sample fails KS at 0.01");
        const auto cs = sample_stable(cauchy, 100000, rng);
        expect(tu::ks_statistic(cs,
                                [](double x) {
                                    return 0.5 + std::atan(x) / std::numbers::pi;
                                }) < tu::ks_critical(0.01, cs.size()),
               "CMS cauchy sample fails KS at 0.01");

        const CumulantSet c{{0.25, 1.75, 0.0, 0.0}};
        bool exact = true;
        for (int i = 0; i <= 200; ++i) {
            const double x = -7.0 + 0.07 * i;
            exact = exact && (edgeworth_pdf(x, c, 1) == normal_pdf(x, 0.25, 1.75));
        }
        expect(exact, "Edgeworth order 1 differs from the gaussian term");

        report(6, "stable(2)=gaussian, stable(1)=cauchy, CMS passes KS, Edgeworth-1 exact",
               before, timer.seconds(), 60.0);
    }

    // ---- criterion 7: appendix suites ----
    {
        Timer timer;
        const int before = g_failures;

        ShotParams diag;
        diag.lambda = 1.0;
        diag.fall_a = 1.0;
        diag.rise_b = 2.0;
        diag.k_moments.assign(110, 1.0);
        const auto d = cumulant_convergence_diagnostics(diag, 105);
        expect(d.cumulant_ratio[99] < d.cumulant_ratio[9], "cumulant ratio not decreasing");
        expect(d.cumulant_ratio[99] < 0.05, "terminal cumulant ratio too large");
        bool all_finite = true;
        for (double v : d.log_abs_kappa) {
            all_finite = all_finite && std::isfinite(v);
        }
        for (double v : d.cumulant_ratio) {
            all_finite = all_finite && std::isfinite(v);
        }
        for (double v : d.log_kappa_over_factorial) {
            all_finite = all_finite && std::isfinite(v);
        }
        expect(all_finite, "non-finite diagnostic value");

        // innovation-spectrum flatness over 1e3 averaged realizations
        const EnvelopeParams env(1.0, 3.0, 0.5);
        const std::size_t len = 128;
        const int reps = 1000;
        RngStream rng(271828);
        WelchOptions opts;
        opts.segment = len;
        opts.window = WelchOptions::Window::kRect;
        std::vector<double> sum;
        std::vector<double> sum_sq;
        double power = 0.0;
        for (int r = 0; r < reps; ++r) {
            Trace eps;
            eps.samples.resize(len);
            for (std::size_t t = 0; t < len; ++t) {
                eps.samples[t] =
                    innovation_std(static_cast<std::int64_t>(t), env) * rng.normal();
            }
            const Psd p = periodogram(eps, opts);
            if (sum.empty()) {
                sum.assign(p.values.size(), 0.0);
                sum_sq.assign(p.values.size(), 0.0);
            }
            for (std::size_t k = 0; k < sum.size(); ++k) {
                // flatness is a statement about the two-sided density, so
                // undo the one-sided doubling of the interior bins
                const bool interior = k != 0 && k + 1 != sum.size();
                const double v = interior ? 0.5 * p.values[k] : p.values[k];
                sum[k] += v;
                sum_sq[k] += v * v;
            }
            for (double v : eps.samples) {
                power += v * v / (double(len) * reps);
            }
        }
        double grand = 0.0;
        for (double s : sum) {
            grand += s / (double(reps) * double(sum.size()));
        }
        for (std::size_t k = 0; k < sum.size(); ++k) {
            const double mean_k = sum[k] / reps;
            const double var_k =
                std::max(sum_sq[k] / reps - mean_k * mean_k, 0.0) / (reps - 1.0);
            const double se = std::sqrt(var_k) * std::sqrt(double(reps) / (reps - 1.0));
            expect(std::abs(mean_k - grand) <= 3.0 * std::sqrt(var_k) + 1e-15,
                   "flatness violated at bin " + std::to_string(k) + " (dev " +
                       std::to_string((mean_k - grand) / (se + 1e-300)) + " se)");
        }
        expect(std::abs(power - envelope_mean_square(env, len)) <
                   0.05 * envelope_mean_square(env, len),
               "innovation power deviates from the envelope mean square");

        // Parseval for the pulse energy spectrum
        {
            const double params[3] = {1.3, 0.7, 1.9};
            gsl_function f{&gamma_psd_gsl_integrand, const_cast<double*>(params)};
            gsl_integration_workspace* ws = gsl_integration_workspace_alloc(4096);
            double freq_integral = 0.0;
            double abserr = 0.0;
            const int status = gsl_integration_qagiu(&f, 0.0, 1e-12, 1e-10, 4096, ws,
                                                     &freq_integral, &abserr);
            gsl_integration_workspace_free(ws);
            freq_integral *= 2.0;
            const double time_integral =
                params[0] * waveform_moment_integral(params[1], params[2], 2);
            expect(status == 0 &&
                       std::abs(freq_integral - time_integral) <= 1e-6 * time_integral,
                   "Parseval mismatch: " + std::to_string(freq_integral) + " vs " +
                       std::to_string(time_integral));
        }

        report(7, "cumulant ratios decay finitely; innovation spectrum flat; Parseval holds",
               before, timer.seconds(), 120.0);
    }

    // ---- criterion 8: byte-identical CLI reruns ----
    {
        Timer timer;
        const int before = g_failures;
        const fs::path s1 = scratch / "run1";
        const fs::path s2 = scratch / "run2";
        fs::remove_all(s1);
        fs::remove_all(s2);

        const std::string base = "\"" + cli + "\"";
        const auto sim = [&](const fs::path& dir) {
            return run_cli(base + " simulate --config \"" + config_path + "\" --out-dir \"" +
                           dir.string() + "\" > /dev/null");
        };
        expect(sim(s1) == 0, "simulate run 1 failed");
        expect(sim(s2) == 0, "simulate run 2 failed");
        for (const char* f : {"trace.csv", "trace.meta"}) {
            expect(read_file(s1 / f) == read_file(s2 / f),
                   std::string("simulate outputs differ: ") + f);
        }

        const std::string trace1 = (s1 / "trace.csv").string();
        const auto stage = [&](const std::string& name, const std::string& args,
                               std::vector<std::string> outputs) {
            const fs::path d1 = scratch / (name + "_1");
            const fs::path d2 = scratch / (name + "_2");
            fs::remove_all(d1);
            fs::remove_all(d2);
            const auto run = [&](const fs::path& dir) {
                return run_cli(base + " " + name + " --trace \"" + trace1 + "\" " + args +
                               " --out-dir \"" + dir.string() + "\" > /dev/null");
            };
            expect(run(d1) == 0, name + " run 1 failed");
            expect(run(d2) == 0, name + " run 2 failed");
            for (const auto& f : outputs) {
                expect(read_file(d1 / f) == read_file(d2 / f),
                       name + " outputs differ: " + f);
            }
        };
        stage("analyze", "", {"stats.txt", "pdf.csv", "ccdf.csv"});
        stage("psd", "--config \"" + config_path + "\"",
              {"psd_welch.csv", "psd_burg.csv", "psd_carson.csv", "psd.meta"});
        stage("fit", "", {"fit_report.txt"});

        report(8, "every CLI subcommand reruns byte-identically", before, timer.seconds(),
               300.0);
    }

    if (g_failures > 0) {
        std::printf("%d acceptance check(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
