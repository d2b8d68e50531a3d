#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <gsl/gsl_integration.h>

#include "test_util.hpp"
#include "tinsim/errors.hpp"
#include "tinsim/rng.hpp"
#include "tinsim/spectral.hpp"
#include "tinsim/waveform.hpp"

using namespace tinsim;
namespace tu = tinsim::testutil;

namespace {

Trace white_noise(std::size_t n, std::uint64_t seed) {
    RngStream rng(seed);
    Trace t;
    t.samples.resize(n);
    for (double& v : t.samples) {
        v = rng.normal();
    }
    return t;
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

ShotParams demo_params() {
    ShotParams p;
    p.lambda = 1.0;
    p.fall_a = 1.0;
    p.rise_b = 2.0;
    p.k_moments = {1.0, 1.0};
    p.sigma_n_sq = 0.0;
    return p;
}

double gamma_psd_freq_integrand(double f, void* raw) {
    const auto* q = static_cast<const double*>(raw);
    return gamma_psd_value(f, q[0], q[1], q[2]);
}

}  // namespace

TEST_CASE("carson spectrum") {
    SUBCASE("no impulses leaves the flat background") {
        ShotParams p = demo_params();
        p.lambda = 0.0;
        p.sigma_n_sq = 2.5;
        const auto grid = frequency_grid(11);
        const Psd psd = carson_psd(grid, p);
        for (double v : psd.values) {
            CHECK(v == 2.5);
        }
        CHECK(psd.dc_impulse_mass == 0.0);
    }
    SUBCASE("pinned DC value") {
        CHECK(carson_psd_value(0.0, demo_params()) == doctest::Approx(0.25).epsilon(1e-12));
    }
    SUBCASE("carson equals lambda gamma + background pointwise") {
        RngStream rng(12);
        for (int rep = 0; rep < 50; ++rep) {
            ShotParams p = demo_params();
            p.lambda = 3.0 * rng.uniform() + 0.1;
            p.fall_a = 0.1 + rng.uniform();
            p.rise_b = p.fall_a * (1.5 + rng.uniform());
            p.k_moments = {rng.uniform() - 0.5, 0.5 + rng.uniform()};
            p.sigma_n_sq = rng.uniform();
            const double f = 0.5 * rng.uniform();
            const double lhs = carson_psd_value(f, p);
            const double rhs =
                p.lambda * gamma_psd_value(f, p.k_moments[1], p.fall_a, p.rise_b) +
                p.sigma_n_sq;
            CHECK(lhs == rhs);
        }
    }
    SUBCASE("high-frequency log-log slope is -4") {
        const ShotParams p = demo_params();
        const double slope = (std::log(carson_psd_value(10.0, p)) -
                              std::log(carson_psd_value(1.0, p))) /
                             (std::log(10.0) - std::log(1.0));
        CHECK(slope == doctest::Approx(-4.0).epsilon(0.025));
    }
    SUBCASE("DC mass is the squared mean") {
        ShotParams p = demo_params();
        p.k_moments = {0.7, 1.0};
        const auto psd = carson_psd(frequency_grid(5), p);
        const double mean = p.lambda * 0.7 * (2.0 - 1.0) / (1.0 * 2.0);
        CHECK(psd.dc_impulse_mass == doctest::Approx(mean * mean));
    }
}

TEST_CASE("pulse energy spectrum") {
    SUBCASE("vanishes in the equal-rate limit") {
        const auto grid = frequency_grid(33);
        const Psd psd = gamma_psd(grid, 1.0, 1.0, 1.0 * (1.0 + 1e-6));
        for (double v : psd.values) {
            CHECK(v <= 1e-10);
        }
    }
    SUBCASE("parseval against the time-domain energy") {
        const double k2 = 1.7;
        const double a = 0.4;
        const double b = 1.1;
        double params[3] = {k2, a, b};

        gsl_function f{&gamma_psd_freq_integrand, params};
        gsl_integration_workspace* ws = gsl_integration_workspace_alloc(4096);
        double freq_integral = 0.0;
        double abserr = 0.0;
        REQUIRE(gsl_integration_qagiu(&f, 0.0, 1e-12, 1e-10, 4096, ws, &freq_integral,
                                      &abserr) == 0);
        gsl_integration_workspace_free(ws);
        freq_integral *= 2.0;  // even in f

        const double time_integral = k2 * waveform_moment_integral(a, b, 2);
        CHECK(freq_integral == doctest::Approx(time_integral).epsilon(1e-6));
    }
    SUBCASE("monotone decreasing") {
        const auto grid = frequency_grid(400);
        const Psd psd = gamma_psd(grid, 1.0, 0.3, 0.9);
        for (std::size_t i = 1; i < psd.values.size(); ++i) {
            CHECK(psd.values[i] <= psd.values[i - 1]);
        }
    }
}

TEST_CASE("welch periodogram") {
    SUBCASE("white noise is flat and power-exact") {
        const Trace t = white_noise(1 << 20, 2718);
        WelchOptions opts;
        opts.segment = 256;
        const Psd psd = periodogram(t, opts);

        const double mean_power =
            sample_moments(t.samples).variance + std::pow(sample_moments(t.samples).mean, 2.0);
        CHECK(tu::trapezoid(psd.frequencies, psd.values) ==
              doctest::Approx(mean_power).epsilon(1e-6));

        // one-sided flat level is 2 for unit-variance white noise
        for (std::size_t k = 1; k + 1 < psd.values.size(); ++k) {
            CHECK(psd.values[k] == doctest::Approx(2.0).epsilon(0.05));
        }
    }
    SUBCASE("a pure tone concentrates in one bin") {
        Trace t;
        t.samples.resize(1 << 16);
        for (std::size_t i = 0; i < t.samples.size(); ++i) {
            t.samples[i] = std::cos(2.0 * std::numbers::pi * 0.125 * static_cast<double>(i));
        }
        WelchOptions opts;
        opts.segment = 1024;
        const Psd psd = periodogram(t, opts);
        const auto peak =
            std::max_element(psd.values.begin(), psd.values.end()) - psd.values.begin();
        CHECK(psd.frequencies[static_cast<std::size_t>(peak)] == doctest::Approx(0.125));
    }
    SUBCASE("segment validation") {
        const Trace t = white_noise(128, 3);
        WelchOptions opts;
        opts.segment = 256;
        CHECK_THROWS_AS(periodogram(t, opts), std::invalid_argument);
    }
}

TEST_CASE("burg estimation") {
    SUBCASE("recovers a baseband AR(2)") {
        const Trace t = ar2_run(1.2, -0.3, 1000000, 1234);
        const BurgResult r = burg_estimate(t, 2);
        CHECK(r.coefficients[0] == doctest::Approx(1.2).epsilon(0.01));
        CHECK(r.coefficients[1] == doctest::Approx(-0.3).epsilon(0.04));
        CHECK(std::abs(r.coefficients[1] + 0.3) < 0.01);
        CHECK(r.innovation_variance == doctest::Approx(1.0).epsilon(0.01));
    }
    SUBCASE("locates the resonance of a ringing AR(2)") {
        const Trace t = ar2_run(0.9, -0.81, 1000000, 4321);
        const BurgResult r = burg_estimate(t, 2);
        const auto peak =
            std::max_element(r.psd.values.begin(), r.psd.values.end()) - r.psd.values.begin();
        const double df = r.psd.frequencies[1] - r.psd.frequencies[0];
        CHECK(std::abs(r.psd.frequencies[static_cast<std::size_t>(peak)] - 1.0 / 6.0) <= df);
    }
    SUBCASE("white noise has negligible coefficients") {
        const Trace t = white_noise(1000000, 99);
        const BurgResult r = burg_estimate(t, 2);
        CHECK(std::abs(r.coefficients[0]) < 0.01);
        CHECK(std::abs(r.coefficients[1]) < 0.01);
    }
    SUBCASE("estimated models are minimum-phase") {
        RngStream rng(55);
        for (int rep = 0; rep < 20; ++rep) {
            const double phi1 = 1.6 * rng.uniform() - 0.8;
            const double phi2 = 0.8 * rng.uniform() - 0.6;
            if (!check_stationarity(phi1, phi2).stationary) {
                continue;
            }
            const Trace t = ar2_run(phi1, phi2, 20000, 1000 + rep);
            const BurgResult r = burg_estimate(t, 2);
            CHECK(check_stationarity(r.coefficients[0], r.coefficients[1]).stationary);
        }
    }
    SUBCASE("degenerate input") {
        Trace flat;
        flat.samples.assign(1000, 1.0);
        CHECK_THROWS_AS(burg_estimate(flat, 2), numerical_error);
        CHECK_THROWS_AS(burg_estimate(white_noise(15, 1), 2), std::invalid_argument);
    }
}

TEST_CASE("empirical autocorrelation") {
    SUBCASE("white noise decorrelates") {
        const Trace t = white_noise(100000, 7);
        const auto rho = empirical_acf(t, 10);
        CHECK(rho[0] == 1.0);
        const double bound = 4.0 / std::sqrt(static_cast<double>(t.samples.size()));
        for (std::size_t k = 1; k <= 10; ++k) {
            CHECK(std::abs(rho[k]) < bound);
            CHECK(std::abs(rho[k]) <= 1.0);
        }
    }
    SUBCASE("bounds and validation") {
        const Trace t = white_noise(100, 8);
        CHECK_THROWS_AS(empirical_acf(t, 100), std::invalid_argument);
        Trace flat;
        flat.samples.assign(100, 2.0);
        CHECK_THROWS_AS(empirical_acf(flat, 10), degenerate_variance_error);
    }
}
