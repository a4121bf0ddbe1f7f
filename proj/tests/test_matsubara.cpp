#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "qcurv/matsubara.hpp"

using namespace qcurv;

namespace {

// single peak at Delta with Re sigma weight pi Delta g: S(tau) closed form
double single_peak_s(double delta, double g, double beta, double tau) {
    return delta * delta * g * std::cosh((0.5 * beta - tau) * delta) /
           std::sinh(0.5 * beta * delta);
}

SpectralDensity random_density(std::mt19937_64& rng, int n_peaks) {
    std::uniform_real_distribution<double> uo(0.1, 10.0), uw(0.0, 1.0);
    std::vector<SpectralPeak> pk;
    pk.reserve(n_peaks);
    for (int p = 0; p < n_peaks; ++p) pk.push_back({uo(rng), uw(rng)});
    return SpectralDensity(std::move(pk));
}

}  // namespace

TEST_CASE("hyperbolic kernel values and guards") {
    // omega -> 0 limit: 2/beta for m = 0
    CHECK(kernel(0, 1e-9, 0.7, 2.0) == doctest::Approx(1.0));
    CHECK(kernel(1, 1e-9, 0.7, 2.0) == 0.0);

    const double delta = 1.7, beta = 3.1;
    CHECK(kernel(0, delta, 0.0, beta) ==
          doctest::Approx(delta / std::tanh(0.5 * beta * delta)).epsilon(1e-14));
    CHECK(kernel(1, delta, 0.5 * beta, beta) ==
          doctest::Approx(std::pow(delta, 3) / std::sinh(0.5 * beta * delta)).epsilon(1e-14));

    // continuity across the series switch point
    const double om = 1e-6 / beta;
    CHECK(kernel(0, om * (1 - 1e-9), 1.0, beta) ==
          doctest::Approx(kernel(0, om * (1 + 1e-9), 1.0, beta)).epsilon(1e-12));

    CHECK_THROWS_AS(kernel(0, 1.0, -0.1, 1.0), domain_error);
    CHECK_THROWS_AS(kernel(0, 1.0, 1.1, 1.0), domain_error);
    CHECK_THROWS_AS(kernel(7, 1.0, 0.5, 1.0), domain_error);
}

TEST_CASE("spectral_correlator: closed form, linearity, guards") {
    const double delta = 1.3, g = 0.8, beta = 4.0;
    const SpectralDensity d({{delta, pi * delta * g}});
    const auto c = spectral_correlator(d, beta, 101);
    REQUIRE(c.n_tau() == 101);
    for (int j = 0; j < c.n_tau(); ++j)
        CHECK(c.values[j] ==
              doctest::Approx(single_peak_s(delta, g, beta, c.tau(j))).epsilon(1e-13));
    CHECK(c.at_midpoint() ==
          doctest::Approx(delta * delta * g / std::sinh(0.5 * beta * delta)).epsilon(1e-13));

    // two equal peaks add linearly
    const SpectralDensity d2({{delta, pi * delta * g}, {delta, pi * delta * g}});
    const auto c2 = spectral_correlator(d2, beta, 101);
    for (int j = 0; j < c.n_tau(); ++j)
        CHECK(c2.values[j] == doctest::Approx(2.0 * c.values[j]).epsilon(1e-13));

    CHECK_THROWS_AS(spectral_correlator(SpectralDensity{}, beta, 101), empty_density_error);
    CHECK_THROWS_AS(spectral_correlator(d, beta, 100), domain_error);
    CHECK_THROWS_AS(SpectralDensity({{-1.0, 1.0}}), domain_error);
    CHECK_THROWS_AS(SpectralDensity({{1.0, -0.5}}), domain_error);
}

TEST_CASE("KMS symmetry and midpoint monotonicity of generated correlators") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const auto d = random_density(rng, 6);
        const double beta = (trial % 2) ? 0.7 : 6.0;
        const auto c = spectral_correlator(d, beta, 201);
        const int n = c.n_tau();
        for (int j = 0; j < n; ++j)
            CHECK(std::abs(c.values[j] - c.values[n - 1 - j]) <= 1e-10 * c.values[0]);
        for (int j = 0; j + 1 <= (n - 1) / 2; ++j)
            CHECK(c.values[j + 1] <= c.values[j] * (1.0 + 1e-13));
        CHECK(c.values[0] > 0.0);
    }
}

TEST_CASE("band_density: flat bands coalesce; band-space noise sum rule") {
    const auto grid = build_band_grid(BlochModel::flat_chern(1.0, 1.0), 64);
    const auto d = band_density(grid);
    REQUIRE(d.peaks.size() == 1);
    CHECK(d.peaks[0].omega == doctest::Approx(1.0).epsilon(1e-13));
    const double gxx_sum = bz_sum(grid, [](const BandPoint& p) { return p.gxx; });
    CHECK(d.peaks[0].weight == doctest::Approx(pi * gxx_sum).epsilon(1e-12));

    // S(0) from the density equals the band-space formula
    const double beta = 5.0;
    const auto qgrid = build_band_grid(BlochModel::qwz(1.0), 64);
    const auto qd = band_density(qgrid);
    const double s0 = spectral_value(qd, 0.0, beta);
    const double band_form = bz_sum(qgrid, [beta](const BandPoint& p) {
        return p.gap * p.gap * p.gxx / std::tanh(0.5 * beta * p.gap);
    });
    CHECK(s0 == doctest::Approx(band_form).epsilon(1e-10));

    // zero metric -> empty density -> empty-density error downstream
    const auto tgrid = build_band_grid(BlochModel::trivial_flat(1.0), 32);
    const auto td = band_density(tgrid);
    CHECK(td.empty());
    CHECK_THROWS_AS(spectral_correlator(td, beta, 101), empty_density_error);
}

TEST_CASE("matsubara_transform: quadrature oracle, evenness, tail") {
    const double beta = 3.0;
    const SpectralDensity d({{0.9, 0.6}, {2.4, 1.7}});
    for (long n : {0L, 1L, 2L, 5L}) {
        const double wn = matsubara_frequency(beta, n);
        const double oracle = oracles::simpson(
            [&](double tau) { return std::cos(wn * tau) * spectral_value(d, tau, beta); }, 0.0,
            beta, 20000);
        CHECK(matsubara_transform(d, beta, n) == doctest::Approx(oracle).epsilon(1e-9));
        CHECK(matsubara_transform(d, beta, n) == matsubara_transform(d, beta, -n));
        CHECK(matsubara_transform(d, beta, n) >= 0.0);
    }

    // materialized series: even, real, nonnegative
    const auto series = matsubara_series(d, beta, 128);
    REQUIRE(series.terms.size() == 257);
    for (long n = 0; n <= 128; ++n) {
        CHECK(series.at(n) == series.at(-n));
        CHECK(series.at(n) >= 0.0);
        CHECK(series.at(n) == matsubara_transform(d, beta, n));
    }

    // asymptotic 1/w_n^2 tail: S(i w_n) w_n^2 -> (1/pi) sum_p 2 w_p omega_p^2
    double c_inf = 0.0;
    for (const auto& p : d.peaks) c_inf += 2.0 * p.weight * p.omega * p.omega / pi;
    const double w4096 = matsubara_frequency(beta, 4096);
    CHECK(matsubara_transform(d, beta, 4096) * w4096 * w4096 ==
          doctest::Approx(c_inf).epsilon(1e-4));
    // local decay exponent = -2
    const double ratio = matsubara_transform(d, beta, 2048) / matsubara_transform(d, beta, 4096);
    CHECK(ratio == doctest::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("alternating resummation reaches the midpoint; direct sum reaches S(0)") {
    const double beta = 5.0;
    const SpectralDensity d({{1.0, pi}});  // Delta = 1, g = 1
    const double mid = alternating_matsubara_sum(d, beta, 4096, true);
    CHECK(mid == doctest::Approx(1.0 / std::sinh(2.5)).epsilon(1e-10));

    const double s0 = direct_matsubara_sum(d, beta, 4096, true);
    CHECK(s0 == doctest::Approx(1.0 / std::tanh(2.5)).epsilon(1e-10));

    CHECK(alternating_matsubara_sum(SpectralDensity{}, beta, 4096, true) == 0.0);
    CHECK(direct_matsubara_sum(SpectralDensity{}, beta, 4096, true) == 0.0);
    CHECK_THROWS_AS(alternating_matsubara_sum(d, beta, 32, true), domain_error);

    // raw partial sums approach S(0) from below
    double prev = 0.0;
    for (long n : {64L, 256L, 1024L, 4096L}) {
        const double p = direct_matsubara_sum(d, beta, n, false);
        CHECK(p > prev);
        CHECK(p < 1.0 / std::tanh(2.5));
        prev = p;
    }
}

TEST_CASE("alternating identity on randomized densities") {
    std::mt19937_64 rng(17);
    const double betas[3] = {0.5, 2.0, 10.0};
    for (int i = 0; i < 30; ++i) {
        const auto d = random_density(rng, 12);
        const double beta = betas[i % 3];
        const double accel = alternating_matsubara_sum(d, beta, 4096, true);
        const double direct = spectral_value(d, 0.5 * beta, beta);
        CHECK(std::abs(accel - direct) <= 1e-8 * std::abs(direct));
    }
}

TEST_CASE("weighted-omega^2 alternating sum equals the midpoint curvature") {
    const double beta = 5.0;
    const SpectralDensity single({{1.0, pi}});
    CHECK(alternating_curvature_sum(single, beta, 4096) ==
          doctest::Approx(1.0 / std::sinh(2.5)).epsilon(1e-8));

    std::mt19937_64 rng(23);
    for (int i = 0; i < 10; ++i) {
        const auto d = random_density(rng, 8);
        const double b = (i % 2) ? 2.0 : 0.5;
        const double lhs = alternating_curvature_sum(d, b, 4096);
        const double rhs = curvature_at_midpoint(d, b);
        CHECK(std::abs(lhs - rhs) <= 1e-6 * std::abs(rhs));
    }
}

TEST_CASE("curvature_at_midpoint: closed form, linearity, finite differences") {
    const double delta = 1.4, g = 0.6, beta = 3.0;
    const SpectralDensity d({{delta, pi * delta * g}});
    const double curv = curvature_at_midpoint(d, beta);
    CHECK(curv == doctest::Approx(std::pow(delta, 4) * g / std::sinh(0.5 * beta * delta))
                      .epsilon(1e-13));

    SpectralDensity doubled({{delta, 2.0 * pi * delta * g}});
    CHECK(curvature_at_midpoint(doubled, beta) == doctest::Approx(2.0 * curv).epsilon(1e-14));

    std::mt19937_64 rng(41);
    for (int i = 0; i < 6; ++i) {
        const auto dd = random_density(rng, 5);
        const double b = (i % 2) ? 1.0 : 4.0;
        const double fd = oracles::second_derivative(
            [&](double tau) { return spectral_value(dd, tau, b); }, 0.5 * b, b / 200.0);
        CHECK(curvature_at_midpoint(dd, b) == doctest::Approx(fd).epsilon(1e-5));
    }

    CHECK_THROWS_AS(curvature_at_midpoint(SpectralDensity{}, beta), empty_density_error);
}

TEST_CASE("tau correlator CSV export") {
    const SpectralDensity d({{1.0, pi}});
    const auto c = spectral_correlator(d, 5.0, 11);
    std::ostringstream os;
    write_csv(c, os);
    const std::string s = os.str();
    CHECK(s.rfind("tau,S,s_normalized\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 12);
    // normalized column starts at 1
    std::istringstream is(s);
    std::string header, first;
    std::getline(is, header);
    std::getline(is, first);
    CHECK(first.substr(first.rfind(',') + 1) == "1");
}
