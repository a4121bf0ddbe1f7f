// Imaginary-time correlators from spectral densities, Matsubara transforms,
// and the alternating resummation that reaches the thermal-circle midpoint.
//
// Densities are finite sums of delta peaks: each stored (omega_p, w_p) stands
// for the symmetric pair +-omega_p of Re sigma_xx, so
//
//     S(tau)      = (1/pi) sum_p w_p omega_p cosh[(beta/2 - tau) omega_p] / sinh[beta omega_p / 2]
//     S(i w_n)    = (1/pi) sum_p w_p 2 omega_p^2 / (omega_p^2 + w_n^2)
//     S''(beta/2) = (1/pi) sum_p w_p omega_p^3 / sinh[beta omega_p / 2]
//
// Resummations follow the (1/beta) sum_n convention throughout.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <vector>

#include "qcurv/errors.hpp"
#include "qcurv/geometry.hpp"
#include "qcurv/series.hpp"

namespace qcurv {

constexpr double pi = std::numbers::pi;

// omega^(2m+1) cosh[(beta/2 - tau) omega] / sinh[beta omega / 2], evaluated in
// overflow-safe exponential form. Below |beta omega| = 1e-6 the removable
// omega -> 0 limit is substituted: 2/beta for m = 0, zero for m >= 1.
inline double kernel(int m, double omega, double tau, double beta) {
    if (m < 0 || m > 6) throw domain_error("kernel: order m must be in [0, 6]");
    if (tau < 0.0 || tau > beta) throw domain_error("kernel: tau outside [0, beta]");
    omega = std::abs(omega);
    if (beta * omega < 1e-6) return m == 0 ? 2.0 / beta : 0.0;
    const double x = 0.5 * beta * omega;
    const double a = (0.5 * beta - tau) * omega;  // |a| <= x
    const double ratio = (std::exp(a - x) + std::exp(-a - x)) / -std::expm1(-2.0 * x);
    double pw = omega;
    for (int i = 0; i < m; ++i) pw *= omega * omega;
    return pw * ratio;
}

// omega^p / sinh(beta omega / 2) for integer p >= 1 (stable form).
inline double omega_pow_over_sinh(int p, double omega, double beta) {
    if (p < 1) throw domain_error("omega_pow_over_sinh: power must be >= 1");
    omega = std::abs(omega);
    if (beta * omega < 1e-6) return p == 1 ? 2.0 / beta : 0.0;
    const double x = 0.5 * beta * omega;
    const double inv_sinh = 2.0 * std::exp(-x) / -std::expm1(-2.0 * x);
    double pw = 1.0;
    for (int i = 0; i < p; ++i) pw *= omega;
    return pw * inv_sinh;
}

struct SpectralPeak {
    double omega;   // > 0
    double weight;  // >= 0, weight of Re sigma_xx at +-omega
};

struct SpectralDensity {
    std::vector<SpectralPeak> peaks;

    SpectralDensity() = default;
    explicit SpectralDensity(std::vector<SpectralPeak> p) : peaks(std::move(p)) {
        for (const auto& pk : peaks) {
            if (!(pk.omega > 0.0)) throw domain_error("SpectralDensity: peak frequency must be > 0");
            if (pk.weight < 0.0) throw domain_error("SpectralDensity: negative weight");
        }
    }

    bool empty() const { return peaks.empty(); }

    double total_weight() const {
        KahanSum s;
        for (const auto& p : peaks) s.add(p.weight);
        return s.value();
    }
};

// S(tau) sampled on the uniform grid tau_j = j beta / (n_tau - 1); n_tau is
// kept odd so tau = beta/2 is an exact grid point.
struct TauCorrelator {
    double beta = 0.0;
    std::vector<double> values;

    int n_tau() const { return static_cast<int>(values.size()); }
    double tau(int j) const { return beta * j / (n_tau() - 1); }
    double at_zero() const { return values.front(); }
    double at_midpoint() const { return values[(values.size() - 1) / 2]; }
};

inline double spectral_value(const SpectralDensity& d, double tau, double beta) {
    KahanSum s;
    for (const auto& p : d.peaks) s.add(p.weight * kernel(0, p.omega, tau, beta));
    return s.value() / pi;
}

inline TauCorrelator spectral_correlator(const SpectralDensity& d, double beta, int n_tau) {
    if (d.empty() || d.total_weight() <= 0.0)
        throw empty_density_error("spectral_correlator: empty spectral density");
    if (n_tau < 3 || n_tau % 2 == 0)
        throw domain_error("spectral_correlator: n_tau must be odd and >= 3");
    TauCorrelator c;
    c.beta = beta;
    c.values.resize(n_tau);
    for (int j = 0; j < n_tau; ++j) c.values[j] = spectral_value(d, c.tau(j), beta);
    return c;
}

// One peak per mesh point: omega = gap, weight = pi gap G_xx (2pi/n)^2.
// Coinciding frequencies are merged and negligible weights dropped, so flat
// bands coalesce into a single line.
inline SpectralDensity band_density(const BandGrid& grid) {
    std::vector<SpectralPeak> raw;
    raw.reserve(grid.points.size());
    const double w = grid.weight();
    for (const auto& p : grid.points) {
        const double weight = pi * p.gap * p.gxx * w;
        raw.push_back({p.gap, weight});
    }
    std::sort(raw.begin(), raw.end(),
              [](const SpectralPeak& a, const SpectralPeak& b) { return a.omega < b.omega; });

    std::vector<SpectralPeak> merged;
    for (const auto& p : raw) {
        if (!merged.empty() && p.omega - merged.back().omega <= 1e-12 * p.omega)
            merged.back().weight += p.weight;
        else
            merged.push_back(p);
    }
    double wmax = 0.0;
    for (const auto& p : merged) wmax = std::max(wmax, p.weight);
    std::vector<SpectralPeak> kept;
    for (const auto& p : merged)
        if (p.weight >= 1e-14 * wmax && p.weight > 0.0) kept.push_back(p);

    SpectralDensity d;
    d.peaks = std::move(kept);
    return d;
}

inline double matsubara_frequency(double beta, long n) { return two_pi * n / beta; }

// S(i w_n): closed form of the tau-integral of the kernel, peak by peak.
inline double matsubara_transform(const SpectralDensity& d, double beta, long n) {
    const double wn = matsubara_frequency(beta, n);
    KahanSum s;
    for (const auto& p : d.peaks)
        s.add(p.weight * 2.0 * p.omega * p.omega / (p.omega * p.omega + wn * wn));
    return s.value() / pi;
}

// Materialized transform on the symmetric index window n = -N..N; terms are
// real, nonnegative, and even in n by construction.
struct MatsubaraSeries {
    double beta = 0.0;
    long n_max = 0;
    std::vector<double> terms;  // index n + n_max

    double at(long n) const { return terms[static_cast<std::size_t>(n + n_max)]; }
};

inline MatsubaraSeries matsubara_series(const SpectralDensity& d, double beta, long n_max) {
    MatsubaraSeries s;
    s.beta = beta;
    s.n_max = n_max;
    s.terms.resize(2 * static_cast<std::size_t>(n_max) + 1);
    for (long n = 0; n <= n_max; ++n) {
        const double v = matsubara_transform(d, beta, n);
        s.terms[static_cast<std::size_t>(n_max + n)] = v;
        s.terms[static_cast<std::size_t>(n_max - n)] = v;
    }
    return s;
}

namespace detail {

// Partial sums of (1/beta) sum_{|n| <= N} t_n where the caller maps the pair
// +-n to one term; index j holds the sum truncated at |n| = j.
template <class TermFn>
std::vector<double> matsubara_partials(long n_max, TermFn&& term) {
    std::vector<double> partials(static_cast<std::size_t>(n_max) + 1);
    KahanSum acc;
    acc.add(term(0L));
    partials[0] = acc.value();
    for (long n = 1; n <= n_max; ++n) {
        acc.add(term(n));
        partials[static_cast<std::size_t>(n)] = acc.value();
    }
    return partials;
}

// Accelerated limit of an alternating-tail partial-sum sequence plus a
// consistency estimate from a window shifted one full window back.
inline double euler_tail_limit(const std::vector<double>& partials, const char* what) {
    const long n_max = static_cast<long>(partials.size()) - 1;
    const long window = std::min(64L, n_max / 2);
    const double* base = partials.data();
    const double a1 = euler_average(base + (n_max - window), window + 1);
    const double a2 = euler_average(base + (n_max - 2 * window), window + 1);
    const double scale = std::max(std::abs(a1), std::abs(a2));
    if (scale > 0.0 && std::abs(a1 - a2) > 1e-6 * scale)
        throw not_converged_error(std::string(what) +
                                  ": accelerated window estimates disagree beyond 1e-6");
    return a1;
}

}  // namespace detail

// (1/beta) sum_{n=-N..N} (-1)^n S(i w_n). Accelerated, this equals S(beta/2);
// the raw truncation converges like 1/N^2.
inline double alternating_matsubara_sum(const SpectralDensity& d, double beta, long n_max,
                                        bool accelerate = true) {
    if (n_max < 64) throw domain_error("alternating_matsubara_sum: N must be >= 64");
    if (d.empty()) return 0.0;
    auto term = [&](long n) {
        const double s = matsubara_transform(d, beta, n);
        const double sign = (n % 2 == 0) ? 1.0 : -1.0;
        return (n == 0 ? 1.0 : 2.0) * sign * s / beta;
    };
    const auto partials = detail::matsubara_partials(n_max, term);
    if (!accelerate) return partials.back();
    return detail::euler_tail_limit(partials, "alternating_matsubara_sum");
}

// (1/beta) sum_{n=-N..N} S(i w_n) -> S(0) from below; the accelerated variant
// removes the 1/N tail by Richardson extrapolation over partial sums.
inline double direct_matsubara_sum(const SpectralDensity& d, double beta, long n_max,
                                   bool accelerate = true) {
    if (n_max < 64) throw domain_error("direct_matsubara_sum: N must be >= 64");
    if (d.empty()) return 0.0;
    auto term = [&](long n) {
        return (n == 0 ? 1.0 : 2.0) * matsubara_transform(d, beta, n) / beta;
    };
    const auto partials = detail::matsubara_partials(n_max, term);
    if (!accelerate) return partials.back();

    auto extrapolate = [&](int nodes) {
        std::vector<double> xs, ys;
        long n = n_max;
        for (int i = 0; i < nodes; ++i, n /= 2) {
            xs.push_back(1.0 / static_cast<double>(n));
            ys.push_back(partials[static_cast<std::size_t>(n)]);
        }
        return extrapolate_to_zero(std::move(xs), std::move(ys));
    };
    const double a1 = extrapolate(6);
    const double a2 = extrapolate(5);
    const double scale = std::max(std::abs(a1), std::abs(a2));
    if (scale > 0.0 && std::abs(a1 - a2) > 1e-6 * scale)
        throw not_converged_error("direct_matsubara_sum: extrapolants disagree beyond 1e-6");
    return a1;
}

// (1/beta) sum_n (-1)^(n+1) w_n^2 S(i w_n): the curvature numerator. The terms
// tend to an oscillating constant, so only the accelerated (Abel) limit is
// meaningful.
inline double alternating_curvature_sum(const SpectralDensity& d, double beta, long n_max) {
    if (n_max < 64) throw domain_error("alternating_curvature_sum: N must be >= 64");
    if (d.empty()) return 0.0;
    auto term = [&](long n) {
        if (n == 0) return 0.0;
        const double wn = matsubara_frequency(beta, n);
        const double sign = (n % 2 == 0) ? -1.0 : 1.0;
        return 2.0 * sign * wn * wn * matsubara_transform(d, beta, n) / beta;
    };
    const auto partials = detail::matsubara_partials(n_max, term);
    return detail::euler_tail_limit(partials, "alternating_curvature_sum");
}

// d^2 S / d tau^2 at tau = beta/2; strictly >= 0.
inline double curvature_at_midpoint(const SpectralDensity& d, double beta) {
    if (d.empty() || d.total_weight() <= 0.0)
        throw empty_density_error("curvature_at_midpoint: empty spectral density");
    KahanSum s;
    for (const auto& p : d.peaks) s.add(p.weight * omega_pow_over_sinh(3, p.omega, beta));
    return s.value() / pi;
}

inline void write_csv(const TauCorrelator& c, std::ostream& os) {
    os << "tau,S,s_normalized\n";
    char buf[128];
    const double s0 = c.at_zero();
    for (int j = 0; j < c.n_tau(); ++j) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", c.tau(j), c.values[j],
                      c.values[j] / s0);
        os << buf;
    }
}

}  // namespace qcurv
