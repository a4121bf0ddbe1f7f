// Midpoint-curvature ratio rho0, the universal supremum bound and its
// constants, and higher-order nested-moment bounds.
//
//   rho0 = S''(beta/2) / S(0)
//        = [sum_k gap^4 G_xx / sinh(beta gap / 2)] / [sum_k gap^2 G_xx / tanh(beta gap / 2)]
//
// The order-n bound compares integrands pointwise: with x = beta omega / 2,
// omega^n / cosh x <= (2/beta)^n sup_x (x^n / cosh x), so the rescaled
// curvature rho0 beta^2 / 4 never exceeds sup (x^2 / cosh x) ~ 1.06.
#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <vector>

#include "qcurv/errors.hpp"
#include "qcurv/geometry.hpp"
#include "qcurv/matsubara.hpp"

namespace qcurv {

struct BoundConstants {
    int order;        // n >= 1
    double x_star;    // root of x tanh x = n
    double sup_val;   // sup_{x>0} x^n / cosh x = x_star^n / cosh(x_star)
    double a_const;   // 2 sqrt(sup_val); the dimensionless prefactor, ~ 2 at n = 2
};

inline BoundConstants bound_constants(int n) {
    if (n < 1 || n > 6) throw domain_error("bound_constants: order must be in [1, 6]");
    double lo = 1e-6, hi = 50.0;
    // x tanh x is monotone increasing; bracket is fixed for n <= 6
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        (mid * std::tanh(mid) < n ? lo : hi) = mid;
    }
    const double x = 0.5 * (lo + hi);
    const double sup = std::pow(x, n) / std::cosh(x);
    return {n, x, sup, 2.0 * std::sqrt(sup)};
}

inline double rho0_band(const BandGrid& grid, double beta) {
    if (beta <= 0.0) throw domain_error("rho0_band: beta must be > 0");
    KahanSum num, den;
    const double w = grid.weight();
    for (const auto& p : grid.points) {
        const double g2 = p.gap * p.gap;
        num.add(g2 * p.gxx * omega_pow_over_sinh(2, p.gap, beta) * w);
        const double x = 0.5 * beta * p.gap;
        den.add(g2 * p.gxx / std::tanh(x) * w);
    }
    if (den.value() < 1e-14)
        throw zero_noise_error("rho0_band: no quantum noise channel (zero metric weight)");
    return num.value() / den.value();
}

// Equal-time correlator S(0) of a delta-peak density.
inline double spectral_noise(const SpectralDensity& d, double beta) {
    KahanSum s;
    for (const auto& p : d.peaks) s.add(p.weight * kernel(0, p.omega, 0.0, beta));
    return s.value() / pi;
}

inline double rho0_spectral(const SpectralDensity& d, double beta) {
    if (d.empty()) throw zero_noise_error("rho0_spectral: empty spectral density");
    const double s0 = spectral_noise(d, beta);
    if (s0 < 1e-14) throw zero_noise_error("rho0_spectral: vanishing total quantum noise");
    return curvature_at_midpoint(d, beta) / s0;
}

// Order-n nested moment at the midpoint: (1/pi) sum_p w_p omega^(n+1) / sinh(beta omega / 2).
inline double nested_moment_midpoint(const SpectralDensity& d, double beta, int n) {
    KahanSum s;
    for (const auto& p : d.peaks) s.add(p.weight * omega_pow_over_sinh(n + 1, p.omega, beta));
    return s.value() / pi;
}

// Margin of the universal bound: (2/beta)^n sup - [n-th moment at beta/2]/S(0).
// Nonnegative (up to roundoff) for every admissible density.
inline double check_bound(const SpectralDensity& d, double beta, int n = 2) {
    if (d.empty()) throw zero_noise_error("check_bound: empty spectral density");
    const double s0 = spectral_noise(d, beta);
    if (s0 < 1e-14) throw zero_noise_error("check_bound: vanishing total quantum noise");
    const BoundConstants bc = bound_constants(n);
    return std::pow(2.0 / beta, n) * bc.sup_val - nested_moment_midpoint(d, beta, n) / s0;
}

struct SweepRow {
    double delta;
    double rho0;
    double rho0_beta2_over4;
    double margin;
};

// rho0 of a single uniform-gap density across a gap sweep; the maximum of
// rho0 beta^2 / 4 sits at delta = 2 x_star / beta and equals sup_val.
inline std::vector<SweepRow> saturation_sweep(double beta, double delta_lo, double delta_hi,
                                              int steps) {
    if (steps < 10) throw domain_error("saturation_sweep: need at least 10 steps");
    if (!(delta_lo > 0.0) || !(delta_hi > delta_lo))
        throw domain_error("saturation_sweep: need 0 < delta_lo < delta_hi");
    const BoundConstants bc = bound_constants(2);
    std::vector<SweepRow> rows;
    rows.reserve(steps);
    for (int i = 0; i < steps; ++i) {
        const double delta = delta_lo + (delta_hi - delta_lo) * i / (steps - 1);
        const SpectralDensity d({{delta, 1.0}});
        const double r = rho0_spectral(d, beta);
        rows.push_back({delta, r, r * beta * beta / 4.0, 4.0 / (beta * beta) * bc.sup_val - r});
    }
    return rows;
}

inline void write_csv(const std::vector<SweepRow>& rows, std::ostream& os) {
    os << "delta,rho0,rho0_beta2_over4,margin\n";
    char buf[128];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g\n", r.delta, r.rho0,
                      r.rho0_beta2_over4, r.margin);
        os << buf;
    }
}

}  // namespace qcurv
