// Quantum metric, Berry curvature, Chern number and gap-resolved BZ grids.
//
// Everything is evaluated from the analytic dhat-field of the model, so no
// gauge fixing enters: G_ij = (1/4) d_i dhat . d_j dhat and the curvature is
// the solid-angle density of dhat. Orientation is pinned by the reference
// case chern_number(QWZ(m=1)) = +1; berry_curvature carries the same
// orientation, so sum_k Omega(k) (2pi/n)^2 = 2pi C for every gapped model.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <ostream>
#include <vector>

#include "qcurv/bloch.hpp"
#include "qcurv/errors.hpp"
#include "qcurv/series.hpp"

namespace qcurv {

namespace detail {

// Orientation pinned by the reference case chern_number(QWZ(m=1)) = +1.
// The FHS plaquette sum of the lower band lands there as computed below; the
// raw solid-angle density of the dhat-map has the opposite sign (its integral
// gives degree -1 at m = 1), so the curvature carries this factor.
constexpr double curvature_orientation = -1.0;

inline UnitField unit_field(const BlochModel& model, const KPoint& k) {
    switch (model.kind) {
        case ModelKind::QWZ:
        case ModelKind::FlatChern:
            // flattening rescales |d| only; dhat and its derivatives coincide
            return qwz_unit_field(model.m, k);
        default:
            return UnitField{{0.0, 0.0, 1.0}, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}};
    }
}

}  // namespace detail

struct Metric {
    double gxx, gxy, gyy;
};

inline Metric quantum_metric(const BlochModel& model, const KPoint& k) {
    const auto f = detail::unit_field(model, k);
    return {0.25 * dot(f.dx, f.dx), 0.25 * dot(f.dx, f.dy), 0.25 * dot(f.dy, f.dy)};
}

inline double berry_curvature(const BlochModel& model, const KPoint& k) {
    const auto f = detail::unit_field(model, k);
    return detail::curvature_orientation * 0.5 * dot(f.dhat, cross(f.dx, f.dy));
}

struct BandPoint {
    double kx, ky;
    double gap;
    double gxx, gxy, gyy;
    double omega;
};

// Per-point band data on a uniform n x n mesh over [0, 2pi)^2, row-major in
// (kx, ky). BZ sums downstream carry weight (2pi/n)^2 per point.
struct BandGrid {
    BlochModel model;
    int n = 0;
    std::vector<BandPoint> points;

    double weight() const { return (two_pi / n) * (two_pi / n); }
    const BandPoint& at(int i, int j) const { return points[static_cast<size_t>(i) * n + j]; }
};

inline BandGrid build_band_grid(const BlochModel& model, int n) {
    if (n < 16) throw domain_error("build_band_grid: mesh size must be >= 16");
    BandGrid grid;
    grid.model = model;
    grid.n = n;
    grid.points.reserve(static_cast<size_t>(n) * n);
    const double step = two_pi / n;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const KPoint k{i * step, j * step};
            const Bands b = bands(model, k);  // throws gap_closure_error with offending k
            const Metric g = quantum_metric(model, k);
            const double om = berry_curvature(model, k);
            grid.points.push_back({k.kx, k.ky, b.gap, g.gxx, g.gxy, g.gyy, om});
        }
    }
    return grid;
}

template <class F>
double bz_sum(const BandGrid& grid, F&& per_point) {
    KahanSum acc;
    for (const auto& p : grid.points) acc.add(per_point(p));
    return acc.value() * grid.weight();
}

struct ChernNumber {
    int c = 0;
    double residual = 0.0;  // distance of the plaquette sum from the nearest integer
};

// Fukui-Hatsuda-Suzuki link-variable invariant of the lower band.
inline ChernNumber chern_number(const BlochModel& model, int n) {
    if (n < 16) throw domain_error("chern_number: mesh size must be >= 16");
    const double step = two_pi / n;
    std::vector<std::array<cplx, 2>> u(static_cast<size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const KPoint k{i * step, j * step};
            const Vec3 d = d_vector(model, k);
            if (norm(d) < gap_floor)
                throw gap_closure_error("gap closes at k = (" + std::to_string(k.kx) + ", " +
                                            std::to_string(k.ky) + ")",
                                        k.kx, k.ky);
            u[static_cast<size_t>(i) * n + j] = lower_eigenvector(d);
        }

    auto overlap = [&](size_t a, size_t b) {
        const auto& ua = u[a];
        const auto& ub = u[b];
        return std::conj(ua[0]) * ub[0] + std::conj(ua[1]) * ub[1];
    };

    KahanSum field;
    for (int i = 0; i < n; ++i) {
        const int ip = (i + 1) % n;
        for (int j = 0; j < n; ++j) {
            const int jp = (j + 1) % n;
            const size_t k00 = static_cast<size_t>(i) * n + j;
            const size_t k10 = static_cast<size_t>(ip) * n + j;
            const size_t k11 = static_cast<size_t>(ip) * n + jp;
            const size_t k01 = static_cast<size_t>(i) * n + jp;
            const cplx loop = overlap(k00, k10) * overlap(k10, k11) * overlap(k11, k01) *
                              overlap(k01, k00);
            field.add(std::arg(loop));
        }
    }
    const double raw = field.value() / two_pi;
    const double nearest = std::round(raw);
    const double residual = std::abs(raw - nearest);
    if (residual > 1e-6)
        throw non_integer_chern_error("FHS sum is " + std::to_string(raw) +
                                      "; mesh too coarse or gap closing");
    return {static_cast<int>(nearest), residual};
}

inline void write_csv(const BandGrid& grid, std::ostream& os) {
    os << "kx,ky,gap,Gxx,Gxy,Gyy,Omega\n";
    char buf[192];
    for (const auto& p : grid.points) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", p.kx, p.ky,
                      p.gap, p.gxx, p.gxy, p.gyy, p.omega);
        os << buf;
    }
}

}  // namespace qcurv
