// Two-band lattice Hamiltonians H(k) = d(k).sigma and their analytic derivatives.
//
// Catalog:
//   QWZ          d(k) = (sin kx, sin ky, m + cos kx + cos ky)
//   FlatChern    d(k) = (delta/2) * dhat_QWZ(k)   (spectrally flattened QWZ)
//   TrivialFlat  d(k) = (0, 0, delta/2)           (atomic limit)
//
// Units: hbar = k_B = e = 1; energies in units of the QWZ hopping, lattice
// constant 1, k in [0, 2pi).
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "qcurv/errors.hpp"

namespace qcurv {

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;

constexpr double two_pi = 2.0 * std::numbers::pi;

// Gaps below this are treated as closures; keeps every sum-rule denominator finite.
constexpr double gap_floor = 1e-9;

inline double dot(const Vec3& a, const Vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline Vec3 scaled(const Vec3& a, double s) { return {s * a[0], s * a[1], s * a[2]}; }

// 2x2 complex matrix, row-major.
struct Mat2 {
    std::array<cplx, 4> a{};

    cplx& operator()(int i, int j) { return a[2 * i + j]; }
    const cplx& operator()(int i, int j) const { return a[2 * i + j]; }

    static Mat2 from_d(const Vec3& d) {
        Mat2 h;
        h(0, 0) = cplx(d[2], 0.0);
        h(0, 1) = cplx(d[0], -d[1]);
        h(1, 0) = cplx(d[0], d[1]);
        h(1, 1) = cplx(-d[2], 0.0);
        return h;
    }
};

struct KPoint {
    double kx = 0.0;
    double ky = 0.0;

    // wrap into the fundamental domain [0, 2pi)
    static KPoint wrapped(double kx, double ky) {
        auto wrap = [](double k) {
            k = std::fmod(k, two_pi);
            if (k < 0.0) k += two_pi;
            return k;
        };
        return {wrap(kx), wrap(ky)};
    }
};

enum class ModelKind { QWZ, FlatChern, TrivialFlat };

struct BlochModel {
    ModelKind kind = ModelKind::QWZ;
    double m = 1.0;        // QWZ mass parameter
    double delta = 1.0;    // flat-band gap (FlatChern, TrivialFlat)

    static BlochModel qwz(double m) { return {ModelKind::QWZ, m, 0.0}; }

    static BlochModel flat_chern(double m, double delta) {
        if (delta <= 0.0) throw domain_error("FlatChern requires delta > 0");
        return {ModelKind::FlatChern, m, delta};
    }

    static BlochModel trivial_flat(double delta) {
        if (delta <= 0.0) throw domain_error("TrivialFlat requires delta > 0");
        return {ModelKind::TrivialFlat, 0.0, delta};
    }

    std::string name() const {
        switch (kind) {
            case ModelKind::QWZ: return "qwz";
            case ModelKind::FlatChern: return "flatchern";
            default: return "trivialflat";
        }
    }
};

namespace detail {

inline Vec3 qwz_d(double m, const KPoint& k) {
    return {std::sin(k.kx), std::sin(k.ky), m + std::cos(k.kx) + std::cos(k.ky)};
}

inline Vec3 qwz_ddx(const KPoint& k) { return {std::cos(k.kx), 0.0, -std::sin(k.kx)}; }
inline Vec3 qwz_ddy(const KPoint& k) { return {0.0, std::cos(k.ky), -std::sin(k.ky)}; }

inline void require_normalizable(const Vec3& d, const KPoint& k) {
    if (norm(d) < gap_floor)
        throw gap_closure_error("gap closes at k = (" + std::to_string(k.kx) + ", " +
                                    std::to_string(k.ky) + ")",
                                k.kx, k.ky);
}

// dhat and its k-derivatives for the underlying QWZ d-vector.
struct UnitField {
    Vec3 dhat, dx, dy;
};

inline UnitField qwz_unit_field(double m, const KPoint& k) {
    const Vec3 d = qwz_d(m, k);
    require_normalizable(d, k);
    const double r = norm(d);
    const Vec3 ddx = qwz_ddx(k);
    const Vec3 ddy = qwz_ddy(k);
    // d/dk (d/|d|) = dd/r - d (d.dd)/r^3
    const double cx = dot(d, ddx) / (r * r * r);
    const double cy = dot(d, ddy) / (r * r * r);
    UnitField f;
    f.dhat = scaled(d, 1.0 / r);
    for (int i = 0; i < 3; ++i) {
        f.dx[i] = ddx[i] / r - d[i] * cx;
        f.dy[i] = ddy[i] / r - d[i] * cy;
    }
    return f;
}

}  // namespace detail

inline Vec3 d_vector(const BlochModel& model, const KPoint& k) {
    switch (model.kind) {
        case ModelKind::QWZ:
            return detail::qwz_d(model.m, k);
        case ModelKind::FlatChern: {
            const Vec3 d = detail::qwz_d(model.m, k);
            detail::require_normalizable(d, k);
            return scaled(d, 0.5 * model.delta / norm(d));
        }
        default:
            return {0.0, 0.0, 0.5 * model.delta};
    }
}

struct Bands {
    double e_minus, e_plus, gap;
};

inline Bands bands(const BlochModel& model, const KPoint& k) {
    const Vec3 d = d_vector(model, k);
    const double r = norm(d);
    if (r < gap_floor)
        throw gap_closure_error("gap closes at k = (" + std::to_string(k.kx) + ", " +
                                    std::to_string(k.ky) + ")",
                                k.kx, k.ky);
    return {-r, r, 2.0 * r};
}

enum class Dir { x, y };

// Analytic d(k) derivative; velocity matrix is (d_i d).sigma.
inline Vec3 d_vector_derivative(const BlochModel& model, const KPoint& k, Dir dir) {
    switch (model.kind) {
        case ModelKind::QWZ:
            return dir == Dir::x ? detail::qwz_ddx(k) : detail::qwz_ddy(k);
        case ModelKind::FlatChern: {
            const auto f = detail::qwz_unit_field(model.m, k);
            return scaled(dir == Dir::x ? f.dx : f.dy, 0.5 * model.delta);
        }
        default:
            return {0.0, 0.0, 0.0};
    }
}

inline Mat2 velocity(const BlochModel& model, const KPoint& k, Dir dir) {
    return Mat2::from_d(d_vector_derivative(model, k, dir));
}

// Central-difference cross-check for the analytic velocity.
inline Mat2 velocity_fd(const BlochModel& model, const KPoint& k, Dir dir, double h = 1e-5) {
    KPoint kp = k, km = k;
    (dir == Dir::x ? kp.kx : kp.ky) += h;
    (dir == Dir::x ? km.kx : km.ky) -= h;
    const Vec3 dp = d_vector(model, kp);
    const Vec3 dm = d_vector(model, km);
    Vec3 dd;
    for (int i = 0; i < 3; ++i) dd[i] = (dp[i] - dm[i]) / (2.0 * h);
    return Mat2::from_d(dd);
}

// Lower-band eigenvector of d.sigma, (E = -|d|), in the numerically safer of two gauges.
inline std::array<cplx, 2> lower_eigenvector(const Vec3& d) {
    const double r = norm(d);
    // candidates: (-dx + i dy, dz + r) and (dz - r, dx + i dy)
    const double n1 = d[0] * d[0] + d[1] * d[1] + (d[2] + r) * (d[2] + r);
    const double n2 = (d[2] - r) * (d[2] - r) + d[0] * d[0] + d[1] * d[1];
    std::array<cplx, 2> u;
    if (n1 >= n2) {
        u = {cplx(-d[0], d[1]), cplx(d[2] + r, 0.0)};
    } else {
        u = {cplx(d[2] - r, 0.0), cplx(d[0], d[1])};
    }
    const double nn = std::sqrt(std::norm(u[0]) + std::norm(u[1]));
    u[0] /= nn;
    u[1] /= nn;
    return u;
}

}  // namespace qcurv
