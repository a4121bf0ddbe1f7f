// Kubo-Mori inner product, Liouvillian moments, and the Mori-Lanczos
// continued fraction for the current resolvent
//
//   S(z) = (J | (z - L)^-1 | J) = (J|J) / (z - b1^2 / (z - b2^2 / ...)).
//
// Operators live as matrices in the energy eigenbasis, where the Liouvillian
// acts by elementwise multiplication with E_m - E_n. The inner product is the
// Duhamel closed form
//
//   (A|B) = (1/(Z beta)) sum_mn conj(A_mn) B_mn w_mn,
//   w_mn  = (e^{-beta E_n} - e^{-beta E_m}) / (E_m - E_n),  w_mm = beta e^{-beta E_m},
//
// equal to the tau-integral definition by KMS periodicity. Since J = i A with
// A real, the whole Krylov recursion stays in real arithmetic.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include "qcurv/bounds.hpp"
#include "qcurv/ed.hpp"
#include "qcurv/errors.hpp"

namespace qcurv {

namespace detail {

// w_mn / (Z beta) with the degenerate-level limit; energies enter shifted by
// E_0, which cancels against the shifted partition function.
inline Eigen::MatrixXd km_weight_matrix(const EDSystem& sys, double beta) {
    const auto th = sys.thermal(beta);
    const int d = sys.dim();
    Eigen::MatrixXd w(d, d);
    for (int m = 0; m < d; ++m)
        for (int n = 0; n < d; ++n) {
            const double de = sys.evals(m) - sys.evals(n);
            const double wmn =
                std::abs(de) < 1e-10 ? beta * th.boltz(m) : (th.boltz(n) - th.boltz(m)) / de;
            w(m, n) = wmn / (th.z * beta);
        }
    return w;
}

inline Eigen::MatrixXd liouville_factors(const EDSystem& sys) {
    const int d = sys.dim();
    Eigen::MatrixXd l(d, d);
    for (int m = 0; m < d; ++m)
        for (int n = 0; n < d; ++n) l(m, n) = sys.evals(m) - sys.evals(n);
    return l;
}

}  // namespace detail

// (A|B) for operators given in the energy eigenbasis. Real for Hermitian
// pairs, which is all the library uses.
inline double kubo_mori_inner(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b,
                              const EDSystem& sys, double beta) {
    if (a.rows() != sys.dim() || a.cols() != sys.dim() || b.rows() != sys.dim() ||
        b.cols() != sys.dim())
        throw domain_error("kubo_mori_inner: operator dimension mismatch");
    const Eigen::MatrixXd w = detail::km_weight_matrix(sys, beta);
    return (a.conjugate().cwiseProduct(b).cwiseProduct(w.cast<std::complex<double>>())).sum().real();
}

// (J | L^{2k} | J) >= 0.
inline double liouvillian_moment(const EDSystem& sys, double beta, int k) {
    if (k < 0 || k > 6) throw domain_error("liouvillian_moment: order must be in [0, 6]");
    const Eigen::MatrixXd w = detail::km_weight_matrix(sys, beta);
    const Eigen::MatrixXd l = detail::liouville_factors(sys);
    Eigen::MatrixXd term = sys.j_imag.cwiseProduct(sys.j_imag).cwiseProduct(w);
    if (k > 0) {
        const Eigen::MatrixXd l2k = l.array().pow(2 * k).matrix();
        term = term.cwiseProduct(l2k);
    }
    return term.sum();
}

struct MoriChain {
    double norm0 = 0.0;  // (J|J)
    double beta = 0.0;
    std::vector<double> b_sq;             // b_1^2 .. ; includes the terminating value if any
    std::optional<int> terminated_at;     // level k with b_k^2 below threshold (Krylov exhausted)
};

// Lanczos recursion in operator space with the Kubo-Mori metric, seeded by J.
// Orthogonalizes against the two previous vectors and runs one full
// reorthogonalization pass over the stored basis.
inline MoriChain mori_coefficients(const EDSystem& sys, double beta, int levels) {
    if (levels < 1 || levels > 6) throw domain_error("mori_coefficients: levels must be in [1, 6]");
    const Eigen::MatrixXd w = detail::km_weight_matrix(sys, beta);
    const Eigen::MatrixXd l = detail::liouville_factors(sys);
    auto inner = [&](const Eigen::MatrixXd& f, const Eigen::MatrixXd& g) {
        return f.cwiseProduct(g).cwiseProduct(w).sum();
    };

    MoriChain chain;
    chain.beta = beta;
    chain.norm0 = inner(sys.j_imag, sys.j_imag);
    if (chain.norm0 <= 1e-14)
        throw zero_current_norm_error("mori_coefficients: (J|J) vanishes");

    std::vector<Eigen::MatrixXd> basis;
    basis.push_back(sys.j_imag / std::sqrt(chain.norm0));
    Eigen::MatrixXd f_prev;
    double b_prev = 0.0;

    for (int k = 1; k <= levels; ++k) {
        Eigen::MatrixXd u = l.cwiseProduct(basis.back());
        if (k > 1) u -= b_prev * f_prev;
        u -= inner(basis.back(), u) * basis.back();
        for (const auto& fb : basis) u -= inner(fb, u) * fb;

        const double bk2 = inner(u, u);
        chain.b_sq.push_back(bk2);
        if (bk2 < 1e-12) {
            chain.terminated_at = k;
            break;
        }
        b_prev = std::sqrt(bk2);
        f_prev = basis.back();
        basis.push_back(u / b_prev);
    }
    return chain;
}

// Conductivity from the truncated continued fraction (terminator zero),
// evaluated at z = omega + i eta. The real part is the eta-broadened spectral
// weight beta * sum_j r_j * pi * delta_eta(omega - p_j) >= 0; it matches the
// Lehmann Re sigma_xx line by line.
inline std::complex<double> resolvent_sigma(const MoriChain& chain, double omega, double eta) {
    if (eta <= 0.0) throw domain_error("resolvent_sigma: eta must be > 0");
    if (chain.b_sq.empty()) throw domain_error("resolvent_sigma: chain has no levels");
    const std::complex<double> z(omega, eta);
    std::complex<double> g = z;
    for (auto it = chain.b_sq.rbegin(); it != chain.b_sq.rend(); ++it) g = z - *it / g;
    const std::complex<double> s = chain.norm0 / g;
    return std::complex<double>(0.0, chain.beta) * s;
}

// <(L^n J)(tau) J> by Lehmann summation; for n = 2 this is the second
// tau-derivative of <J(tau) J(0)> at every tau.
inline double nested_correlator(const EDSystem& sys, int n, double tau, double beta) {
    if (n < 0 || n > 6) throw domain_error("nested_correlator: order must be in [0, 6]");
    if (tau < 0.0 || tau > beta) throw domain_error("nested_correlator: tau outside [0, beta]");
    const auto th = sys.thermal(beta);
    const double e0 = sys.evals(0);
    const int d = sys.dim();
    double sum = 0.0;
    for (int m = 0; m < d; ++m) {
        const double em = sys.evals(m) - e0;
        for (int nn = 0; nn < d; ++nn) {
            const double a2 = sys.j_imag(m, nn) * sys.j_imag(m, nn);
            if (a2 == 0.0) continue;
            const double en = sys.evals(nn) - e0;
            const double de = sys.evals(m) - sys.evals(nn);
            double f = 1.0;
            for (int i = 0; i < n; ++i) f *= de;
            sum += std::exp(-(beta - tau) * em - tau * en) * f * a2;
        }
    }
    return sum / th.z;
}

struct B1Bound {
    double b1_sq = 0.0;
    double midpoint_ratio = 0.0;  // rho(beta/2) = <(L^2 J)(beta/2) J> / <J^2>
    bool holds = false;           // b1^2 >= midpoint_ratio - 1e-10
    bool universal_holds = false; // midpoint_ratio <= (4/beta^2) sup + 1e-10
    double bound_margin = 0.0;    // (4/beta^2) sup - midpoint_ratio
};

inline B1Bound b1_bound_check(const EDSystem& sys, double beta) {
    const MoriChain chain = mori_coefficients(sys, beta, 1);
    B1Bound r;
    r.b1_sq = chain.b_sq.front();
    const double noise = nested_correlator(sys, 0, 0.0, beta);
    r.midpoint_ratio = nested_correlator(sys, 2, 0.5 * beta, beta) / noise;
    const BoundConstants bc = bound_constants(2);
    r.bound_margin = 4.0 / (beta * beta) * bc.sup_val - r.midpoint_ratio;
    r.holds = r.b1_sq >= r.midpoint_ratio - 1e-10;
    r.universal_holds = r.bound_margin >= -1e-10;
    return r;
}

}  // namespace qcurv
