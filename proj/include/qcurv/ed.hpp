// Exact diagonalization of the spinless-fermion ring
//
//   H = -t sum_j (c+_{j+1} c_j + h.c.) + V sum_j n_j n_{j+1}
//   J = i t sum_j (c+_{j+1} c_j - h.c.)
//
// in a fixed particle-number sector. Fermionic signs follow Jordan-Wigner
// ordering; the boundary link acquires its particle-number-parity sign from
// the string count, no special casing. J is purely imaginary antisymmetric in
// the occupation basis, so everything is stored as real matrices: J = i A.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "qcurv/errors.hpp"

namespace qcurv {

struct EDSystem {
    int sites = 0;
    int np = 0;
    double hop = 1.0;      // t
    double coupling = 0.0; // V
    Eigen::VectorXd evals;   // ascending
    Eigen::MatrixXd j_imag;  // A in the energy eigenbasis; J_mn = i A_mn

    int dim() const { return static_cast<int>(evals.size()); }

    Eigen::MatrixXcd current_operator() const {
        return cplx_unit() * j_imag;
    }

    // Shifted Boltzmann weights exp(-beta (E_m - E_0)) and their sum; the
    // ground-state shift cancels in every normalized quantity and avoids
    // overflow at large beta.
    struct Thermal {
        Eigen::VectorXd boltz;
        double z;
    };

    Thermal thermal(double beta) const {
        Thermal th;
        th.boltz.resize(dim());
        const double e0 = evals(0);
        double z = 0.0;
        for (int m = 0; m < dim(); ++m) {
            th.boltz(m) = std::exp(-beta * (evals(m) - e0));
            z += th.boltz(m);
        }
        th.z = z;
        return th;
    }

  private:
    static std::complex<double> cplx_unit() { return {0.0, 1.0}; }
};

inline EDSystem build_chain(int sites, double t, double v, int np) {
    if (sites > 12)
        throw dimension_too_large_error("build_chain: at most 12 sites (got " +
                                        std::to_string(sites) + ")");
    if (sites < 2) throw domain_error("build_chain: need at least 2 sites");
    if (np < 0 || np > sites) throw domain_error("build_chain: particle number out of range");

    // fixed-Np basis, ascending bitmask order
    std::vector<std::uint32_t> basis;
    for (std::uint32_t s = 0; s < (1u << sites); ++s)
        if (std::popcount(s) == np) basis.push_back(s);
    const int dim = static_cast<int>(basis.size());

    auto index_of = [&](std::uint32_t s) {
        return static_cast<int>(std::lower_bound(basis.begin(), basis.end(), s) - basis.begin());
    };

    Eigen::MatrixXd hop_mat = Eigen::MatrixXd::Zero(dim, dim);  // c+_{j+1} c_j
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(dim);
    for (int idx = 0; idx < dim; ++idx) {
        const std::uint32_t s = basis[idx];
        for (int j = 0; j < sites; ++j) {
            const int j2 = (j + 1) % sites;
            const bool nj = (s >> j) & 1u;
            const bool nj2 = (s >> j2) & 1u;
            if (nj && nj2) diag(idx) += v;
            if (nj && !nj2) {
                std::uint32_t below_from = s & ((1u << j) - 1u);
                const std::uint32_t s1 = s & ~(1u << j);
                std::uint32_t below_to = s1 & ((1u << j2) - 1u);
                const int sgn =
                    (std::popcount(below_from) + std::popcount(below_to)) % 2 == 0 ? 1 : -1;
                hop_mat(index_of(s1 | (1u << j2)), idx) += sgn;
            }
        }
    }

    Eigen::MatrixXd h = -t * (hop_mat + hop_mat.transpose());
    h += diag.asDiagonal();
    const Eigen::MatrixXd a = t * (hop_mat - hop_mat.transpose());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
    if (solver.info() != Eigen::Success)
        throw domain_error("build_chain: eigensolver failed to converge");

    const double residual =
        (h * solver.eigenvectors() - solver.eigenvectors() * solver.eigenvalues().asDiagonal())
            .cwiseAbs()
            .maxCoeff();
    if (residual > 1e-10)
        throw domain_error("build_chain: eigenpair residual " + std::to_string(residual));

    EDSystem sys;
    sys.sites = sites;
    sys.np = np;
    sys.hop = t;
    sys.coupling = v;
    sys.evals = solver.eigenvalues();
    sys.j_imag = solver.eigenvectors().transpose() * a * solver.eigenvectors();
    return sys;
}

}  // namespace qcurv
