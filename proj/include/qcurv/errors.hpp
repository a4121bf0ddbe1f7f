// Exception types shared across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace qcurv {

struct domain_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Band gap below the 1e-9 guard somewhere on the mesh; carries the offending k.
struct gap_closure_error : std::runtime_error {
    double kx = 0.0, ky = 0.0;
    explicit gap_closure_error(const std::string& msg) : std::runtime_error(msg) {}
    gap_closure_error(const std::string& msg, double kx_, double ky_)
        : std::runtime_error(msg), kx(kx_), ky(ky_) {}
};

// FHS plaquette sum did not land on an integer (mesh too coarse or gap closing).
struct non_integer_chern_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct empty_density_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Total quantum noise S(0) vanished; curvature ratios are undefined.
struct zero_noise_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct not_converged_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct dimension_too_large_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct zero_current_norm_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace qcurv
