// Summation utilities: compensated accumulation, Euler (repeated-averaging)
// acceleration for alternating tails, Richardson extrapolation for monotone
// tails with a 1/N asymptote.
#pragma once

#include <cstddef>
#include <vector>

#include "qcurv/errors.hpp"

namespace qcurv {

// Compensated (Kahan) accumulator; fixed traversal order keeps reductions
// bit-reproducible.
class KahanSum {
  public:
    void add(double x) {
        const double y = x - c_;
        const double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

  private:
    double s_ = 0.0;
    double c_ = 0.0;
};

// Euler transformation of an alternating series, applied as repeated averaging
// of a window of consecutive partial sums. Also sums oscillating series whose
// terms approach a constant (Abel limit).
inline double euler_average(const double* partials, std::size_t count) {
    if (count == 0) throw domain_error("euler_average: empty window");
    std::vector<double> row(partials, partials + count);
    while (row.size() > 1) {
        for (std::size_t i = 0; i + 1 < row.size(); ++i) row[i] = 0.5 * (row[i] + row[i + 1]);
        row.pop_back();
    }
    return row[0];
}

// Neville polynomial extrapolation of (x_i, y_i) to x = 0.
inline double extrapolate_to_zero(std::vector<double> x, std::vector<double> y) {
    const std::size_t n = x.size();
    if (n == 0 || n != y.size()) throw domain_error("extrapolate_to_zero: bad node set");
    for (std::size_t level = 1; level < n; ++level)
        for (std::size_t i = 0; i + level < n; ++i)
            y[i] = (x[i + level] * y[i] - x[i] * y[i + 1]) / (x[i + level] - x[i]);
    return y[0];
}

}  // namespace qcurv
