#pragma once

// Test-only numerical oracles, kept independent of the library's own
// finite-difference machinery.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace testutil {

/// Central finite difference of a scalar function of one variable.
inline double central_diff(const std::function<double(double)>& f, double x, double h = 1e-6) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Central finite-difference gradient of a scalar function of a vector.
inline std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x, double h = 1e-6) {
    std::vector<double> grad(x.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = x[i];
        x[i] = saved + h;
        const double hi = f(x);
        x[i] = saved - h;
        const double lo = f(x);
        x[i] = saved;
        grad[i] = (hi - lo) / (2.0 * h);
    }
    return grad;
}

/// Three-point second-difference stencil for one coordinate.
inline double second_diff(const std::function<double(double)>& f, double x, double h = 1e-4) {
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

inline double rel_error(double got, double expected) {
    const double scale = std::max(std::abs(expected), 1e-12);
    return std::abs(got - expected) / scale;
}

/// Worst relative error across paired vectors, with an absolute fallback for
/// near-zero expectations.
inline double max_rel_error(const std::vector<double>& got, const std::vector<double>& expected,
                            double abs_floor = 1e-8) {
    double worst = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        const double scale = std::max(std::abs(expected[i]), abs_floor);
        worst = std::max(worst, std::abs(got[i] - expected[i]) / scale);
    }
    return worst;
}

}  // namespace testutil
