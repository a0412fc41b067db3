#pragma once

#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ispest/errors.hpp"

namespace ispest::detail {

/// Adaptive Gauss-Kronrod integral of f over [a, b]; bounds may be infinite.
/// Throws QuadratureError when the estimate is not finite or the error
/// estimate exceeds both sqrt(tol) relative to the L1 norm and `abs_floor`.
template <typename F>
double integrate(F&& f, double a, double b, double tol = 1e-10, unsigned max_depth = 18,
                 double abs_floor = 0.0) {
    if (a == b) return 0.0;
    double error = 0.0;
    double l1 = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        f, a, b, max_depth, tol, &error, &l1);
    if (!std::isfinite(value)) {
        throw QuadratureError("quadrature produced a non-finite value");
    }
    if (error > std::max(std::sqrt(tol) * std::max(l1, std::numeric_limits<double>::min()), abs_floor)) {
        throw QuadratureError("quadrature did not converge (error estimate " +
                              std::to_string(error) + ")");
    }
    return value;
}

/// int_a^inf f for f regularly varying with index -alpha, alpha > 1, a > 0.
/// v = a u^{-k}, k = 2 / (alpha - 1), maps the tail to an O(u) integrand on (0, 1].
template <typename F>
double integrate_tail(F&& f, double a, double alpha, double tol = 1e-10) {
    const double k = 2.0 / (alpha - 1.0);
    auto g = [&](double u) {
        if (u <= 0.0) return 0.0;
        const double v = a * std::pow(u, -k);
        if (!std::isfinite(v)) return 0.0;
        return f(v) * k * v / u;
    };
    return integrate(g, 0.0, 1.0, tol);
}

}  // namespace ispest::detail
