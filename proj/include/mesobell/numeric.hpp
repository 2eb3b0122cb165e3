#ifndef MESOBELL_NUMERIC_HPP
#define MESOBELL_NUMERIC_HPP

#include <cstddef>
#include <functional>

namespace mesobell {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;  // sum of per-interval Gauss/Kronrod discrepancies
  int intervals = 0;
  std::size_t evaluations = 0;
};

/// Adaptive Gauss-Kronrod (G7,K15) integration of f over [a, b].
///
/// The interval with the largest error estimate is bisected until the global
/// estimate satisfies max(abs_tol, rel_tol * |value|). Throws QuadratureError
/// carrying the residual when the interval budget is exhausted, and on
/// non-finite integrand values.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double abs_tol, double rel_tol = 1e-10,
                           int max_intervals = 1 << 20);

/// Bisection root finder on [lo, hi] to absolute x tolerance x_tol.
/// Requires f(lo) and f(hi) of opposite sign; throws std::invalid_argument
/// otherwise.
double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double x_tol);

}  // namespace mesobell

#endif
