#include "mesobell/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <vector>

#include "mesobell/errors.hpp"

namespace mesobell {

namespace {

// 15-point Kronrod extension of 7-point Gauss-Legendre (QUADPACK dqk15
// abscissae/weights). xgk[1], xgk[3], xgk[5], xgk[7] are the Gauss nodes.
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct Segment {
  double a, b;
  double value;
  double error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

Segment eval_gk15(const std::function<double(double)>& f, double a, double b,
                  std::size_t& evaluations) {
  const double half = 0.5 * (b - a);
  const double center = 0.5 * (a + b);

  const double fc = f(center);
  double resk = kWgk[7] * fc;
  double resg = kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double sum = f(center - dx) + f(center + dx);
    resk += kWgk[j] * sum;
    if (j % 2 == 1) resg += kWg[j / 2] * sum;
  }
  evaluations += 15;

  Segment s{a, b, resk * half, std::abs((resk - resg) * half)};
  if (!std::isfinite(s.value)) {
    throw QuadratureError("non-finite integrand value in [" + std::to_string(a) +
                              ", " + std::to_string(b) + "]",
                          std::numeric_limits<double>::infinity());
  }
  return s;
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double abs_tol, double rel_tol, int max_intervals) {
  if (!(b > a)) throw std::invalid_argument("integrate: requires b > a");
  std::size_t evaluations = 0;
  std::priority_queue<Segment> queue;
  Segment first = eval_gk15(f, a, b, evaluations);
  double total_value = first.value;
  double total_error = first.error;
  queue.push(first);

  while (total_error > std::max(abs_tol, rel_tol * std::abs(total_value))) {
    if (static_cast<int>(queue.size()) >= max_intervals) {
      throw QuadratureError("adaptive quadrature did not converge within " +
                                std::to_string(max_intervals) + " intervals",
                            total_error);
    }
    const Segment worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      // Interval at floating-point resolution; nothing more to split.
      throw QuadratureError("adaptive quadrature stalled at machine resolution",
                            total_error);
    }
    const Segment left = eval_gk15(f, worst.a, mid, evaluations);
    const Segment right = eval_gk15(f, mid, worst.b, evaluations);
    total_value += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
  }

  return {total_value, total_error, static_cast<int>(queue.size()), evaluations};
}

double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double x_tol) {
  if (!(hi > lo)) throw std::invalid_argument("find_root: requires hi > lo");
  double f_lo = f(lo);
  double f_hi = f(hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    throw std::invalid_argument("find_root: no sign change over the bracket");
  }
  for (int iter = 0; iter < 200 && (hi - lo) > x_tol; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // bracket at machine resolution
    const double f_mid = f(mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace mesobell
