// Test-side reference computations, kept deliberately independent of the
// library code paths they check.
#ifndef MESOBELL_TESTS_ORACLES_HPP
#define MESOBELL_TESTS_ORACLES_HPP

#include <cmath>
#include <limits>

namespace oracles {

// int_a^b (1/tau) exp(-u/tau) du; pass b = infinity for an open tail.
inline double exp_bin_mass(double a, double b, double tau) {
  const double upper = std::isinf(b) ? 0.0 : std::exp(-b / tau);
  return std::exp(-a / tau) - upper;
}

// int_a^b (1/tau) exp(-u/tau) cos(dm u) du, from the closed-form
// antiderivative of exp(-g u) cos(w u).
inline double exp_cos_bin_mass(double a, double b, double tau, double dm) {
  const double g = 1.0 / tau;
  const double denom = g * g + dm * dm;
  auto antiderivative = [&](double u) {
    if (std::isinf(u)) return 0.0;
    return std::exp(-g * u) * (dm * std::sin(dm * u) - g * std::cos(dm * u)) / denom;
  };
  return g * (antiderivative(b) - antiderivative(a));
}

// Expected flavour-correlation average over a |dt| bin: the weighted mean of
// -cos(dm dt) under the Laplace-folded density of |t_l - t_r|.
inline double binned_correlation(double a, double b, double tau, double dm) {
  return -exp_cos_bin_mass(a, b, tau, dm) / exp_bin_mass(a, b, tau);
}

// Probability that a pair lands in |dt| bin [a, b) with the given flavour
// class; `same` selects one of the two same-flavour outcomes.
inline double pair_class_bin_probability(double a, double b, double tau, double dm,
                                         bool same) {
  const double mass = exp_bin_mass(a, b, tau);
  const double osc = exp_cos_bin_mass(a, b, tau, dm);
  return 0.25 * (same ? mass - osc : mass + osc);
}

// Closed-form per-pair time integral of the joint density over both times:
// same-flavour pairs integrate to (tau^2/4) x^2/(1+x^2), opposite-flavour to
// (tau^2/4)(2+x^2)/(1+x^2), with x = dm tau.
inline double pair_density_total(double tau, double dm, bool same) {
  const double x = dm * tau;
  const double x2 = x * x;
  return 0.25 * tau * tau * (same ? x2 : 2.0 + x2) / (1.0 + x2);
}

// Upper chi-square quantile via the Wilson-Hilferty cube approximation;
// adequate for the dof >= 10 used in these tests.
inline double chi2_critical(double z_upper, int dof) {
  const double t = 2.0 / (9.0 * dof);
  const double c = 1.0 - t + z_upper * std::sqrt(t);
  return dof * c * c * c;
}
inline constexpr double kZ0999 = 3.0902323061678132;  // N(0,1) 99.9% quantile

// Locally written CHSH curve, independent of the library implementation.
inline double chsh_reference(double dt, double dm) {
  return std::abs(3.0 * std::cos(dm * dt) - std::cos(3.0 * dm * dt));
}

// Dense grid scan for the S = 2 downcrossing followed by interval halving.
inline double boundary_by_scan(double dm) {
  const double x_hi = 1.5 * std::acos(-1.0) / dm;
  const int n = 20000;
  double lo = 0.0, hi = 0.0;
  double prev_dt = 0.0;
  double prev_s = chsh_reference(0.0, dm);
  for (int i = 1; i <= n; ++i) {
    const double dt = x_hi * i / n;
    const double s = chsh_reference(dt, dm);
    if (prev_s > 2.0 && s <= 2.0) {
      lo = prev_dt;
      hi = dt;
      break;
    }
    prev_dt = dt;
    prev_s = s;
  }
  for (int iter = 0; iter < 80 && (hi - lo) > 1e-12; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (chsh_reference(mid, dm) > 2.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Golden-section maximum of the reference curve on [0, pi/(2 dm)].
inline double peak_by_golden_section(double dm) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = 0.0;
  double b = 0.5 * std::acos(-1.0) / dm;
  double x1 = b - phi * (b - a);
  double x2 = a + phi * (b - a);
  double f1 = chsh_reference(x1, dm);
  double f2 = chsh_reference(x2, dm);
  while (b - a > 1e-10) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = chsh_reference(x2, dm);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = chsh_reference(x1, dm);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace oracles

#endif
