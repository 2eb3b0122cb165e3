#include "mesobell/physics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mesobell/errors.hpp"
#include "mesobell/numeric.hpp"

namespace mesobell {

Flavor conjugate(Flavor f) { return f == Flavor::B0 ? Flavor::B0bar : Flavor::B0; }

const char* to_string(Flavor f) { return f == Flavor::B0 ? "B0" : "B0bar"; }

Flavor flavor_from_string(std::string_view s) {
  if (s == "B0") return Flavor::B0;
  if (s == "B0bar") return Flavor::B0bar;
  throw ParseError("unknown flavour '" + std::string(s) + "' (expected B0 or B0bar)");
}

FlavorPair flavor_pair(int index) {
  switch (index) {
    case 0: return {Flavor::B0, Flavor::B0};
    case 1: return {Flavor::B0bar, Flavor::B0bar};
    case 2: return {Flavor::B0, Flavor::B0bar};
    case 3: return {Flavor::B0bar, Flavor::B0};
    default: throw std::out_of_range("flavor_pair: index must be 0..3");
  }
}

std::vector<DecayMode> default_decay_modes() {
  return {
      {"Dstar-l-nu", Flavor::B0, 0.054, true},
      {"other-B0", Flavor::B0, 0.946, false},
      {"Dstar-l-nu-bar", Flavor::B0bar, 0.054, true},
      {"other-B0bar", Flavor::B0bar, 0.946, false},
  };
}

PhysicsParams::PhysicsParams() : decay_modes(default_decay_modes()) {}

const DecayMode& PhysicsParams::mode(std::string_view label) const {
  return decay_modes[mode_index(label)];
}

std::size_t PhysicsParams::mode_index(std::string_view label) const {
  for (std::size_t i = 0; i < decay_modes.size(); ++i) {
    if (decay_modes[i].label == label) return i;
  }
  throw std::out_of_range("unknown decay mode label '" + std::string(label) + "'");
}

double PhysicsParams::branching_sum(Flavor f) const {
  double sum = 0.0;
  for (const auto& m : decay_modes) {
    if (m.tags_flavor == f) sum += m.branching_fraction;
  }
  return sum;
}

namespace {

bool valid_label(const std::string& label) {
  if (label.empty()) return false;
  return std::all_of(label.begin(), label.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '-' || c == '_';
  });
}

}  // namespace

void validate(const PhysicsParams& p) {
  if (!(p.tau_ps > 0.0) || !std::isfinite(p.tau_ps)) {
    throw ValidationError("tau must be positive and finite, got " + std::to_string(p.tau_ps));
  }
  if (!(p.delta_m > 0.0) || !std::isfinite(p.delta_m)) {
    throw ValidationError("dm must be positive and finite, got " + std::to_string(p.delta_m));
  }
  if (p.decay_modes.empty()) throw ValidationError("decay mode table is empty");

  for (std::size_t i = 0; i < p.decay_modes.size(); ++i) {
    const auto& m = p.decay_modes[i];
    if (!valid_label(m.label)) {
      throw ValidationError("decay mode label '" + m.label +
                            "' must be non-empty and use only [A-Za-z0-9_-]");
    }
    if (!(m.branching_fraction >= 0.0) || !(m.branching_fraction <= 1.0)) {
      throw ValidationError("branching fraction of '" + m.label + "' is outside [0, 1]");
    }
    for (std::size_t j = i + 1; j < p.decay_modes.size(); ++j) {
      if (p.decay_modes[j].label == m.label) {
        throw ValidationError("duplicate decay mode label '" + m.label + "'");
      }
    }
  }

  for (Flavor f : {Flavor::B0, Flavor::B0bar}) {
    const double sum = p.branching_sum(f);
    if (std::abs(sum - 1.0) > 1e-12) {
      throw ValidationError(std::string("branching fractions for ") + to_string(f) +
                            " sum to " + std::to_string(sum) + ", expected 1");
    }
  }

  // Charge-conjugate symmetry of the partial widths: both flavours must carry
  // the same multiset of branching fractions.
  std::vector<double> b0, b0bar;
  for (const auto& m : p.decay_modes) {
    (m.tags_flavor == Flavor::B0 ? b0 : b0bar).push_back(m.branching_fraction);
  }
  std::sort(b0.begin(), b0.end());
  std::sort(b0bar.begin(), b0bar.end());
  if (b0.size() != b0bar.size() ||
      !std::equal(b0.begin(), b0.end(), b0bar.begin(),
                  [](double a, double b) { return std::abs(a - b) <= 1e-12; })) {
    throw ValidationError("mode table is not charge-conjugate symmetric");
  }
}

namespace {

void require_nonnegative_times(double t_l_ps, double t_r_ps) {
  if (t_l_ps < 0.0 || t_r_ps < 0.0) {
    throw std::domain_error("decay times must be nonnegative, got t_l=" +
                            std::to_string(t_l_ps) + " t_r=" + std::to_string(t_r_ps));
  }
}

}  // namespace

std::complex<double> pair_amplitude(double t_l_ps, double t_r_ps, FlavorPair pair,
                                    const PhysicsParams& p) {
  require_nonnegative_times(t_l_ps, t_r_ps);
  const double envelope =
      std::exp(-0.5 * (t_l_ps + t_r_ps) / p.tau_ps) / (2.0 * std::numbers::sqrt2);
  const double phase = p.delta_m * (t_l_ps - t_r_ps);
  const std::complex<double> osc{std::cos(phase), std::sin(phase)};
  const std::complex<double> mix = pair.same_flavor() ? (1.0 - osc) : (1.0 + osc);
  const double sign = pair.left == Flavor::B0 ? 1.0 : -1.0;
  return sign * envelope * mix;
}

double joint_flavor_probability(double t_l_ps, double t_r_ps, FlavorPair pair,
                                const PhysicsParams& p) {
  require_nonnegative_times(t_l_ps, t_r_ps);
  const double c = std::cos(p.delta_m * (t_l_ps - t_r_ps));
  const double mix = pair.same_flavor() ? (1.0 - c) : (1.0 + c);
  return 0.25 * std::exp(-(t_l_ps + t_r_ps) / p.tau_ps) * mix;
}

double joint_decay_rate(double t_l_ps, double t_r_ps, std::string_view mode_l,
                        std::string_view mode_r, const PhysicsParams& p) {
  return joint_decay_rate(t_l_ps, t_r_ps, p.mode(mode_l), p.mode(mode_r), p);
}

double joint_decay_rate(double t_l_ps, double t_r_ps, const DecayMode& mode_l,
                        const DecayMode& mode_r, const PhysicsParams& p) {
  // Resolve through the table so unknown labels fail loudly.
  const DecayMode& ml = p.decay_modes[p.mode_index(mode_l.label)];
  const DecayMode& mr = p.decay_modes[p.mode_index(mode_r.label)];
  const FlavorPair pair{ml.tags_flavor, mr.tags_flavor};
  return joint_flavor_probability(t_l_ps, t_r_ps, pair, p) * p.partial_width(ml) *
         p.partial_width(mr);
}

double correlation(double delta_t_ps, const PhysicsParams& p) {
  return -std::cos(p.delta_m * delta_t_ps);
}

double chsh_statistic(double delta_t_ps, const PhysicsParams& p) {
  return std::abs(3.0 * correlation(delta_t_ps, p) - correlation(3.0 * delta_t_ps, p));
}

ChshPeak chsh_peak(const PhysicsParams& p) {
  // S(dt) = |6c - 4c^3| with c = cos(dm dt) is stationary where c^2 = 1/2,
  // i.e. at dm dt = pi/4.
  const double dt = std::numbers::pi / (4.0 * p.delta_m);
  return {dt, chsh_statistic(dt, p)};
}

double violation_boundary(const PhysicsParams& p) {
  const double peak = std::numbers::pi / (4.0 * p.delta_m);
  const double upper = std::numbers::pi / (2.0 * p.delta_m);
  // S - 2 falls monotonically from 2 sqrt(2) - 2 to -2 on [peak, upper].
  // The tolerance scales with 1/dm so the phase dm*dt* stays accurate to
  // 1e-10 rad for arbitrarily fast oscillation; at the default dm it is the
  // plain 1e-10 ps.
  const double x_tol = 1e-10 / std::max(1.0, p.delta_m);
  return find_root(
      [&p](double dt) { return chsh_statistic(dt, p) - 2.0; }, peak, upper, x_tol);
}

}  // namespace mesobell
