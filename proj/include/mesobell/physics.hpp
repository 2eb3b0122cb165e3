#ifndef MESOBELL_PHYSICS_HPP
#define MESOBELL_PHYSICS_HPP

#include <complex>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mesobell {

// All times are in picoseconds, the mixing frequency in 1/ps. No unit
// conversions happen anywhere in the core.

enum class Flavor : std::uint8_t { B0, B0bar };

Flavor conjugate(Flavor f);
const char* to_string(Flavor f);
Flavor flavor_from_string(std::string_view s);  // throws ParseError

struct FlavorPair {
  Flavor left;
  Flavor right;
  bool same_flavor() const { return left == right; }
};

// The four orthogonal flavour pairs, in the canonical order used everywhere
// (sampling cumulative walk, audits, tests).
inline constexpr int kFlavorPairCount = 4;
FlavorPair flavor_pair(int index);

// A flavour-specific final state. `taggable` is false for the aggregate
// remainder modes: they are generated and stored like any other decay, but an
// observer cannot infer the parent flavour from them.
struct DecayMode {
  std::string label;
  Flavor tags_flavor = Flavor::B0;
  double branching_fraction = 0.0;
  bool taggable = true;
};

struct PhysicsParams {
  double tau_ps = 1.536;    // mean lifetime; the common width is 1/tau_ps
  double delta_m = 0.507;   // mass difference m_H - m_L, 1/ps
  std::vector<DecayMode> decay_modes;

  PhysicsParams();

  double gamma() const { return 1.0 / tau_ps; }
  double partial_width(const DecayMode& m) const {  // 1/ps
    return m.branching_fraction / tau_ps;
  }
  // Lookup by label; throws std::out_of_range for unknown labels.
  const DecayMode& mode(std::string_view label) const;
  std::size_t mode_index(std::string_view label) const;
  // Sum of branching fractions of modes tagging `f` (1 for a valid table).
  double branching_sum(Flavor f) const;
};

// Two modes per flavour: the semileptonic tagging channel at 5.4% and an
// untaggable aggregate carrying the remaining 94.6%.
std::vector<DecayMode> default_decay_modes();

// Checks every invariant of the parameter set and throws ValidationError
// naming the first violated one:
//   tau_ps > 0, delta_m > 0, both finite;
//   labels unique, non-empty, charset [A-Za-z0-9_-];
//   branching fractions in [0, 1], per-flavour sums equal 1 within 1e-12;
//   charge-conjugate symmetry: both flavours carry the same multiset of
//   branching fractions.
void validate(const PhysicsParams& p);

/// Coefficient of |pair> in the evolved two-sided state at times (t_l, t_r):
///   (+-1) * (1/(2*sqrt(2))) * exp(-(t_l+t_r)/(2 tau)) * (1 -+ exp(i dm (t_l-t_r)))
/// minus inside the parenthesis for same-flavour pairs, overall sign -1 when
/// the left slot holds a B0bar (antisymmetric initial state). The absolute
/// mass phases cancel in every observable and are dropped as a global phase.
/// Throws std::domain_error for negative times.
std::complex<double> pair_amplitude(double t_l_ps, double t_r_ps, FlavorPair pair,
                                    const PhysicsParams& p);

/// Joint probability density of finding the given flavour pair at (t_l, t_r):
///   (1/4) exp(-(t_l+t_r)/tau) [1 -+ cos(dm (t_l - t_r))]
/// minus for same-flavour, plus for opposite-flavour. Equals
/// |pair_amplitude|^2. Throws std::domain_error for negative times.
double joint_flavor_probability(double t_l_ps, double t_r_ps, FlavorPair pair,
                                const PhysicsParams& p);

/// Joint decay rate density (1/ps^2) into the two modes:
///   joint_flavor_probability(tagged pair) * Gamma(B_l -> f_l) * Gamma(B_r -> f_r).
/// Modes are resolved by label in p.decay_modes; unknown labels throw
/// std::out_of_range.
double joint_decay_rate(double t_l_ps, double t_r_ps, std::string_view mode_l,
                        std::string_view mode_r, const PhysicsParams& p);
double joint_decay_rate(double t_l_ps, double t_r_ps, const DecayMode& mode_l,
                        const DecayMode& mode_r, const PhysicsParams& p);

/// Normalized flavour correlation, -cos(dm * dt). Even in dt.
double correlation(double delta_t_ps, const PhysicsParams& p);

/// CHSH-type statistic |3 E(dt) - E(3 dt)|; equals |6 c - 4 c^3| with
/// c = cos(dm * dt). Bounded by 2 sqrt(2).
double chsh_statistic(double delta_t_ps, const PhysicsParams& p);

struct ChshPeak {
  double delta_t_ps;  // pi / (4 dm): the stationary point of |6c - 4c^3|
  double s;           // 2 sqrt(2) up to rounding
};
ChshPeak chsh_peak(const PhysicsParams& p);

/// Smallest dt > 0 where the statistic falls back to 2, located by bisection
/// on S(dt) - 2 over [peak, pi/(2 dm)] to 1e-10 ps. Analytically
/// dm * dt = arccos((sqrt(3) - 1)/2).
double violation_boundary(const PhysicsParams& p);

}  // namespace mesobell

#endif
