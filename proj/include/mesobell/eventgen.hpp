#ifndef MESOBELL_EVENTGEN_HPP
#define MESOBELL_EVENTGEN_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mesobell/physics.hpp"

namespace mesobell {

inline constexpr const char* kEventFormatVersion = "mesobell-events/1";

// One generated pair. Read forwards it is a Monte Carlo event; read backwards
// it is the hidden-variable tuple {t_l, f_l, t_r, f_r} fixed at pair creation:
// each side's decay time, mode and flavour are functions of its own two fields
// alone. Mode fields index into PhysicsParams::decay_modes.
struct PairEvent {
  double t_l_ps = 0.0;
  std::uint32_t mode_l = 0;
  double t_r_ps = 0.0;
  std::uint32_t mode_r = 0;

  friend bool operator==(const PairEvent&, const PairEvent&) = default;
};
using HiddenVariableTuple = PairEvent;

struct GenerationConfig {
  std::uint64_t count = 0;
  std::uint64_t seed = 0;
  std::uint64_t chunk_size = 65536;  // events per seeding chunk; part of the stream identity
  PhysicsParams params;
};

struct DatasetHeader {
  std::string format = kEventFormatVersion;
  std::uint64_t seed = 0;
  std::uint64_t count = 0;
  std::uint64_t chunk_size = 65536;
  PhysicsParams params;
};

struct EventDataset {
  DatasetHeader header;
  std::vector<PairEvent> events;
};

/// Draw one pair from the exact joint decay distribution. The density
/// factorizes, so no rejection step is needed:
///   exp(-(t_l+t_r)/tau)/tau^2                      two exponential times
///   * {(1 -+ cos(dm (t_l-t_r)))/4}                 flavour-pair conditional
///   * Br(mode_l | flavour_l) * Br(mode_r | flavour_r)
/// Consumes exactly five uniforms, in this order: t_l, t_r, flavour pair,
/// mode_l, mode_r. The flavour-pair walk uses the flavor_pair(i) order.
PairEvent sample_pair(std::mt19937_64& stream, const PhysicsParams& p);

/// Generate cfg.count events. Chunks of cfg.chunk_size events are produced
/// from independent streams (see rng.hpp) and concatenated in chunk order;
/// the result is bit-identical for any worker count. workers == 0 picks
/// std::thread::hardware_concurrency(). Throws ValidationError on zero count
/// or invalid params.
EventDataset generate_dataset(const GenerationConfig& cfg, unsigned workers = 1);

enum class Side { Left, Right };

struct SideOutcome {
  double t_ps;
  std::uint32_t mode;
  Flavor flavor;
  bool taggable;
};

/// Local readout of one side of a hidden-variable tuple: a pure projection of
/// that side's stored fields (plus the static mode table). Never inspects the
/// opposite side.
SideOutcome deterministic_outcome(const PairEvent& hv, Side side, const PhysicsParams& p);

struct NormalizationAudit {
  double value;     // expected 1 for a valid mode table
  double residual;  // quadrature error estimate plus truncated-tail bound
};

/// Total mass of the joint decay-rate density, summed over all mode pairs and
/// integrated over both times: the hidden-variable normalization. Computed by
/// reducing to the time-sum variable s = t_l + t_r (the time-difference
/// integral is elementary) and integrating over s with adaptive
/// Gauss-Kronrod quadrature. Throws QuadratureError on non-convergence.
NormalizationAudit normalization_audit(const PhysicsParams& p);

}  // namespace mesobell

#endif
