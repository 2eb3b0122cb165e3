#include "mesobell/eventgen.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "mesobell/errors.hpp"
#include "mesobell/numeric.hpp"
#include "mesobell/rng.hpp"

namespace mesobell {

namespace {

std::uint32_t draw_mode(std::mt19937_64& stream, Flavor flavor, const PhysicsParams& p) {
  const double u = uniform_unit(stream);
  double acc = 0.0;
  std::uint32_t last = 0;
  bool seen = false;
  for (std::uint32_t i = 0; i < p.decay_modes.size(); ++i) {
    const auto& m = p.decay_modes[i];
    if (m.tags_flavor != flavor) continue;
    last = i;
    seen = true;
    acc += m.branching_fraction;
    if (u <= acc) return i;
  }
  if (!seen) throw ValidationError(std::string("no decay modes tag ") + to_string(flavor));
  return last;  // u landed in the rounding gap above the cumulative sum
}

}  // namespace

PairEvent sample_pair(std::mt19937_64& stream, const PhysicsParams& p) {
  PairEvent ev;
  ev.t_l_ps = exponential_draw(stream, p.tau_ps);
  ev.t_r_ps = exponential_draw(stream, p.tau_ps);

  // The four conditional flavour-pair probabilities {(1 -+ c)/4} sum to 1 at
  // fixed times, so one cumulative walk settles the pair.
  const double c = std::cos(p.delta_m * (ev.t_l_ps - ev.t_r_ps));
  const double p_same = 0.25 * (1.0 - c);
  const double p_opp = 0.25 * (1.0 + c);
  const double weights[kFlavorPairCount] = {p_same, p_same, p_opp, p_opp};

  const double u = uniform_unit(stream);
  int pick = kFlavorPairCount - 1;
  double acc = 0.0;
  for (int i = 0; i < kFlavorPairCount; ++i) {
    acc += weights[i];
    if (u <= acc) {
      pick = i;
      break;
    }
  }
  const FlavorPair pair = flavor_pair(pick);

  ev.mode_l = draw_mode(stream, pair.left, p);
  ev.mode_r = draw_mode(stream, pair.right, p);
  return ev;
}

EventDataset generate_dataset(const GenerationConfig& cfg, unsigned workers) {
  if (cfg.count < 1) throw ValidationError("event count must be >= 1");
  if (cfg.chunk_size < 1) throw ValidationError("chunk size must be >= 1");
  validate(cfg.params);

  EventDataset ds;
  ds.header.seed = cfg.seed;
  ds.header.count = cfg.count;
  ds.header.chunk_size = cfg.chunk_size;
  ds.header.params = cfg.params;
  ds.events.resize(cfg.count);

  const std::uint64_t n_chunks = (cfg.count + cfg.chunk_size - 1) / cfg.chunk_size;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(
      std::min<std::uint64_t>(workers, n_chunks));

  std::atomic<std::uint64_t> next_chunk{0};
  auto run_chunks = [&]() {
    for (;;) {
      const std::uint64_t i = next_chunk.fetch_add(1);
      if (i >= n_chunks) break;
      std::mt19937_64 stream(chunk_seed(cfg.seed, i));
      const std::uint64_t begin = i * cfg.chunk_size;
      const std::uint64_t end = std::min(begin + cfg.chunk_size, cfg.count);
      for (std::uint64_t k = begin; k < end; ++k) {
        ds.events[k] = sample_pair(stream, cfg.params);
      }
    }
  };

  if (workers <= 1) {
    run_chunks();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run_chunks);
    for (auto& t : pool) t.join();
  }
  return ds;
}

SideOutcome deterministic_outcome(const PairEvent& hv, Side side, const PhysicsParams& p) {
  // Projection of one side's stored fields; the other side is never read.
  if (side == Side::Left) {
    const DecayMode& m = p.decay_modes.at(hv.mode_l);
    return {hv.t_l_ps, hv.mode_l, m.tags_flavor, m.taggable};
  }
  const DecayMode& m = p.decay_modes.at(hv.mode_r);
  return {hv.t_r_ps, hv.mode_r, m.tags_flavor, m.taggable};
}

NormalizationAudit normalization_audit(const PhysicsParams& p) {
  if (!(p.tau_ps > 0.0) || !(p.delta_m > 0.0)) {
    throw ValidationError("normalization audit needs tau > 0 and dm > 0");
  }
  const double tau = p.tau_ps;
  const double dm = p.delta_m;

  // Substituting s = t_l + t_r, d = t_l - t_r (Jacobian 1/2), the
  // time-difference integral of each flavour-pair density is elementary:
  //   int_{-s}^{s} (1 -+ cos(dm d))/4 * (1/2) dd = (s -+ sin(dm s)/dm)/4,
  // leaving a one-dimensional integral over s, damped by exp(-s/tau).
  const double s_cut = 50.0 * tau;
  auto integrand = [tau, dm](double sign) {
    return [tau, dm, sign](double s) {
      return std::exp(-s / tau) * 0.25 * (s + sign * std::sin(dm * s) / dm);
    };
  };
  const QuadratureResult same = integrate(integrand(-1.0), 0.0, s_cut, 1e-9, 1e-9);
  const QuadratureResult opp = integrate(integrand(+1.0), 0.0, s_cut, 1e-9, 1e-9);
  // Truncated tails, bounded with |sin| <= 1.
  const double tail =
      0.25 * std::exp(-s_cut / tau) * (tau * (s_cut + tau) + tau / dm);

  double value = 0.0;
  double width_weight_sum = 0.0;
  for (int i = 0; i < kFlavorPairCount; ++i) {
    const FlavorPair pair = flavor_pair(i);
    // Total partial width of each side, summed over the modes tagging it.
    const double w_l = p.branching_sum(pair.left) / tau;
    const double w_r = p.branching_sum(pair.right) / tau;
    value += w_l * w_r * (pair.same_flavor() ? same.value : opp.value);
    width_weight_sum += w_l * w_r;
  }
  const double residual =
      width_weight_sum * (std::max(same.error_estimate, opp.error_estimate) + tail);
  return {value, residual};
}

}  // namespace mesobell
