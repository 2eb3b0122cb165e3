#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mesobell/errors.hpp"
#include "mesobell/eventgen.hpp"
#include "mesobell/rng.hpp"
#include "oracles.hpp"

using namespace mesobell;

namespace {

const PhysicsParams kDefault;

GenerationConfig config_for(std::uint64_t count, std::uint64_t seed,
                            std::uint64_t chunk = 65536) {
  GenerationConfig cfg;
  cfg.count = count;
  cfg.seed = seed;
  cfg.chunk_size = chunk;
  cfg.params = kDefault;
  return cfg;
}

bool is_same_flavor(const PairEvent& ev, const PhysicsParams& p) {
  return p.decay_modes.at(ev.mode_l).tags_flavor ==
         p.decay_modes.at(ev.mode_r).tags_flavor;
}

}  // namespace

TEST_CASE("generation is deterministic in the seed") {
  const auto a = generate_dataset(config_for(10, 42));
  const auto b = generate_dataset(config_for(10, 42));
  CHECK(a.events == b.events);

  const auto c = generate_dataset(config_for(10, 43));
  CHECK(a.events != c.events);
}

TEST_CASE("worker count never changes the event stream") {
  const auto cfg = config_for(10000, 7, 1024);
  const auto serial = generate_dataset(cfg, 1);
  const auto two = generate_dataset(cfg, 2);
  const auto eight = generate_dataset(cfg, 8);
  CHECK(serial.events == two.events);
  CHECK(serial.events == eight.events);
}

TEST_CASE("chunk size is part of the stream identity") {
  const auto a = generate_dataset(config_for(1000, 5, 128));
  const auto b = generate_dataset(config_for(1000, 5, 256));
  CHECK(a.events != b.events);
}

TEST_CASE("generation rejects a degenerate request") {
  CHECK_THROWS_AS(generate_dataset(config_for(0, 1)), ValidationError);
  auto bad = config_for(10, 1);
  bad.chunk_size = 0;
  CHECK_THROWS_AS(generate_dataset(bad), ValidationError);
  auto bad_params = config_for(10, 1);
  bad_params.params.decay_modes[0].branching_fraction = 0.5;
  CHECK_THROWS_AS(generate_dataset(bad_params), ValidationError);
}

TEST_CASE("decay times follow the exponential marginal") {
  const std::uint64_t n = 1000000;
  const auto ds = generate_dataset(config_for(n, 11), 2);
  double sum_l = 0.0, sum_r = 0.0;
  std::int64_t n_b0_left = 0;
  for (const auto& ev : ds.events) {
    sum_l += ev.t_l_ps;
    sum_r += ev.t_r_ps;
    if (ds.header.params.decay_modes.at(ev.mode_l).tags_flavor == Flavor::B0) {
      ++n_b0_left;
    }
  }
  // Mean of an exponential sample: tau +- tau/sqrt(N); allow 3 sigma.
  const double tol = 3.0 * kDefault.tau_ps / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(sum_l / n - kDefault.tau_ps) < tol);
  CHECK(std::abs(sum_r / n - kDefault.tau_ps) < tol);

  // Each side is an even flavour mixture.
  const double half_tol = 3.0 * 0.5 / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(static_cast<double>(n_b0_left) / n - 0.5) < half_tol);
}

TEST_CASE("the one-sided marginal is half an exponential per flavour") {
  // (t_l, flavour_l) histogram against (1/2)(1/tau) exp(-t/tau) per flavour.
  const std::uint64_t n = 400000;
  const auto ds = generate_dataset(config_for(n, 37), 2);
  const double width = 0.6;
  const int n_bins = 10;
  std::int64_t counts[2][10] = {};
  for (const auto& ev : ds.events) {
    int k = static_cast<int>(ev.t_l_ps / width);
    if (k >= n_bins) k = n_bins - 1;
    const bool is_b0 =
        ds.header.params.decay_modes.at(ev.mode_l).tags_flavor == Flavor::B0;
    counts[is_b0 ? 0 : 1][k] += 1;
  }
  double chi2 = 0.0;
  for (int f = 0; f < 2; ++f) {
    for (int k = 0; k < n_bins; ++k) {
      const double a = k * width;
      const double b =
          k == n_bins - 1 ? std::numeric_limits<double>::infinity() : a + width;
      const double expected =
          0.5 * oracles::exp_bin_mass(a, b, kDefault.tau_ps) * static_cast<double>(n);
      chi2 += (counts[f][k] - expected) * (counts[f][k] - expected) / expected;
    }
  }
  CHECK(chi2 < oracles::chi2_critical(oracles::kZ0999, 2 * n_bins - 1));
}

TEST_CASE("equal-time pairs are never same-flavour in the small-dt limit") {
  const auto ds = generate_dataset(config_for(200000, 3), 2);
  std::int64_t in_window = 0, same = 0;
  for (const auto& ev : ds.events) {
    if (std::abs(ev.t_l_ps - ev.t_r_ps) < 0.05) {
      ++in_window;
      if (is_same_flavor(ev, ds.header.params)) ++same;
    }
  }
  CHECK(in_window > 3000);  // the window is well populated
  // Expected same-flavour fraction in |dt| < 0.05 ps is ~5e-5.
  CHECK(same <= 5);
}

TEST_CASE("opposite-flavour pairs vanish near half an oscillation period") {
  const auto ds = generate_dataset(config_for(400000, 17), 2);
  const double dt_node = std::numbers::pi / kDefault.delta_m;  // ~6.2 ps
  std::int64_t in_window = 0, opp = 0;
  for (const auto& ev : ds.events) {
    if (std::abs(std::abs(ev.t_l_ps - ev.t_r_ps) - dt_node) < 0.05) {
      ++in_window;
      if (!is_same_flavor(ev, ds.header.params)) ++opp;
    }
  }
  CHECK(in_window > 100);
  CHECK(opp <= 3);
}

TEST_CASE("flavour-class histogram matches the closed form") {
  // chi^2 over 2 classes x 12 bins of |dt| (last bin open) at the 99.9% level.
  const std::uint64_t n = 400000;
  const auto ds = generate_dataset(config_for(n, 23), 2);
  const double width = 0.7;
  const int n_bins = 12;
  std::int64_t counts[2][12] = {};
  for (const auto& ev : ds.events) {
    const double dt = std::abs(ev.t_l_ps - ev.t_r_ps);
    int k = static_cast<int>(dt / width);
    if (k >= n_bins) k = n_bins - 1;
    counts[is_same_flavor(ev, ds.header.params) ? 0 : 1][k] += 1;
  }
  double chi2 = 0.0;
  for (int cls = 0; cls < 2; ++cls) {
    for (int k = 0; k < n_bins; ++k) {
      const double a = k * width;
      const double b =
          k == n_bins - 1 ? std::numeric_limits<double>::infinity() : a + width;
      // Both same-flavour outcomes (or both opposite ones) pool into a class.
      const double p = 2.0 * oracles::pair_class_bin_probability(
                                 a, b, kDefault.tau_ps, kDefault.delta_m, cls == 0);
      const double expected = p * static_cast<double>(n);
      chi2 += (counts[cls][k] - expected) * (counts[cls][k] - expected) / expected;
    }
  }
  CHECK(chi2 < oracles::chi2_critical(oracles::kZ0999, 2 * n_bins - 1));
}

TEST_CASE("side outcomes are pure projections") {
  PairEvent hv;
  hv.t_l_ps = 1.0;
  hv.mode_l = static_cast<std::uint32_t>(kDefault.mode_index("Dstar-l-nu"));
  hv.t_r_ps = 2.0;
  hv.mode_r = static_cast<std::uint32_t>(kDefault.mode_index("Dstar-l-nu-bar"));

  const SideOutcome left = deterministic_outcome(hv, Side::Left, kDefault);
  CHECK(left.t_ps == 1.0);
  CHECK(left.flavor == Flavor::B0);
  CHECK(left.taggable);

  const SideOutcome right = deterministic_outcome(hv, Side::Right, kDefault);
  CHECK(right.t_ps == 2.0);
  CHECK(right.flavor == Flavor::B0bar);
  CHECK(right.taggable);
}

TEST_CASE("left outcomes ignore arbitrary changes on the right") {
  std::mt19937_64 rng(404);
  for (int i = 0; i < 1000; ++i) {
    PairEvent hv;
    hv.t_l_ps = exponential_draw(rng, kDefault.tau_ps);
    hv.t_r_ps = exponential_draw(rng, kDefault.tau_ps);
    hv.mode_l = static_cast<std::uint32_t>(rng() % kDefault.decay_modes.size());
    hv.mode_r = static_cast<std::uint32_t>(rng() % kDefault.decay_modes.size());

    const SideOutcome before = deterministic_outcome(hv, Side::Left, kDefault);
    hv.t_r_ps = exponential_draw(rng, kDefault.tau_ps);
    hv.mode_r = static_cast<std::uint32_t>(rng() % kDefault.decay_modes.size());
    const SideOutcome after = deterministic_outcome(hv, Side::Left, kDefault);

    CHECK(before.t_ps == after.t_ps);
    CHECK(before.mode == after.mode);
    CHECK(before.flavor == after.flavor);
    CHECK(before.taggable == after.taggable);
  }
}

TEST_CASE("hidden-variable normalization integrates to one") {
  const NormalizationAudit audit = normalization_audit(kDefault);
  CHECK(std::abs(audit.value - 1.0) <= 1e-6);
  CHECK(audit.residual < 1e-6);

  // The total is parameter independent.
  PhysicsParams half_life = kDefault;
  half_life.tau_ps *= 0.5;
  CHECK(std::abs(normalization_audit(half_life).value - 1.0) <= 1e-6);

  PhysicsParams fast = kDefault;
  fast.delta_m = 1000.0;
  CHECK(std::abs(normalization_audit(fast).value - 1.0) <= 1e-6);
}

TEST_CASE("normalization audit of the bare tagging channel") {
  // Only the 5.4% channel on each side: the audit must shrink to
  // Br^2 times the full flavour integral.
  PhysicsParams p = kDefault;
  p.decay_modes = {{"Dstar-l-nu", Flavor::B0, 0.054, true},
                   {"Dstar-l-nu-bar", Flavor::B0bar, 0.054, true}};
  const double tau = p.tau_ps;
  const double width = 0.054 / tau;
  double expected = 0.0;
  for (int i = 0; i < kFlavorPairCount; ++i) {
    const bool same = flavor_pair(i).same_flavor();
    expected += width * width * oracles::pair_density_total(tau, p.delta_m, same);
  }
  CHECK(expected == doctest::Approx(0.054 * 0.054).epsilon(1e-12));

  const NormalizationAudit audit = normalization_audit(p);
  CHECK(audit.value == doctest::Approx(expected).epsilon(1e-9));
}
