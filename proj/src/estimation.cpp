#include "mesobell/estimation.hpp"

#include <cmath>
#include <stdexcept>

#include "mesobell/errors.hpp"

namespace mesobell {

int BinningScheme::bin_count() const {
  return static_cast<int>(std::llround(dt_max_ps / bin_width_ps));
}

int BinningScheme::bin_index(double abs_dt_ps) const {
  if (abs_dt_ps < 0.0 || abs_dt_ps >= dt_max_ps) return -1;
  const int k = static_cast<int>(abs_dt_ps / bin_width_ps);
  return k < bin_count() ? k : -1;  // guards the dt == dt_max rounding edge
}

double BinningScheme::bin_center(int k) const { return (k + 0.5) * bin_width_ps; }
double BinningScheme::bin_low(int k) const { return k * bin_width_ps; }
double BinningScheme::bin_high(int k) const { return (k + 1) * bin_width_ps; }

void validate(const BinningScheme& scheme) {
  if (!(scheme.bin_width_ps > 0.0) || !std::isfinite(scheme.bin_width_ps)) {
    throw ValidationError("bin width must be positive and finite");
  }
  if (!(scheme.dt_max_ps > 0.0) || !std::isfinite(scheme.dt_max_ps)) {
    throw ValidationError("dt_max must be positive and finite");
  }
  const double ratio = scheme.dt_max_ps / scheme.bin_width_ps;
  if (std::abs(ratio - std::llround(ratio)) > 1e-9) {
    throw ValidationError("dt_max must be a multiple of the bin width");
  }
}

double BinnedCorrelation::e_hat() const {
  if (empty()) throw ValidationError("empty bin has no correlation estimate");
  return static_cast<double>(n_same - n_opp) / static_cast<double>(n());
}

double BinnedCorrelation::sigma_wald() const {
  const double e = e_hat();
  return std::sqrt((1.0 - e * e) / static_cast<double>(n()));
}

double BinnedCorrelation::sigma() const {
  if (n_same == 0 || n_opp == 0) {
    // One-sided bin: the Wald value is 0. Twice the Wilson half-width at
    // z = 1 gives a finite, conservative stand-in.
    return std::max(sigma_wald(), 1.0 / static_cast<double>(n() + 1));
  }
  return sigma_wald();
}

CorrelationEstimate estimate_correlation(const BinnedCorrelation& bin) {
  return {bin.e_hat(), bin.sigma_wald()};
}

std::vector<BinnedCorrelation> bin_events(const EventDataset& ds,
                                          const BinningScheme& scheme,
                                          bool tagged_only, Readout readout) {
  validate(scheme);
  if (ds.events.empty()) throw ValidationError("dataset contains no events");
  const PhysicsParams& p = ds.header.params;

  std::vector<BinnedCorrelation> bins(static_cast<std::size_t>(scheme.bin_count()));
  for (int k = 0; k < scheme.bin_count(); ++k) {
    bins[static_cast<std::size_t>(k)].center_ps = scheme.bin_center(k);
  }

  std::int64_t used = 0;
  for (const PairEvent& ev : ds.events) {
    double t_l, t_r;
    Flavor f_l, f_r;
    bool tag_l, tag_r;
    if (readout == Readout::HiddenVariable) {
      // Hidden-variable reading: each side's outcome is the local projection
      // of the tuple, obtained without looking at the other side.
      const SideOutcome left = deterministic_outcome(ev, Side::Left, p);
      const SideOutcome right = deterministic_outcome(ev, Side::Right, p);
      t_l = left.t_ps;
      f_l = left.flavor;
      tag_l = left.taggable;
      t_r = right.t_ps;
      f_r = right.flavor;
      tag_r = right.taggable;
    } else {
      // Direct reading: the record is a pair of observed decays.
      const DecayMode& ml = p.decay_modes.at(ev.mode_l);
      const DecayMode& mr = p.decay_modes.at(ev.mode_r);
      t_l = ev.t_l_ps;
      f_l = ml.tags_flavor;
      tag_l = ml.taggable;
      t_r = ev.t_r_ps;
      f_r = mr.tags_flavor;
      tag_r = mr.taggable;
    }

    if (tagged_only && !(tag_l && tag_r)) continue;
    const int k = scheme.bin_index(std::abs(t_l - t_r));
    if (k < 0) continue;
    auto& bin = bins[static_cast<std::size_t>(k)];
    if (f_l == f_r) {
      ++bin.n_same;
    } else {
      ++bin.n_opp;
    }
    ++used;
  }

  if (used == 0) {
    throw ValidationError(
        tagged_only
            ? "no taggable events fell into any bin; relax --tagged-only or the binning"
            : "no events fell into any bin; widen the binning range");
  }
  return bins;
}

ChshEstimate estimate_chsh(const std::vector<BinnedCorrelation>& bins,
                           const BinningScheme& scheme, double delta_t_ps) {
  const int k1 = scheme.bin_index(delta_t_ps);
  const int k3 = scheme.bin_index(3.0 * delta_t_ps);
  if (k1 < 0 || k3 < 0) {
    throw std::invalid_argument("estimate_chsh: dt and 3 dt must both lie inside the binned range");
  }
  if (k1 == k3) {
    throw std::invalid_argument(
        "estimate_chsh: dt and 3 dt fall into the same bin; use a finer binning");
  }
  const auto& b1 = bins.at(static_cast<std::size_t>(k1));
  const auto& b3 = bins.at(static_cast<std::size_t>(k3));
  if (b1.empty() || b3.empty()) {
    throw std::invalid_argument("estimate_chsh: contributing bin is empty");
  }

  // The two bins are disjoint event sets, so their uncertainties add in
  // quadrature.
  const double s = std::abs(3.0 * b1.e_hat() - b3.e_hat());
  const double s1 = b1.sigma();
  const double s3 = b3.sigma();
  const double sigma = std::sqrt(9.0 * s1 * s1 + s3 * s3);
  return {delta_t_ps, s, sigma, (s - 2.0) / sigma};
}

ChshCurve scan_chsh(const std::vector<BinnedCorrelation>& bins, const BinningScheme& scheme) {
  ChshCurve curve;
  for (int k = 0; k < scheme.bin_count(); ++k) {
    const double center = scheme.bin_center(k);
    const int k3 = scheme.bin_index(3.0 * center);
    if (k3 < 0 || k3 == k) continue;
    if (bins.at(static_cast<std::size_t>(k)).empty() ||
        bins.at(static_cast<std::size_t>(k3)).empty()) {
      continue;
    }
    curve.points.push_back(estimate_chsh(bins, scheme, center));
    const ChshEstimate& pt = curve.points.back();
    if (curve.argmax < 0 || pt.s_hat > curve.max().s_hat) {
      curve.argmax = static_cast<int>(curve.points.size()) - 1;
    }
    if (pt.s_hat > 2.0) {
      if (!curve.violation_window) {
        curve.violation_window = {pt.delta_t_ps, pt.delta_t_ps};
      } else {
        curve.violation_window->second = pt.delta_t_ps;
      }
    }
  }
  return curve;
}

ModelComparison compare_to_model(const std::vector<BinnedCorrelation>& bins,
                                 const PhysicsParams& p) {
  ModelComparison cmp;
  for (const auto& bin : bins) {
    if (bin.empty()) continue;
    const double expected = -std::cos(p.delta_m * bin.center_ps);
    const double r = (bin.e_hat() - expected) / bin.sigma();
    cmp.residuals.push_back({bin.center_ps, r});
    cmp.chi2 += r * r;
  }
  cmp.dof = static_cast<int>(cmp.residuals.size());
  if (cmp.dof < 5) {
    throw ValidationError("goodness-of-fit needs at least 5 non-empty bins, got " +
                          std::to_string(cmp.dof));
  }
  return cmp;
}

}  // namespace mesobell
