#ifndef MESOBELL_ESTIMATION_HPP
#define MESOBELL_ESTIMATION_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "mesobell/eventgen.hpp"
#include "mesobell/physics.hpp"

namespace mesobell {

// Binning convention: dt = |t_l - t_r|. The correlation depends on cos(dm dt)
// only, which is even, so folding the sign doubles the statistics per bin.
struct BinningScheme {
  double bin_width_ps = 0.5;
  double dt_max_ps = 7.5;  // must be a positive multiple of the width

  int bin_count() const;
  int bin_index(double abs_dt_ps) const;  // -1 when outside [0, dt_max)
  double bin_center(int k) const;
  double bin_low(int k) const;
  double bin_high(int k) const;
};

void validate(const BinningScheme& scheme);  // throws ValidationError

struct BinnedCorrelation {
  double center_ps = 0.0;
  std::int64_t n_same = 0;
  std::int64_t n_opp = 0;

  std::int64_t n() const { return n_same + n_opp; }
  bool empty() const { return n() == 0; }

  // (n_same - n_opp) / n; throws ValidationError on an empty bin.
  double e_hat() const;
  // Binomial (Wald) uncertainty sqrt((1 - e^2)/n); zero in the degenerate
  // one-sided case.
  double sigma_wald() const;
  // Uncertainty used for inference: Wald, except that one-sided bins fall
  // back to twice the Wilson half-width (z = 1), i.e. 1/(n + 1). Keeps
  // significances finite and conservative.
  double sigma() const;
};

struct CorrelationEstimate {
  double e_hat;
  double sigma_e;  // Wald
};

/// The per-bin estimate exactly as stored in the type; throws
/// ValidationError on an empty bin (an empty bin is an error, never E = 0).
CorrelationEstimate estimate_correlation(const BinnedCorrelation& bin);

// How the flavour of each side is obtained while binning. Both paths yield
// identical results by construction; Direct reads the record as a pair of
// observed decays, HiddenVariable routes every side through
// deterministic_outcome, reading the same record as a predetermined tuple.
enum class Readout { Direct, HiddenVariable };

/// Count same- and opposite-flavour pairs per |t_l - t_r| bin. Events whose
/// dt falls outside the scheme are skipped. With tagged_only set, events
/// where either side decayed through an untaggable mode are dropped (the
/// realistic readout). Throws ValidationError when the dataset is empty or
/// when no event landed in any bin.
std::vector<BinnedCorrelation> bin_events(const EventDataset& ds,
                                          const BinningScheme& scheme,
                                          bool tagged_only,
                                          Readout readout = Readout::Direct);

struct ChshEstimate {
  double delta_t_ps = 0.0;
  double s_hat = 0.0;         // |3 E(dt) - E(3 dt)|
  double sigma_s = 0.0;       // sqrt(9 sigma(dt)^2 + sigma(3 dt)^2)
  double significance = 0.0;  // (s_hat - 2) / sigma_s
};

/// Combine the bins containing dt and 3 dt. The two bins are disjoint event
/// sets, hence independent. Throws std::invalid_argument when either bin is
/// missing, when both fall into the same bin, or when one is empty.
ChshEstimate estimate_chsh(const std::vector<BinnedCorrelation>& bins,
                           const BinningScheme& scheme, double delta_t_ps);

struct ChshCurve {
  std::vector<ChshEstimate> points;  // admissible grid points (bin centers)
  int argmax = -1;                   // index into points, -1 when points empty
  // Centers of the first and last grid points with s_hat > 2.
  std::optional<std::pair<double, double>> violation_window;

  const ChshEstimate& max() const { return points.at(static_cast<std::size_t>(argmax)); }
};

/// Evaluate the CHSH estimator at every bin center whose 3 dt partner bin
/// exists, is distinct and is non-empty.
ChshCurve scan_chsh(const std::vector<BinnedCorrelation>& bins, const BinningScheme& scheme);

struct ModelComparison {
  struct Residual {
    double center_ps;
    double value;  // (e_hat + cos(dm * center)) / sigma
  };
  std::vector<Residual> residuals;  // non-empty bins only
  double chi2 = 0.0;
  int dof = 0;  // number of contributing bins; nothing is fitted
  double reduced() const { return chi2 / dof; }
};

/// Goodness of fit of the binned estimates against the closed-form
/// correlation at the bin centers. Requires at least 5 non-empty bins;
/// throws ValidationError otherwise.
ModelComparison compare_to_model(const std::vector<BinnedCorrelation>& bins,
                                 const PhysicsParams& p);

}  // namespace mesobell

#endif
