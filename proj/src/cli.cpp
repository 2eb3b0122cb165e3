#include "mesobell/cli.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include <CLI11.hpp>

#include "mesobell/errors.hpp"
#include "mesobell/estimation.hpp"
#include "mesobell/eventgen.hpp"
#include "mesobell/rng.hpp"

namespace mesobell {

namespace {

void echo_config(const RunConfig& cfg, std::ostream& out) {
  out << "resolved config:\n";
  std::istringstream lines(render_config(cfg));
  std::string line;
  while (std::getline(lines, line)) out << "  " << line << '\n';
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

void write_comment_header(std::ostream& out, const std::string& kind, const RunConfig& cfg) {
  out << "# " << kind << '\n';
  std::istringstream lines(render_config(cfg));
  std::string line;
  while (std::getline(lines, line)) out << "# " << line << '\n';
}

bool same_physics(const PhysicsParams& a, const PhysicsParams& b) {
  if (a.tau_ps != b.tau_ps || a.delta_m != b.delta_m) return false;
  if (a.decay_modes.size() != b.decay_modes.size()) return false;
  for (std::size_t i = 0; i < a.decay_modes.size(); ++i) {
    const auto& ma = a.decay_modes[i];
    const auto& mb = b.decay_modes[i];
    if (ma.label != mb.label || ma.tags_flavor != mb.tags_flavor ||
        ma.branching_fraction != mb.branching_fraction || ma.taggable != mb.taggable) {
      return false;
    }
  }
  return true;
}

}  // namespace

int cmd_predict(const RunConfig& cfg, std::ostream& out) {
  validate(cfg);
  echo_config(cfg, out);

  const std::string path = cfg.out_path.empty() ? "prediction.csv" : cfg.out_path;
  std::ofstream csv = open_out(path);
  write_comment_header(csv, "mesobell-prediction/1", cfg);
  csv << "delta_t,E_qm,S_qm\n";
  const double step = 0.01;
  const auto n_steps = static_cast<long>(std::llround(cfg.binning.dt_max_ps / step));
  for (long i = 0; i <= n_steps; ++i) {
    const double dt = static_cast<double>(i) * step;
    csv << format_double(dt) << ',' << format_double(correlation(dt, cfg.physics)) << ','
        << format_double(chsh_statistic(dt, cfg.physics)) << '\n';
  }
  if (!csv) throw IoError("write failure on '" + path + "'");

  const ChshPeak peak = chsh_peak(cfg.physics);
  const double boundary = violation_boundary(cfg.physics);
  out << "prediction written to " << path << '\n';
  out << "S_max = " << format_double(peak.s) << " at dt = " << format_double(peak.delta_t_ps)
      << " ps (dm*dt = pi/4)\n";
  out << "violation boundary dt* = " << format_double(boundary) << " ps ("
      << format_double(boundary / cfg.physics.tau_ps) << " lifetimes)\n";
  return kExitOk;
}

int cmd_generate(const RunConfig& cfg, unsigned workers, std::ostream& out) {
  validate(cfg);
  echo_config(cfg, out);

  GenerationConfig gen;
  gen.count = cfg.events;
  gen.seed = cfg.seed;
  gen.chunk_size = cfg.chunk_size;
  gen.params = cfg.physics;
  const EventDataset ds = generate_dataset(gen, workers);

  const std::string path =
      cfg.out_path.empty()
          ? std::string("events.") + to_string(cfg.event_format)
          : cfg.out_path;
  write_events(ds, path, cfg.event_format);

  out << "events written to " << path << '\n';
  out << "count = " << ds.header.count << '\n';
  out << "seed = " << ds.header.seed << '\n';
  out << "digest = fnv1a64:" << digest_hex(fnv1a64_file(path)) << '\n';
  return kExitOk;
}

int cmd_estimate(const RunConfig& cfg, const std::filesystem::path& events_file,
                 std::ostream& out, Readout readout) {
  validate(cfg.binning);
  const EventDataset ds = read_events(events_file);

  // The event file documents what was actually generated; its parameter
  // snapshot wins over whatever the config says.
  RunConfig resolved = cfg;
  resolved.physics = ds.header.params;
  resolved.events = ds.header.count;
  resolved.seed = ds.header.seed;
  resolved.chunk_size = ds.header.chunk_size;
  if (!same_physics(cfg.physics, ds.header.params)) {
    out << "warning: config physics differ from the event file header; "
           "header values take precedence\n";
  }
  echo_config(resolved, out);

  const std::vector<BinnedCorrelation> bins =
      bin_events(ds, resolved.binning, resolved.tagged_only, readout);
  const ChshCurve curve = scan_chsh(bins, resolved.binning);

  const std::string path = resolved.out_path.empty() ? "results.csv" : resolved.out_path;
  std::ofstream csv = open_out(path);
  write_comment_header(csv, "mesobell-results/1", resolved);
  csv << "# readout = " << (readout == Readout::Direct ? "direct" : "hidden-variable")
      << '\n';
  csv << "delta_t,E_hat,sigma_E,S_hat,sigma_S,n_same,n_opp\n";
  for (int k = 0; k < resolved.binning.bin_count(); ++k) {
    const auto& bin = bins[static_cast<std::size_t>(k)];
    const ChshEstimate* point = nullptr;
    for (const auto& pt : curve.points) {
      if (pt.delta_t_ps == bin.center_ps) {
        point = &pt;
        break;
      }
    }
    csv << format_double(bin.center_ps) << ',';
    if (bin.empty()) {
      csv << "nan,nan,";
    } else {
      csv << format_double(bin.e_hat()) << ',' << format_double(bin.sigma_wald()) << ',';
    }
    if (point != nullptr) {
      csv << format_double(point->s_hat) << ',' << format_double(point->sigma_s) << ',';
    } else {
      csv << "nan,nan,";
    }
    csv << bin.n_same << ',' << bin.n_opp << '\n';
  }
  if (!csv) throw IoError("write failure on '" + path + "'");
  out << "results written to " << path << '\n';

  if (curve.points.empty()) {
    out << "no admissible CHSH grid points (need non-empty bins at dt and 3 dt)\n";
    return kExitOk;
  }
  const ChshEstimate& best = curve.max();
  out << "max S_hat = " << format_double(best.s_hat) << " +- " << format_double(best.sigma_s)
      << " at dt = " << format_double(best.delta_t_ps) << " ps\n";
  out << "significance (S_hat - 2)/sigma = " << format_double(best.significance) << '\n';
  if (curve.violation_window) {
    out << "violation window: dt in [" << format_double(curve.violation_window->first)
        << ", " << format_double(curve.violation_window->second) << "] ps\n";
  } else {
    out << "violation window: none (no grid point exceeds 2)\n";
  }

  try {
    const ModelComparison gof = compare_to_model(bins, resolved.physics);
    out << "model goodness-of-fit: chi2/dof = " << format_double(gof.chi2) << "/"
        << gof.dof << " = " << format_double(gof.reduced()) << '\n';
  } catch (const ValidationError& e) {
    out << "model goodness-of-fit skipped: " << e.what() << '\n';
  }
  return kExitOk;
}

namespace {

struct Check {
  std::string name;
  bool passed;
  std::string detail;
};

void run_check(std::vector<Check>& checks, const std::string& name,
               const std::function<std::pair<bool, std::string>()>& body) {
  try {
    auto [ok, detail] = body();
    checks.push_back({name, ok, detail});
  } catch (const std::exception& e) {
    checks.push_back({name, false, e.what()});
  }
}

}  // namespace

int cmd_validate(const RunConfig& cfg, std::ostream& out) {
  echo_config(cfg, out);
  const PhysicsParams& p = cfg.physics;
  std::vector<Check> checks;

  run_check(checks, "parameter-invariants", [&] {
    validate(p);
    return std::pair{true, std::string("tau, dm and mode table are consistent")};
  });

  run_check(checks, "binning-invariants", [&] {
    validate(cfg.binning);
    return std::pair{true, std::string("bin width and range are consistent")};
  });

  run_check(checks, "hidden-variable-normalization", [&] {
    const NormalizationAudit audit = normalization_audit(p);
    const double deviation = std::abs(audit.value - 1.0);
    return std::pair{deviation <= 1e-6,
                     "integral = " + format_double(audit.value) +
                         ", residual = " + format_double(audit.residual)};
  });

  // Fixed-seed random sweep shared by the pointwise identity checks.
  run_check(checks, "amplitude-probability-equivalence", [&] {
    std::mt19937_64 rng(0x5eedu);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double t_l = exponential_draw(rng, p.tau_ps);
      const double t_r = exponential_draw(rng, p.tau_ps);
      const FlavorPair pair = flavor_pair(static_cast<int>(rng() % kFlavorPairCount));
      const double prob = joint_flavor_probability(t_l, t_r, pair, p);
      const double amp2 = std::norm(pair_amplitude(t_l, t_r, pair, p));
      worst = std::max(worst, std::abs(prob - amp2));
    }
    return std::pair{worst <= 1e-12, "max |amp^2 - P| = " + format_double(worst)};
  });

  run_check(checks, "probability-completeness", [&] {
    std::mt19937_64 rng(0xc0ffeeu);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double t_l = exponential_draw(rng, p.tau_ps);
      const double t_r = exponential_draw(rng, p.tau_ps);
      double sum = 0.0;
      for (int k = 0; k < kFlavorPairCount; ++k) {
        sum += joint_flavor_probability(t_l, t_r, flavor_pair(k), p);
      }
      worst = std::max(worst, std::abs(sum - std::exp(-(t_l + t_r) / p.tau_ps)));
    }
    return std::pair{worst <= 1e-12, "max completeness defect = " + format_double(worst)};
  });

  run_check(checks, "chsh-cubic-identity", [&] {
    double worst = 0.0;
    for (int i = 0; i <= 1000; ++i) {
      const double dt = static_cast<double>(i) * 2.0 * std::numbers::pi /
                        (1000.0 * p.delta_m);
      const double c = std::cos(p.delta_m * dt);
      const double identity = std::abs(6.0 * c - 4.0 * c * c * c);
      worst = std::max(worst, std::abs(chsh_statistic(dt, p) - identity));
    }
    return std::pair{worst <= 1e-12, "max identity defect = " + format_double(worst)};
  });

  run_check(checks, "chsh-peak", [&] {
    const ChshPeak peak = chsh_peak(p);
    const double defect = std::abs(peak.s - 2.0 * std::numbers::sqrt2);
    return std::pair{defect <= 1e-9,
                     "S(pi/(4 dm)) = " + format_double(peak.s) +
                         ", defect = " + format_double(defect)};
  });

  run_check(checks, "violation-boundary", [&] {
    const double x = p.delta_m * violation_boundary(p);
    const double expected = std::acos(0.5 * (std::numbers::sqrt3 - 1.0));
    const double defect = std::abs(x - expected);
    return std::pair{defect <= 1e-8,
                     "dm*dt* = " + format_double(x) + ", defect = " + format_double(defect)};
  });

  bool all_ok = true;
  for (const Check& c : checks) {
    all_ok = all_ok && c.passed;
    out << (c.passed ? "ok   " : "FAIL ") << c.name << ": " << c.detail << '\n';
  }
  out << (all_ok ? "all checks passed\n" : "validation failed\n");
  return all_ok ? kExitOk : kExitValidation;
}

namespace {

struct CliFlags {
  std::string config_path;
  ConfigOverrides overrides;
  // CLI11 needs lvalues to bind to; values present after parsing are
  // harvested into `overrides` via the bindings below.
  double tau = 0, dm = 0, bin_width = 0, dt_max = 0;
  std::uint64_t events = 0, seed = 0, chunk = 0;
  bool tagged_only = false;
  std::string format, out;

  struct Binding {
    CLI::Option* option;
    std::function<void()> apply;
  };
  std::vector<Binding> bindings;

  void harvest() {
    for (const Binding& b : bindings) {
      if (b.option->count() > 0) b.apply();
    }
  }
};

void add_common_options(CLI::App* sub, CliFlags& flags) {
  sub->add_option("--config", flags.config_path, "config file (flat key = value)");
  auto bind = [sub, &flags](const char* name, auto& slot, auto& target, const char* help) {
    CLI::Option* option = sub->add_option(name, slot, help);
    flags.bindings.push_back({option, [&slot, &target]() { target = slot; }});
  };
  bind("--tau", flags.tau, flags.overrides.tau, "mean lifetime, ps");
  bind("--dm", flags.dm, flags.overrides.dm, "mixing frequency, 1/ps");
  bind("--events", flags.events, flags.overrides.events, "number of pairs to generate");
  bind("--seed", flags.seed, flags.overrides.seed, "master seed");
  bind("--chunk", flags.chunk, flags.overrides.chunk, "events per seeding chunk");
  bind("--bin-width", flags.bin_width, flags.overrides.bin_width, "dt bin width, ps");
  bind("--dt-max", flags.dt_max, flags.overrides.dt_max, "dt range upper edge, ps");
  bind("--format", flags.format, flags.overrides.format, "event file format: jsonl|csv");
  bind("--out", flags.out, flags.overrides.out, "output path");
  CLI::Option* tagged = sub->add_flag(
      "--tagged-only", flags.tagged_only,
      "use only events where both sides decayed through tagging modes");
  flags.bindings.push_back({tagged, [&flags]() { flags.overrides.tagged_only = true; }});
}

RunConfig resolve_config(CliFlags& flags) {
  flags.harvest();
  RunConfig cfg;
  if (!flags.config_path.empty()) cfg = load_config_file(flags.config_path, cfg);
  apply_overrides(cfg, flags.overrides);
  return cfg;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Entangled neutral-B-meson pair simulator and Bell-test analysis"};
  app.require_subcommand(1);

  CliFlags flags;
  unsigned workers = 0;
  std::string events_file;
  std::string readout_name = "direct";

  CLI::App* predict = app.add_subcommand(
      "predict", "tabulate the closed-form correlation and CHSH curves");
  add_common_options(predict, flags);

  CLI::App* generate =
      app.add_subcommand("generate", "draw pair events from the joint decay distribution");
  add_common_options(generate, flags);
  generate->add_option("--workers", workers,
                       "generator threads (0 = all cores); never changes the output");

  CLI::App* estimate =
      app.add_subcommand("estimate", "bin an event file and estimate E and S per dt");
  add_common_options(estimate, flags);
  estimate->add_option("events_file", events_file, "event file (.jsonl or .csv)")
      ->required();
  estimate->add_option("--readout", readout_name,
                       "flavour readout path: direct | hv (hidden-variable projection)")
      ->check(CLI::IsMember({"direct", "hv"}));

  CLI::App* validate_cmd =
      app.add_subcommand("validate", "run the internal consistency checks");
  add_common_options(validate_cmd, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const RunConfig cfg = resolve_config(flags);
    if (predict->parsed()) return cmd_predict(cfg, std::cout);
    if (generate->parsed()) return cmd_generate(cfg, workers, std::cout);
    if (estimate->parsed()) {
      const Readout readout =
          readout_name == "hv" ? Readout::HiddenVariable : Readout::Direct;
      return cmd_estimate(cfg, events_file, std::cout, readout);
    }
    return cmd_validate(cfg, std::cout);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}

}  // namespace mesobell
