#ifndef MESOBELL_CONFIG_HPP
#define MESOBELL_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "mesobell/dataset_io.hpp"
#include "mesobell/estimation.hpp"
#include "mesobell/physics.hpp"

namespace mesobell {

// Resolved run configuration. Worker count is deliberately not part of it:
// the configuration fully determines every output byte.
struct RunConfig {
  PhysicsParams physics;
  std::uint64_t events = 1000000;
  std::uint64_t seed = 42;
  std::uint64_t chunk_size = 65536;
  BinningScheme binning;  // 0.5 ps bins over [0, 7.5] ps
  bool tagged_only = false;
  EventFileFormat event_format = EventFileFormat::Jsonl;
  std::string out_path;  // empty -> per-command default
};

// Flat key-value config file syntax, one "key = value" per line:
//
//   # comment lines and blank lines are ignored
//   tau         = 1.536          mean lifetime, ps
//   dm          = 0.507          mixing frequency, 1/ps
//   modes       = label:flavor:fraction:tag;...   flavor in {B0,B0bar},
//                                                 tag in {tagged,untagged}
//   events      = 1000000
//   seed        = 42
//   chunk       = 65536
//   bin_width   = 0.5            ps
//   dt_max      = 7.5            ps
//   tagged_only = false
//   format      = jsonl          event file format, jsonl or csv
//   out         = path
//
// Unknown and repeated keys are rejected (ParseError with the line number).
RunConfig parse_config(std::istream& in, const RunConfig& defaults = {});
RunConfig load_config_file(const std::filesystem::path& path, const RunConfig& defaults = {});

// Physics subset only (tau, dm, modes); used for CSV sidecar files.
PhysicsParams load_params_file(const std::filesystem::path& path);
std::string render_params(const PhysicsParams& p);

// Every run echoes its fully resolved configuration in the same syntax, so
// any output is reproducible from its own header.
std::string render_config(const RunConfig& cfg);

void validate(const RunConfig& cfg);  // re-validates all embedded invariants

// CLI-flag overrides; flags win over file values, file values over defaults.
struct ConfigOverrides {
  std::optional<double> tau;
  std::optional<double> dm;
  std::optional<std::uint64_t> events;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> chunk;
  std::optional<double> bin_width;
  std::optional<double> dt_max;
  std::optional<bool> tagged_only;
  std::optional<std::string> format;
  std::optional<std::string> out;
};
void apply_overrides(RunConfig& cfg, const ConfigOverrides& o);

}  // namespace mesobell

#endif
