#include "mesobell/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "mesobell/errors.hpp"

namespace mesobell {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_double(std::string_view v, std::string_view key, std::uint64_t line) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    throw ParseError("value of '" + std::string(key) + "' is not a number: '" +
                         std::string(v) + "'",
                     line);
  }
  return out;
}

std::uint64_t parse_uint(std::string_view v, std::string_view key, std::uint64_t line) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    throw ParseError("value of '" + std::string(key) + "' is not a nonnegative integer: '" +
                         std::string(v) + "'",
                     line);
  }
  return out;
}

bool parse_bool(std::string_view v, std::string_view key, std::uint64_t line) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ParseError("value of '" + std::string(key) + "' must be true or false", line);
}

// modes = label:flavor:fraction:tag;label:flavor:fraction:tag;...
std::vector<DecayMode> parse_modes(std::string_view v, std::uint64_t line) {
  std::vector<DecayMode> modes;
  while (!v.empty()) {
    const std::size_t semi = v.find(';');
    std::string_view entry = trim(semi == std::string_view::npos ? v : v.substr(0, semi));
    v = semi == std::string_view::npos ? std::string_view{} : v.substr(semi + 1);
    if (entry.empty()) continue;

    std::string_view fields[4];
    for (int i = 0; i < 4; ++i) {
      const std::size_t colon = entry.find(':');
      if (i < 3) {
        if (colon == std::string_view::npos) {
          throw ParseError("mode entry needs label:flavor:fraction:tag", line);
        }
        fields[i] = trim(entry.substr(0, colon));
        entry = entry.substr(colon + 1);
      } else {
        if (colon != std::string_view::npos) {
          throw ParseError("mode entry needs label:flavor:fraction:tag", line);
        }
        fields[i] = trim(entry);
      }
    }
    DecayMode m;
    m.label = std::string(fields[0]);
    m.tags_flavor = flavor_from_string(fields[1]);
    m.branching_fraction = parse_double(fields[2], "modes", line);
    if (fields[3] == "tagged") {
      m.taggable = true;
    } else if (fields[3] == "untagged") {
      m.taggable = false;
    } else {
      throw ParseError("mode tag must be 'tagged' or 'untagged', got '" +
                           std::string(fields[3]) + "'",
                       line);
    }
    modes.push_back(std::move(m));
  }
  if (modes.empty()) throw ParseError("modes list is empty", line);
  return modes;
}

struct KeyValue {
  std::string key;
  std::string value;
  std::uint64_t line;
};

std::vector<KeyValue> scan_flat_file(std::istream& in) {
  std::vector<KeyValue> entries;
  std::set<std::string> seen;
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("expected 'key = value'", line_no);
    }
    std::string key(trim(stripped.substr(0, eq)));
    std::string value(trim(stripped.substr(eq + 1)));
    if (key.empty()) throw ParseError("empty key", line_no);
    if (!seen.insert(key).second) {
      throw ParseError("repeated key '" + key + "'", line_no);
    }
    entries.push_back({std::move(key), std::move(value), line_no});
  }
  return entries;
}

}  // namespace

RunConfig parse_config(std::istream& in, const RunConfig& defaults) {
  RunConfig cfg = defaults;
  for (const KeyValue& kv : scan_flat_file(in)) {
    if (kv.key == "tau") {
      cfg.physics.tau_ps = parse_double(kv.value, kv.key, kv.line);
    } else if (kv.key == "dm") {
      cfg.physics.delta_m = parse_double(kv.value, kv.key, kv.line);
    } else if (kv.key == "modes") {
      cfg.physics.decay_modes = parse_modes(kv.value, kv.line);
    } else if (kv.key == "events") {
      cfg.events = parse_uint(kv.value, kv.key, kv.line);
    } else if (kv.key == "seed") {
      cfg.seed = parse_uint(kv.value, kv.key, kv.line);
    } else if (kv.key == "chunk") {
      cfg.chunk_size = parse_uint(kv.value, kv.key, kv.line);
    } else if (kv.key == "bin_width") {
      cfg.binning.bin_width_ps = parse_double(kv.value, kv.key, kv.line);
    } else if (kv.key == "dt_max") {
      cfg.binning.dt_max_ps = parse_double(kv.value, kv.key, kv.line);
    } else if (kv.key == "tagged_only") {
      cfg.tagged_only = parse_bool(kv.value, kv.key, kv.line);
    } else if (kv.key == "format") {
      cfg.event_format = event_format_from_string(kv.value);
    } else if (kv.key == "out") {
      cfg.out_path = kv.value;
    } else {
      throw ParseError("unknown config key '" + kv.key + "'", kv.line);
    }
  }
  return cfg;
}

RunConfig load_config_file(const std::filesystem::path& path, const RunConfig& defaults) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  try {
    return parse_config(in, defaults);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

PhysicsParams load_params_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open params file '" + path.string() + "'");
  PhysicsParams p;
  for (const KeyValue& kv : scan_flat_file(in)) {
    if (kv.key == "tau") {
      p.tau_ps = parse_double(kv.value, kv.key, kv.line);
    } else if (kv.key == "dm") {
      p.delta_m = parse_double(kv.value, kv.key, kv.line);
    } else if (kv.key == "modes") {
      p.decay_modes = parse_modes(kv.value, kv.line);
    } else {
      throw ParseError(path.string() + ": unknown params key '" + kv.key + "'", kv.line);
    }
  }
  validate(p);
  return p;
}

namespace {

std::string render_modes(const PhysicsParams& p) {
  std::string out;
  for (const auto& m : p.decay_modes) {
    if (!out.empty()) out += ';';
    out += m.label;
    out += ':';
    out += to_string(m.tags_flavor);
    out += ':';
    out += format_double(m.branching_fraction);
    out += m.taggable ? ":tagged" : ":untagged";
  }
  return out;
}

}  // namespace

std::string render_params(const PhysicsParams& p) {
  std::string out;
  out += "tau = " + format_double(p.tau_ps) + "\n";
  out += "dm = " + format_double(p.delta_m) + "\n";
  out += "modes = " + render_modes(p) + "\n";
  return out;
}

std::string render_config(const RunConfig& cfg) {
  std::string out = render_params(cfg.physics);
  out += "events = " + std::to_string(cfg.events) + "\n";
  out += "seed = " + std::to_string(cfg.seed) + "\n";
  out += "chunk = " + std::to_string(cfg.chunk_size) + "\n";
  out += "bin_width = " + format_double(cfg.binning.bin_width_ps) + "\n";
  out += "dt_max = " + format_double(cfg.binning.dt_max_ps) + "\n";
  out += std::string("tagged_only = ") + (cfg.tagged_only ? "true" : "false") + "\n";
  out += std::string("format = ") + to_string(cfg.event_format) + "\n";
  if (!cfg.out_path.empty()) out += "out = " + cfg.out_path + "\n";
  return out;
}

void validate(const RunConfig& cfg) {
  validate(cfg.physics);
  validate(cfg.binning);
  if (cfg.events < 1) throw ValidationError("events must be >= 1");
  if (cfg.chunk_size < 1) throw ValidationError("chunk must be >= 1");
}

void apply_overrides(RunConfig& cfg, const ConfigOverrides& o) {
  if (o.tau) cfg.physics.tau_ps = *o.tau;
  if (o.dm) cfg.physics.delta_m = *o.dm;
  if (o.events) cfg.events = *o.events;
  if (o.seed) cfg.seed = *o.seed;
  if (o.chunk) cfg.chunk_size = *o.chunk;
  if (o.bin_width) cfg.binning.bin_width_ps = *o.bin_width;
  if (o.dt_max) cfg.binning.dt_max_ps = *o.dt_max;
  if (o.tagged_only) cfg.tagged_only = *o.tagged_only;
  if (o.format) cfg.event_format = event_format_from_string(*o.format);
  if (o.out) cfg.out_path = *o.out;
}

}  // namespace mesobell
