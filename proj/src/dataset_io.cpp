#include "mesobell/dataset_io.hpp"

#include <charconv>
#include <fstream>
#include <system_error>

#include <json.hpp>

#include "mesobell/config.hpp"
#include "mesobell/errors.hpp"

namespace mesobell {

using ordered_json = nlohmann::ordered_json;

EventFileFormat event_format_from_string(std::string_view s) {
  if (s == "jsonl") return EventFileFormat::Jsonl;
  if (s == "csv") return EventFileFormat::Csv;
  throw ParseError("unknown event format '" + std::string(s) + "' (expected jsonl or csv)");
}

const char* to_string(EventFileFormat fmt) {
  return fmt == EventFileFormat::Jsonl ? "jsonl" : "csv";
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

ordered_json params_to_json(const PhysicsParams& p) {
  ordered_json modes = ordered_json::array();
  for (const auto& m : p.decay_modes) {
    modes.push_back({{"label", m.label},
                     {"tags_flavor", to_string(m.tags_flavor)},
                     {"branching_fraction", m.branching_fraction},
                     {"taggable", m.taggable}});
  }
  return {{"tau_ps", p.tau_ps}, {"delta_m_inv_ps", p.delta_m}, {"decay_modes", modes}};
}

PhysicsParams params_from_json(const ordered_json& j) {
  PhysicsParams p;
  p.tau_ps = j.at("tau_ps").get<double>();
  p.delta_m = j.at("delta_m_inv_ps").get<double>();
  p.decay_modes.clear();
  for (const auto& jm : j.at("decay_modes")) {
    DecayMode m;
    m.label = jm.at("label").get<std::string>();
    m.tags_flavor = flavor_from_string(jm.at("tags_flavor").get<std::string>());
    m.branching_fraction = jm.at("branching_fraction").get<double>();
    m.taggable = jm.at("taggable").get<bool>();
    p.decay_modes.push_back(std::move(m));
  }
  return p;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

void write_jsonl(const EventDataset& ds, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  ordered_json header = {{"format", ds.header.format},
                         {"seed", ds.header.seed},
                         {"count", ds.header.count},
                         {"chunk_size", ds.header.chunk_size},
                         {"params", params_to_json(ds.header.params)}};
  out << header.dump() << '\n';

  const auto& modes = ds.header.params.decay_modes;
  std::string line;
  line.reserve(128);
  for (const PairEvent& ev : ds.events) {
    line.clear();
    line += "{\"tl\":";
    line += format_double(ev.t_l_ps);
    line += ",\"ml\":\"";
    line += modes.at(ev.mode_l).label;  // labels are [A-Za-z0-9_-], no escaping needed
    line += "\",\"tr\":";
    line += format_double(ev.t_r_ps);
    line += ",\"mr\":\"";
    line += modes.at(ev.mode_r).label;
    line += "\"}\n";
    out << line;
  }
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

void write_csv(const EventDataset& ds, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  const auto& modes = ds.header.params.decay_modes;
  for (const PairEvent& ev : ds.events) {
    out << format_double(ev.t_l_ps) << ',' << modes.at(ev.mode_l).label << ','
        << format_double(ev.t_r_ps) << ',' << modes.at(ev.mode_r).label << '\n';
  }
  if (!out) throw IoError("write failure on '" + path.string() + "'");

  std::filesystem::path sidecar = path;
  sidecar += ".params";
  std::ofstream side = open_out(sidecar);
  side << render_params(ds.header.params);
  if (!side) throw IoError("write failure on '" + sidecar.string() + "'");
}

double parse_time_field(const ordered_json& rec, const char* key, std::uint64_t line_no) {
  const auto it = rec.find(key);
  if (it == rec.end() || !it->is_number()) {
    throw ParseError(std::string("record is missing numeric field \"") + key + "\"", line_no);
  }
  const double t = it->get<double>();
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw ParseError(std::string("field \"") + key + "\" must be a nonnegative time", line_no);
  }
  return t;
}

std::uint32_t parse_mode_field(const ordered_json& rec, const char* key,
                               const PhysicsParams& p, std::uint64_t line_no) {
  const auto it = rec.find(key);
  if (it == rec.end() || !it->is_string()) {
    throw ParseError(std::string("record is missing string field \"") + key + "\"", line_no);
  }
  try {
    return static_cast<std::uint32_t>(p.mode_index(it->get<std::string>()));
  } catch (const std::out_of_range& e) {
    throw ParseError(e.what(), line_no);
  }
}

EventDataset read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");

  std::string line;
  std::uint64_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("event file is empty: " + path.string());
  ++line_no;

  EventDataset ds;
  try {
    const ordered_json header = ordered_json::parse(line);
    const std::string format = header.at("format").get<std::string>();
    if (format != kEventFormatVersion) {
      throw ParseError("unsupported event format '" + format + "', expected '" +
                           kEventFormatVersion + "'",
                       line_no);
    }
    ds.header.format = format;
    ds.header.seed = header.at("seed").get<std::uint64_t>();
    ds.header.count = header.at("count").get<std::uint64_t>();
    ds.header.chunk_size = header.value("chunk_size", std::uint64_t{65536});
    ds.header.params = params_from_json(header.at("params"));
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string("bad header: ") + e.what(), line_no);
  }
  validate(ds.header.params);

  ds.events.reserve(std::min<std::uint64_t>(ds.header.count, 1u << 22));
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json rec;
    try {
      rec = ordered_json::parse(line);
    } catch (const std::exception& e) {
      throw ParseError(std::string("bad record: ") + e.what(), line_no);
    }
    PairEvent ev;
    ev.t_l_ps = parse_time_field(rec, "tl", line_no);
    ev.mode_l = parse_mode_field(rec, "ml", ds.header.params, line_no);
    ev.t_r_ps = parse_time_field(rec, "tr", line_no);
    ev.mode_r = parse_mode_field(rec, "mr", ds.header.params, line_no);
    ds.events.push_back(ev);
  }

  if (ds.events.size() != ds.header.count) {
    throw ParseError("header count " + std::to_string(ds.header.count) +
                     " does not match record count " + std::to_string(ds.events.size()));
  }
  return ds;
}

double parse_csv_time(std::string_view field, std::uint64_t line_no) {
  double t = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), t);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size() || !(t >= 0.0)) {
    throw ParseError("bad time field '" + std::string(field) + "'", line_no);
  }
  return t;
}

EventDataset read_csv(const std::filesystem::path& path) {
  std::filesystem::path sidecar = path;
  sidecar += ".params";
  if (!std::filesystem::exists(sidecar)) {
    throw IoError("CSV input needs a parameter sidecar at '" + sidecar.string() + "'");
  }

  EventDataset ds;
  ds.header.params = load_params_file(sidecar);

  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::string_view view = line;
    std::string_view fields[4];
    for (int i = 0; i < 4; ++i) {
      const std::size_t comma = view.find(',');
      if (i < 3) {
        if (comma == std::string_view::npos) {
          throw ParseError("expected 4 comma-separated fields", line_no);
        }
        fields[i] = view.substr(0, comma);
        view.remove_prefix(comma + 1);
      } else {
        if (comma != std::string_view::npos) {
          throw ParseError("expected 4 comma-separated fields", line_no);
        }
        fields[i] = view;
      }
    }
    PairEvent ev;
    ev.t_l_ps = parse_csv_time(fields[0], line_no);
    ev.t_r_ps = parse_csv_time(fields[2], line_no);
    try {
      ev.mode_l = static_cast<std::uint32_t>(ds.header.params.mode_index(fields[1]));
      ev.mode_r = static_cast<std::uint32_t>(ds.header.params.mode_index(fields[3]));
    } catch (const std::out_of_range& e) {
      throw ParseError(e.what(), line_no);
    }
    ds.events.push_back(ev);
  }
  ds.header.count = ds.events.size();
  return ds;
}

}  // namespace

void write_events(const EventDataset& ds, const std::filesystem::path& path,
                  EventFileFormat format) {
  if (ds.events.size() != ds.header.count) {
    throw ValidationError("dataset header count " + std::to_string(ds.header.count) +
                          " does not match its " + std::to_string(ds.events.size()) +
                          " records");
  }
  if (format == EventFileFormat::Jsonl) {
    write_jsonl(ds, path);
  } else {
    write_csv(ds, path);
  }
}

EventDataset read_events(const std::filesystem::path& path) {
  if (path.extension() == ".csv") return read_csv(path);
  return read_jsonl(path);
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for digest");
  std::uint64_t hash = 0xcbf29ce484222325ull;
  char buf[65536];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 0x100000001b3ull;
    }
  }
  return hash;
}

std::string digest_hex(std::uint64_t digest) {
  static const char* hex = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = hex[digest & 0xf];
    digest >>= 4;
  }
  return s;
}

}  // namespace mesobell
