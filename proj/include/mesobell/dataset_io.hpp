#ifndef MESOBELL_DATASET_IO_HPP
#define MESOBELL_DATASET_IO_HPP

#include <cstdint>
#include <filesystem>
#include <string>

#include "mesobell/eventgen.hpp"

namespace mesobell {

enum class EventFileFormat { Jsonl, Csv };

EventFileFormat event_format_from_string(std::string_view s);  // "jsonl" | "csv"
const char* to_string(EventFileFormat fmt);

/// Canonical event file: one JSON object per line. The first line is the
/// header {"format","seed","count","chunk_size","params"}; every further line
/// is a record {"tl","ml","tr","mr"} with times in ps and mode labels as
/// strings. Numbers are written with shortest round-trip precision.
///
/// The CSV flavour writes headerless records tl,ml,tr,mr and puts the
/// parameter snapshot in a sidecar "<path>.params" in the flat config syntax.
void write_events(const EventDataset& ds, const std::filesystem::path& path,
                  EventFileFormat format = EventFileFormat::Jsonl);

/// Reads either format back (dispatch on the ".csv" extension). Validates the
/// header/record count, every mode label and every time; malformed input
/// throws ParseError with the offending line, filesystem trouble IoError.
EventDataset read_events(const std::filesystem::path& path);

/// FNV-1a 64-bit digest of a file's bytes, for the generate summary and
/// reproducibility checks.
std::uint64_t fnv1a64_file(const std::filesystem::path& path);
std::string digest_hex(std::uint64_t digest);

/// Shortest decimal representation that parses back to exactly the same
/// double (std::to_chars).
std::string format_double(double v);

}  // namespace mesobell

#endif
