#ifndef MESOBELL_CLI_HPP
#define MESOBELL_CLI_HPP

#include <filesystem>
#include <iosfwd>

#include "mesobell/config.hpp"

namespace mesobell {

// Subcommand entry points. Each returns an ExitCode value and writes its
// human-readable summary to `out`; result tables go to the configured paths.

/// Tabulate the closed-form correlation and CHSH curves on a 0.01 ps grid up
/// to dt_max, and report the peak and the violation boundary.
int cmd_predict(const RunConfig& cfg, std::ostream& out);

/// Generate an event file; prints count, seed and the file digest.
int cmd_generate(const RunConfig& cfg, unsigned workers, std::ostream& out);

/// Bin an event file, estimate E and S per bin, write the results table and
/// report the maximum, its significance and the empirical violation window.
/// Physics parameters from the file header take precedence over the config
/// (a mismatch is reported as a warning).
int cmd_estimate(const RunConfig& cfg, const std::filesystem::path& events_file,
                 std::ostream& out, Readout readout = Readout::Direct);

/// Run the self-check battery: parameter invariants, hidden-variable
/// normalization, amplitude/probability equivalence, CHSH identities and the
/// violation boundary. One line per check; nonzero exit if any fails.
int cmd_validate(const RunConfig& cfg, std::ostream& out);

/// Full command-line interface (predict | generate | estimate | validate).
int run_cli(int argc, const char* const* argv);

}  // namespace mesobell

#endif
