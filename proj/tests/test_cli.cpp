#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "mesobell/cli.hpp"
#include "mesobell/dataset_io.hpp"
#include "mesobell/errors.hpp"

using namespace mesobell;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("mesobell-cli-" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Everything after the comment header of a results/prediction CSV.
std::string data_rows(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string line, rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.front() == '#') continue;
    rows += line;
    rows += '\n';
  }
  return rows;
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(MESOBELL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("predict reports the peak and the boundary") {
  TempDir tmp;
  RunConfig cfg;
  cfg.out_path = (tmp.path / "pred.csv").string();

  std::ostringstream out;
  CHECK(cmd_predict(cfg, out) == kExitOk);
  const std::string text = out.str();
  CHECK(text.find("S_max = 2.8284271247461903") != std::string::npos);
  CHECK(text.find("dt = 1.549108803545263") != std::string::npos);
  CHECK(text.find("dt* = 2.3590") != std::string::npos);
  CHECK(text.find("resolved config:") != std::string::npos);

  // 0.01 ps grid over [0, 7.5]: 751 rows plus column header.
  std::istringstream csv(data_rows(cfg.out_path));
  std::string line;
  int rows = 0;
  while (std::getline(csv, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 752);
}

TEST_CASE("predict rejects a frozen mixing frequency") {
  RunConfig cfg;
  cfg.physics.delta_m = 0.0;
  std::ostringstream out;
  CHECK_THROWS_AS(cmd_predict(cfg, out), ValidationError);
}

TEST_CASE("generate is reproducible and self-describing") {
  TempDir tmp;
  RunConfig cfg;
  cfg.events = 1000;
  cfg.seed = 7;

  cfg.out_path = (tmp.path / "a.jsonl").string();
  std::ostringstream out_a;
  CHECK(cmd_generate(cfg, 1, out_a) == kExitOk);

  cfg.out_path = (tmp.path / "b.jsonl").string();
  std::ostringstream out_b;
  CHECK(cmd_generate(cfg, 4, out_b) == kExitOk);

  CHECK(slurp(tmp.path / "a.jsonl") == slurp(tmp.path / "b.jsonl"));
  CHECK(out_a.str().find("count = 1000") != std::string::npos);
  CHECK(out_a.str().find("seed = 7") != std::string::npos);

  // Both summaries state the identical digest.
  const auto digest_line = [](const std::string& s) {
    const auto pos = s.find("digest = ");
    REQUIRE(pos != std::string::npos);
    return s.substr(pos, 35);
  };
  CHECK(digest_line(out_a.str()) == digest_line(out_b.str()));
}

TEST_CASE("generate rejects an empty request") {
  RunConfig cfg;
  cfg.events = 0;
  std::ostringstream out;
  CHECK_THROWS_AS(cmd_generate(cfg, 1, out), ValidationError);
}

TEST_CASE("estimate finds a strong violation on a generated sample") {
  TempDir tmp;
  RunConfig cfg;
  cfg.events = 100000;
  cfg.seed = 42;
  cfg.out_path = (tmp.path / "ev.jsonl").string();
  std::ostringstream gen_out;
  REQUIRE(cmd_generate(cfg, 2, gen_out) == kExitOk);

  RunConfig est = cfg;
  est.out_path = (tmp.path / "res.csv").string();
  std::ostringstream out;
  CHECK(cmd_estimate(est, tmp.path / "ev.jsonl", out) == kExitOk);

  const std::string text = out.str();
  CHECK(text.find("max S_hat = 2.") != std::string::npos);
  CHECK(text.find("violation window") != std::string::npos);

  // Parse the printed significance and demand a >3 sigma excess.
  const auto pos = text.find("sigma = ");
  REQUIRE(pos != std::string::npos);
  CHECK(std::stod(text.substr(pos + 8)) > 3.0);

  // Round trip: estimating the in-memory dataset and the re-read file must
  // agree bit for bit on the results table.
  RunConfig again = est;
  again.out_path = (tmp.path / "res2.csv").string();
  std::ostringstream out2;
  CHECK(cmd_estimate(again, tmp.path / "ev.jsonl", out2) == kExitOk);
  CHECK(data_rows(tmp.path / "res.csv") == data_rows(tmp.path / "res2.csv"));
}

TEST_CASE("estimate lets the event-file header override the config physics") {
  TempDir tmp;
  RunConfig cfg;
  cfg.events = 2000;
  cfg.seed = 3;
  cfg.out_path = (tmp.path / "ev.jsonl").string();
  std::ostringstream gen_out;
  REQUIRE(cmd_generate(cfg, 1, gen_out) == kExitOk);

  RunConfig skewed = cfg;
  skewed.physics.delta_m = 0.9;  // disagrees with what was generated
  skewed.out_path = (tmp.path / "res.csv").string();
  std::ostringstream out;
  CHECK(cmd_estimate(skewed, tmp.path / "ev.jsonl", out) == kExitOk);
  CHECK(out.str().find("warning: config physics differ") != std::string::npos);
  CHECK(out.str().find("dm = 0.507") != std::string::npos);  // header wins
}

TEST_CASE("estimate surfaces parse failures with the line") {
  TempDir tmp;
  RunConfig cfg;
  cfg.events = 50;
  cfg.seed = 1;
  cfg.out_path = (tmp.path / "ev.jsonl").string();
  std::ostringstream gen_out;
  REQUIRE(cmd_generate(cfg, 1, gen_out) == kExitOk);

  std::string text = slurp(tmp.path / "ev.jsonl");
  text.resize(text.size() - 7);
  std::ofstream(tmp.path / "ev.jsonl", std::ios::binary) << text;

  std::ostringstream out;
  CHECK_THROWS_WITH_AS(cmd_estimate(cfg, tmp.path / "ev.jsonl", out),
                       doctest::Contains("line 51"), ParseError);
}

TEST_CASE("estimate with only untaggable decays is a diagnostic error") {
  TempDir tmp;
  EventDataset ds;
  ds.header.params = PhysicsParams{};
  const auto other_b0 = static_cast<std::uint32_t>(ds.header.params.mode_index("other-B0"));
  const auto other_b0bar =
      static_cast<std::uint32_t>(ds.header.params.mode_index("other-B0bar"));
  for (int i = 0; i < 20; ++i) {
    ds.events.push_back({0.5 + 0.1 * i, other_b0, 0.4, other_b0bar});
  }
  ds.header.count = ds.events.size();
  const fs::path file = tmp.path / "untagged.jsonl";
  write_events(ds, file);

  RunConfig cfg;
  cfg.tagged_only = true;
  cfg.out_path = (tmp.path / "res.csv").string();
  std::ostringstream out;
  CHECK_THROWS_WITH_AS(cmd_estimate(cfg, file, out), doctest::Contains("taggable"),
                       ValidationError);
}

TEST_CASE("validate passes the defaults and survives an adversarial dm") {
  std::ostringstream out;
  CHECK(cmd_validate(RunConfig{}, out) == kExitOk);
  CHECK(out.str().find("all checks passed") != std::string::npos);

  RunConfig fast;
  fast.physics.delta_m = 1000.0;
  std::ostringstream out_fast;
  CHECK(cmd_validate(fast, out_fast) == kExitOk);
}

TEST_CASE("validate names a broken branching sum") {
  RunConfig cfg;
  cfg.physics.decay_modes[1].branching_fraction = 0.846;  // sums to 0.9
  cfg.physics.decay_modes[3].branching_fraction = 0.846;
  std::ostringstream out;
  CHECK(cmd_validate(cfg, out) == kExitValidation);
  CHECK(out.str().find("FAIL parameter-invariants") != std::string::npos);
  CHECK(out.str().find("sum") != std::string::npos);
  // The normalization audit independently sees the same defect.
  CHECK(out.str().find("FAIL hidden-variable-normalization") != std::string::npos);
}

// ---------------------------------------------------------------------------
// End-to-end runs of the installed binary.
// ---------------------------------------------------------------------------

TEST_CASE("the binary wires subcommands to the documented exit codes") {
  TempDir tmp;
  const std::string ev = (tmp.path / "ev.jsonl").string();
  const std::string res = (tmp.path / "res.csv").string();
  const std::string pred = (tmp.path / "pred.csv").string();

  CHECK(run_binary("generate --events 20000 --seed 5 --out " + ev) == kExitOk);
  CHECK(run_binary("estimate " + ev + " --out " + res) == kExitOk);
  CHECK(run_binary("estimate " + ev + " --readout hv --out " + res + ".hv") == kExitOk);
  CHECK(run_binary("predict --out " + pred) == kExitOk);
  CHECK(run_binary("validate") == kExitOk);

  CHECK(data_rows(res) == data_rows(res + ".hv"));

  CHECK(run_binary("no-such-command") == kExitUsage);
  CHECK(run_binary("generate --events 0 --out " + ev) == kExitValidation);
  CHECK(run_binary("predict --dm 0 --out " + pred) == kExitValidation);
  CHECK(run_binary("estimate " + tmp.path.string() + "/missing.jsonl") == kExitIo);

  std::ofstream(tmp.path / "garbage.jsonl") << "not json\n";
  CHECK(run_binary("estimate " + (tmp.path / "garbage.jsonl").string()) == kExitParse);
}

TEST_CASE("the binary honors config files with flag overrides") {
  TempDir tmp;
  const fs::path cfg_file = tmp.path / "run.cfg";
  std::ofstream(cfg_file) << "events = 500\nseed = 21\nout = " << (tmp.path / "a.jsonl").string()
                          << "\n";

  CHECK(run_binary("generate --config " + cfg_file.string()) == kExitOk);
  CHECK(fs::exists(tmp.path / "a.jsonl"));

  // The --out flag must override the config file's path.
  CHECK(run_binary("generate --config " + cfg_file.string() + " --out " +
                   (tmp.path / "b.jsonl").string()) == kExitOk);
  CHECK(fs::exists(tmp.path / "b.jsonl"));
  CHECK(slurp(tmp.path / "a.jsonl") == slurp(tmp.path / "b.jsonl"));

  std::ofstream(cfg_file, std::ios::app) << "mystery = 1\n";
  CHECK(run_binary("generate --config " + cfg_file.string()) == kExitParse);
}
