#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rampo/cegar.hpp"
#include "rampo/ranges.hpp"

namespace rampo::app {

using Json = nlohmann::ordered_json;

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitProperty = 1;
inline constexpr int kExitUsage = 2;

struct ControllerConfig {
  std::string source;  // path as written in the config
  std::string text;    // program text, loaded or embedded
  std::string entry = "control";
  std::vector<std::string> inputs;
  std::vector<std::string> controls;
  Box box;
};

struct PlantConfig {
  std::string name;
  PlantParams params;
};

struct RunConfig {
  std::string name;
  ControllerConfig controller;
  PlantConfig plant;
  std::string spec;
  int horizon = 0;
  std::vector<std::pair<std::string, Interval>> x0;  // plant state order
  Budget budget;
  Strategy strategy = Strategy::Linear;
  std::uint64_t seed = 0;
  std::optional<AttackSpec> attack;
  int falsify_cap = 50;
  std::size_t path_cap = 4096;
  int stall_limit = 3;
  bool grid = false;
  GridSpec grid_spec;
  std::string output_dir = "out";
};

// Relative source paths resolve against base_dir. Unknown keys, missing
// fields and missing files raise ConfigError.
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& file);
// Every field materialized; embed_source adds the program text.
Json config_json(const RunConfig& cfg, bool embed_source);

struct Setup {
  std::shared_ptr<const ControllerIR> ir;
  std::shared_ptr<const PathTable> table;
  RangeTable ranges;
  PlantPtr plant;
  stl::Formula safety;
};

Setup build(const RunConfig& cfg);
CegarProblem make_problem(const RunConfig& cfg, const Setup& s);
CegarOptions make_options(const RunConfig& cfg);

Json path_table_json(const PathTable& table);
Json range_table_json(const RangeTable& ranges);

std::string sha256_hex(const std::string& bytes);
std::string read_file(const std::filesystem::path& file);
void write_file(const std::filesystem::path& file, const std::string& bytes);

// Report document for a finished run. Witness CSV text per vulnerability is
// returned alongside so callers decide where files go.
struct ReportBundle {
  Json report;
  std::vector<std::string> witness_csv;
  std::vector<std::string> plots;
};
ReportBundle make_report(const RunConfig& cfg, const Setup& s, const Report& rep);

// Writes report.json, witnesses/<sha256>.csv, plots/<id>.svg and the
// report.meta.json sidecar (wall-clock data kept out of the report).
std::filesystem::path write_run(const RunConfig& cfg, const Setup& s, const Report& rep,
                                const std::filesystem::path& out, double wall_seconds);

struct ReplayOutcome {
  bool hash_ok = false;
  bool witness_ok = false;
  bool paths_ok = false;
  double robustness = 0.0;
  std::vector<int> realized;
  bool passed() const { return hash_ok && witness_ok && paths_ok && robustness < 0; }
};
// ConfigError when the report, the vulnerability id or the witness is
// missing or unreadable.
ReplayOutcome replay(const std::filesystem::path& report, const std::string& vuln_id);

// State polylines over per-step bands shaded by path id.
std::string svg_plot(const Trace& tr, const std::vector<std::string>& states, const PathTable& table,
                     const std::string& title);

struct BenchRow {
  std::string suite;
  std::string case_name;
  std::string method;  // cegar | baseline
  int n = 0;
  int horizon = 0;
  std::string strategy;
  std::uint64_t seed = 0;
  std::string budget;
  int cap = 0;
  int parts = 0;
  int falsifier_calls = 0;
  std::size_t vulns = 0;
  std::string status;
  double wall_seconds = 0.0;
};

std::string bench_csv_header();
std::string bench_csv_row(const BenchRow& r);
// Runs the sweeps named in a bench suite file; suite is all, n-sweep or h-sweep.
std::vector<BenchRow> run_bench(const std::filesystem::path& suite_file, const std::string& suite,
                                std::ostream* progress);

int main(int argc, char** argv);

}  // namespace rampo::app
