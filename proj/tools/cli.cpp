#include <chrono>
#include <iostream>

#include "CLI11.hpp"
#include "app.hpp"

namespace rampo::app {
namespace {

namespace fs = std::filesystem;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> strategy;
  std::optional<std::string> budget;
  std::optional<int> cap;
  bool grid = false;
  std::optional<std::string> out;
};

void add_config(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "run configuration (JSON)")->required();
}

void add_search(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--strategy", o.strategy, "refinement strategy: linear|binary");
  cmd->add_option("--budget", o.budget, "falsifier budget ITERSxRUNS");
  cmd->add_option("--cap-falsify", o.cap, "cap on falsifier calls");
  cmd->add_flag("--grid-mode", o.grid, "deterministic lattice falsifier");
}

RunConfig configured(const Overrides& o) {
  RunConfig cfg = load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.strategy) cfg.strategy = parse_strategy(*o.strategy);
  if (o.budget) {
    try {
      cfg.budget = parse_budget(*o.budget);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  if (o.cap) {
    if (*o.cap < 1) throw ConfigError("--cap-falsify must be at least 1");
    cfg.falsify_cap = *o.cap;
  }
  if (o.grid) cfg.grid = true;
  if (o.out) cfg.output_dir = *o.out;
  return cfg;
}

void emit_json(const Json& doc, const std::optional<std::string>& out, const std::string& file) {
  const std::string text = doc.dump(2) + "\n";
  if (out) {
    write_file(fs::path(*out) / file, text);
    std::cerr << "wrote " << (fs::path(*out) / file).string() << "\n";
  } else {
    std::cout << text;
  }
}

int cmd_extract(const Overrides& o, bool with_paths) {
  RunConfig cfg = configured(o);
  Setup s = build(cfg);
  Json doc;
  if (with_paths) doc["paths"] = path_table_json(*s.table);
  doc["ranges"] = range_table_json(s.ranges);
  emit_json(doc, o.out, with_paths ? "paths.json" : "ranges.json");
  return kExitOk;
}

int cmd_falsify(const Overrides& o) {
  RunConfig cfg = configured(o);
  Setup s = build(cfg);
  auto p = make_problem(cfg, s);
  auto cl = make_closed_loop(p.plant, p.controller, p.table, p.attack);
  FalsifyOptions fo = make_options(cfg).falsify;
  auto r = falsify(FalsifyModel{p.plant, cl, p.horizon, nullptr}, p.safety, SearchSpace{p.x0_box, {}, p.attack}, fo);
  Json x0 = Json::object();
  for (const auto& name : s.plant->state_names()) x0[name] = r.trace.at(name, 0);
  Json doc = {{"found", r.found},     {"robustness", r.robustness}, {"trajectory", r.trace.paths},
              {"x0", x0},             {"seed", cfg.seed},          {"budget", to_string(cfg.budget)},
              {"runs_used", r.runs_used}, {"simulations", r.simulations}};
  if (o.out) {
    const std::string csv = trace_to_csv(r.trace);
    const std::string name = "witnesses/" + sha256_hex(csv) + ".csv";
    write_file(fs::path(*o.out) / name, csv);
    doc["witness"] = name;
  }
  emit_json(doc, o.out, "falsify.json");
  return kExitOk;
}

int cmd_run(const Overrides& o) {
  RunConfig cfg = configured(o);
  auto t0 = std::chrono::steady_clock::now();
  Setup s = build(cfg);
  Report rep = run(make_problem(cfg, s), make_options(cfg));
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  auto report = write_run(cfg, s, rep, cfg.output_dir, wall);
  std::cout << "status " << rep.status << ", " << rep.vulns.size() << " vulnerabilities, "
            << rep.counters.falsifier_calls << " falsifier calls\n";
  for (std::size_t i = 0; i < rep.vulns.size(); ++i) {
    std::cout << "  v" << i + 1 << " " << rep.vulns[i].trajectory.to_string() << " robustness "
              << rep.vulns[i].robustness << "\n";
  }
  if (rep.status != "frontier-exhausted") std::cout << "warning: search ended with status " << rep.status << "\n";
  std::cout << "report " << report.string() << "\n";
  return kExitOk;
}

int cmd_replay(const std::string& report, const std::string& vuln) {
  auto r = replay(report, vuln);
  std::string realized;
  for (int p : r.realized) realized += (realized.empty() ? "" : ",") + std::to_string(p);
  std::cout << "robustness " << r.robustness << "\n"
            << "paths (" << realized << ") " << (r.paths_ok ? "match" : "MISMATCH") << "\n"
            << "witness " << (r.witness_ok ? "reproduced" : "NOT reproduced") << "\n"
            << "hash " << (r.hash_ok ? "ok" : "MISMATCH") << "\n"
            << (r.passed() ? "PASS" : "FAIL") << "\n";
  return r.passed() ? kExitOk : kExitProperty;
}

int cmd_bench(const std::string& suite_file, const std::string& suite, const std::optional<std::string>& out) {
  auto rows = run_bench(suite_file, suite, &std::cerr);
  std::string csv = bench_csv_header() + "\n";
  for (const auto& r : rows) csv += bench_csv_row(r) + "\n";
  if (out) {
    write_file(fs::path(*out) / "bench.csv", csv);
    std::cerr << "wrote " << (fs::path(*out) / "bench.csv").string() << "\n";
  } else {
    std::cout << csv;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CEGAR search for cyber-kinetic vulnerabilities of controller code"};
  app.require_subcommand(1);
  Overrides o;

  auto* extract = app.add_subcommand("extract", "path table and range table of the controller");
  add_config(extract, o);
  extract->add_option("--out", o.out, "output directory");
  auto* ranges = app.add_subcommand("ranges", "range table of the controller");
  add_config(ranges, o);
  ranges->add_option("--out", o.out, "output directory");
  auto* fals = app.add_subcommand("falsify", "plain closed-loop falsification");
  add_config(fals, o);
  add_search(fals, o);
  fals->add_option("--out", o.out, "output directory");
  auto* runc = app.add_subcommand("run", "full CEGAR search with report and artifacts");
  add_config(runc, o);
  add_search(runc, o);
  runc->add_option("--out", o.out, "output directory");

  std::string report, vuln;
  auto* rep = app.add_subcommand("replay", "re-simulate one reported vulnerability");
  rep->add_option("report", report, "report.json")->required();
  rep->add_option("vuln_id", vuln, "vulnerability id, e.g. v1")->required();

  std::string suite = "all";
  auto* bench = app.add_subcommand("bench", "run a bench suite and emit CSV counters");
  add_config(bench, o);
  bench->add_option("--suite", suite, "all|n-sweep|h-sweep");
  bench->add_option("--out", o.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*extract) return cmd_extract(o, true);
    if (*ranges) return cmd_extract(o, false);
    if (*fals) return cmd_falsify(o);
    if (*runc) return cmd_run(o);
    if (*rep) return cmd_replay(report, vuln);
    if (*bench) return cmd_bench(o.config, suite, o.out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace rampo::app
