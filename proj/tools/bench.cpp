#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "app.hpp"

namespace rampo::app {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

BenchRow cegar_row(const std::string& suite, const RunConfig& cfg, int n) {
  auto t0 = std::chrono::steady_clock::now();
  Setup s = build(cfg);
  Report rep = run(make_problem(cfg, s), make_options(cfg));
  BenchRow r;
  r.suite = suite;
  r.case_name = cfg.name;
  r.method = "cegar";
  r.n = n;
  r.horizon = cfg.horizon;
  r.strategy = to_string(cfg.strategy);
  r.seed = cfg.seed;
  r.budget = to_string(cfg.budget);
  r.cap = cfg.falsify_cap;
  r.falsifier_calls = rep.counters.falsifier_calls;
  r.vulns = rep.vulns.size();
  r.status = rep.status;
  r.wall_seconds = seconds_since(t0);
  return r;
}

std::vector<std::uint64_t> seeds_of(const json& sweep, const RunConfig& base) {
  if (!sweep.contains("seeds")) return {base.seed};
  return sweep["seeds"].get<std::vector<std::uint64_t>>();
}

}  // namespace

std::string bench_csv_header() {
  return "suite,case,method,n,horizon,strategy,seed,budget,cap,parts,falsifier_calls,vulns,status,wall_seconds";
}

std::string bench_csv_row(const BenchRow& r) {
  char wall[32];
  std::snprintf(wall, sizeof wall, "%.3f", r.wall_seconds);
  return r.suite + "," + r.case_name + "," + r.method + "," + std::to_string(r.n) + "," + std::to_string(r.horizon) +
         "," + r.strategy + "," + std::to_string(r.seed) + "," + r.budget + "," + std::to_string(r.cap) + "," +
         std::to_string(r.parts) + "," + std::to_string(r.falsifier_calls) + "," + std::to_string(r.vulns) + "," +
         r.status + "," + wall;
}

std::vector<BenchRow> run_bench(const fs::path& suite_file, const std::string& suite, std::ostream* progress) {
  if (suite != "all" && suite != "n-sweep" && suite != "h-sweep") {
    throw ConfigError("suite must be all, n-sweep or h-sweep");
  }
  json doc;
  try {
    doc = json::parse(read_file(suite_file));
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + suite_file.string() + "' is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("bench suite must be an object");
  for (const auto& [k, v] : doc.items()) {
    if (k != "n_sweep" && k != "h_sweep") throw ConfigError("unknown key '" + k + "' in bench suite");
  }
  const fs::path dir = suite_file.parent_path();
  std::vector<BenchRow> rows;
  auto emit = [&](BenchRow r) {
    if (progress) *progress << bench_csv_row(r) << std::endl;
    rows.push_back(std::move(r));
  };

  if ((suite == "all" || suite == "n-sweep") && doc.contains("n_sweep")) {
    const json& sw = doc["n_sweep"];
    RunConfig base = load_config(dir / sw.at("config").get<std::string>());
    if (base.plant.name != "integrator_chain") throw ConfigError("n_sweep needs an integrator_chain config");
    const auto rest = sw.at("x0_rest").get<std::vector<double>>();
    if (rest.size() != 2) throw ConfigError("x0_rest must be [lo, hi]");
    const auto parts = sw.value("baseline_parts", std::vector<int>{});
    const int max_n = sw.value("baseline_max_n", 0);
    for (std::uint64_t seed : seeds_of(sw, base)) {
      for (int n : sw.at("n").get<std::vector<int>>()) {
        RunConfig cfg = base;
        cfg.seed = seed;
        cfg.plant.params["n"] = n;
        cfg.x0.resize(1);
        for (int i = 2; i <= n; ++i) cfg.x0.emplace_back("x" + std::to_string(i), Interval{rest[0], rest[1]});
        emit(cegar_row("n-sweep", cfg, n));
        if (n > max_n) continue;
        Setup s = build(cfg);
        for (int p : parts) {
          auto t0 = std::chrono::steady_clock::now();
          FalsifyOptions fo = make_options(cfg).falsify;
          auto b = partition_baseline(make_problem(cfg, s), p, fo);
          BenchRow r;
          r.suite = "n-sweep";
          r.case_name = cfg.name;
          r.method = "baseline";
          r.n = n;
          r.horizon = cfg.horizon;
          r.seed = seed;
          r.budget = to_string(cfg.budget);
          r.parts = p;
          r.falsifier_calls = b.falsifier_calls;
          r.vulns = b.vulns.size();
          r.status = "complete";
          r.wall_seconds = seconds_since(t0);
          emit(r);
        }
      }
    }
  }

  if ((suite == "all" || suite == "h-sweep") && doc.contains("h_sweep")) {
    const json& sw = doc["h_sweep"];
    RunConfig base = load_config(dir / sw.at("config").get<std::string>());
    const json& specs = sw.at("specs");
    const auto strategies = sw.value("strategies", std::vector<std::string>{"linear", "binary"});
    for (std::uint64_t seed : seeds_of(sw, base)) {
      for (int h : sw.at("horizons").get<std::vector<int>>()) {
        for (const auto& st : strategies) {
          RunConfig cfg = base;
          cfg.seed = seed;
          cfg.horizon = h;
          cfg.strategy = parse_strategy(st);
          if (!specs.contains(std::to_string(h))) throw ConfigError("h_sweep.specs has no entry for H=" + std::to_string(h));
          cfg.spec = specs[std::to_string(h)].get<std::string>();
          emit(cegar_row("h-sweep", cfg, 0));
        }
      }
    }
  }
  return rows;
}

}  // namespace rampo::app
