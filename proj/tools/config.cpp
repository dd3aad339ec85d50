#include <fstream>
#include <set>
#include <sstream>

#include "app.hpp"

namespace rampo::app {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : obj.items()) {
    if (!ok.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

const json& need(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(where + " is missing '" + key + "'");
  return *it;
}

template <class T>
T get(const json& v, const std::string& what) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(what + " has the wrong type");
  }
}

// Exact decimal from a JSON string or number.
Rational decimal(const json& v, const std::string& what) {
  try {
    if (v.is_string()) return parse_decimal(v.get<std::string>());
    if (v.is_number()) return parse_decimal(v.dump());
  } catch (const Error&) {
  }
  throw ConfigError(what + " must be a decimal number");
}

Interval interval(const json& v, const std::string& what) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ConfigError(what + " must be [lo, hi]");
  }
  Interval iv{v[0].get<double>(), v[1].get<double>()};
  if (!(iv.lo <= iv.hi)) throw ConfigError(what + " has lo > hi");
  return iv;
}

json decimal_json(const Rational& q) { return to_decimal_string(q); }

}  // namespace

std::string read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + file.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& file, const std::string& bytes) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + file.string() + "'");
  out << bytes;
}

RunConfig parse_config(const json& doc, const fs::path& base_dir) {
  check_keys(doc, "config", {"name", "controller", "plant", "spec", "horizon", "x0", "budget", "strategy", "seed",
                             "attack", "caps", "grid", "output_dir"});
  RunConfig cfg;
  cfg.name = doc.contains("name") ? get<std::string>(doc["name"], "name") : "run";

  const json& c = need(doc, "controller", "config");
  check_keys(c, "controller", {"source", "source_text", "entry", "inputs", "controls", "box"});
  cfg.controller.source = c.contains("source") ? get<std::string>(c["source"], "controller.source") : "";
  if (c.contains("source_text")) {
    cfg.controller.text = get<std::string>(c["source_text"], "controller.source_text");
  } else {
    if (cfg.controller.source.empty()) throw ConfigError("controller needs 'source' or 'source_text'");
    fs::path p = cfg.controller.source;
    if (p.is_relative()) p = base_dir / p;
    if (!fs::exists(p)) throw ConfigError("controller source '" + p.string() + "' does not exist");
    cfg.controller.text = read_file(p);
  }
  if (c.contains("entry")) cfg.controller.entry = get<std::string>(c["entry"], "controller.entry");
  cfg.controller.inputs = get<std::vector<std::string>>(need(c, "inputs", "controller"), "controller.inputs");
  if (c.contains("controls")) {
    cfg.controller.controls = get<std::vector<std::string>>(c["controls"], "controller.controls");
  }
  const json& box = need(c, "box", "controller");
  if (!box.is_object()) throw ConfigError("controller.box must be an object");
  for (const auto& name : cfg.controller.inputs) {
    auto it = box.find(name);
    if (it == box.end()) throw ConfigError("controller.box has no bounds for input '" + name + "'");
    if (!it->is_array() || it->size() != 2) throw ConfigError("controller.box." + name + " must be [lo, hi]");
    VarBound b{name, decimal((*it)[0], "controller.box." + name), decimal((*it)[1], "controller.box." + name)};
    if (b.lo > b.hi) throw ConfigError("controller.box." + name + " has lo > hi");
    cfg.controller.box.push_back(std::move(b));
  }
  if (box.size() != cfg.controller.inputs.size()) throw ConfigError("controller.box names a non-input variable");

  const json& p = need(doc, "plant", "config");
  check_keys(p, "plant", {"name", "params"});
  cfg.plant.name = get<std::string>(need(p, "name", "plant"), "plant.name");
  if (p.contains("params")) {
    if (!p["params"].is_object()) throw ConfigError("plant.params must be an object");
    for (const auto& [k, v] : p["params"].items()) cfg.plant.params[k] = get<double>(v, "plant.params." + k);
  }
  PlantPtr plant;
  try {
    plant = builtin_plant(cfg.plant.name, cfg.plant.params);
  } catch (const UnknownPlant& e) {
    throw ConfigError(e.what());
  }

  cfg.spec = get<std::string>(need(doc, "spec", "config"), "spec");
  cfg.horizon = get<int>(need(doc, "horizon", "config"), "horizon");
  if (cfg.horizon < 1) throw ConfigError("horizon must be at least 1");

  const json& x0 = need(doc, "x0", "config");
  if (!x0.is_object()) throw ConfigError("x0 must be an object keyed by state name");
  for (const auto& s : plant->state_names()) {
    auto it = x0.find(s);
    if (it == x0.end()) throw ConfigError("x0 has no interval for state '" + s + "'");
    cfg.x0.emplace_back(s, interval(*it, "x0." + s));
  }
  if (x0.size() != cfg.x0.size()) throw ConfigError("x0 names a variable that is not a plant state");

  if (doc.contains("budget")) {
    try {
      cfg.budget = parse_budget(get<std::string>(doc["budget"], "budget"));
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  if (doc.contains("strategy")) cfg.strategy = parse_strategy(get<std::string>(doc["strategy"], "strategy"));
  if (doc.contains("seed")) cfg.seed = get<std::uint64_t>(doc["seed"], "seed");

  if (doc.contains("attack") && !doc["attack"].is_null()) {
    const json& a = doc["attack"];
    check_keys(a, "attack", {"channels"});
    AttackSpec spec;
    spec.channels.resize(static_cast<std::size_t>(plant->output_dim()));
    const json& ch = need(a, "channels", "attack");
    if (!ch.is_object()) throw ConfigError("attack.channels must be an object");
    for (const auto& [k, v] : ch.items()) {
      int idx = -1;
      for (int i = 1; i <= plant->output_dim(); ++i) {
        if (output_channel(i) == k) idx = i - 1;
      }
      if (idx < 0) throw ConfigError("attack channel '" + k + "' is not a plant output");
      check_keys(v, "attack.channels." + k, {"bound", "relative"});
      AttackChannel& c = spec.channels[static_cast<std::size_t>(idx)];
      c.enabled = true;
      c.bound = get<double>(need(v, "bound", "attack.channels." + k), "attack bound");
      c.relative = v.contains("relative") ? get<bool>(v["relative"], "attack relative") : false;
      if (!(c.bound >= 0)) throw ConfigError("attack bound must be non-negative");
    }
    cfg.attack = spec;
  }

  if (doc.contains("caps")) {
    const json& caps = doc["caps"];
    check_keys(caps, "caps", {"falsify", "paths", "stall"});
    if (caps.contains("falsify")) cfg.falsify_cap = get<int>(caps["falsify"], "caps.falsify");
    if (caps.contains("paths")) cfg.path_cap = get<std::size_t>(caps["paths"], "caps.paths");
    if (caps.contains("stall")) cfg.stall_limit = get<int>(caps["stall"], "caps.stall");
  }
  if (cfg.falsify_cap < 1) throw ConfigError("caps.falsify must be at least 1");

  if (doc.contains("grid")) {
    const json& g = doc["grid"];
    check_keys(g, "grid", {"enabled", "x0_points", "u_points", "s_points", "max_points"});
    if (g.contains("enabled")) cfg.grid = get<bool>(g["enabled"], "grid.enabled");
    if (g.contains("x0_points")) cfg.grid_spec.x0_points = get<int>(g["x0_points"], "grid.x0_points");
    if (g.contains("u_points")) cfg.grid_spec.u_points = get<int>(g["u_points"], "grid.u_points");
    if (g.contains("s_points")) cfg.grid_spec.s_points = get<int>(g["s_points"], "grid.s_points");
    if (g.contains("max_points")) cfg.grid_spec.max_points = get<std::uint64_t>(g["max_points"], "grid.max_points");
  }
  if (doc.contains("output_dir")) cfg.output_dir = get<std::string>(doc["output_dir"], "output_dir");
  return cfg;
}

RunConfig load_config(const fs::path& file) {
  json doc;
  try {
    doc = json::parse(read_file(file));
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + file.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc, file.parent_path());
}

Json config_json(const RunConfig& cfg, bool embed_source) {
  Json c;
  c["source"] = cfg.controller.source;
  if (embed_source) c["source_text"] = cfg.controller.text;
  c["entry"] = cfg.controller.entry;
  c["inputs"] = cfg.controller.inputs;
  c["controls"] = cfg.controller.controls;
  Json box = Json::object();
  for (const auto& b : cfg.controller.box) box[b.name] = {decimal_json(b.lo), decimal_json(b.hi)};
  c["box"] = box;

  Json params = Json::object();
  for (const auto& [k, v] : cfg.plant.params) params[k] = v;

  Json x0 = Json::object();
  for (const auto& [name, iv] : cfg.x0) x0[name] = {iv.lo, iv.hi};

  Json attack = nullptr;
  if (cfg.attack) {
    Json ch = Json::object();
    for (std::size_t i = 0; i < cfg.attack->channels.size(); ++i) {
      const auto& a = cfg.attack->channels[i];
      if (a.enabled) ch[output_channel(static_cast<int>(i) + 1)] = {{"bound", a.bound}, {"relative", a.relative}};
    }
    attack = {{"channels", ch}};
  }

  Json doc;
  doc["name"] = cfg.name;
  doc["controller"] = c;
  doc["plant"] = {{"name", cfg.plant.name}, {"params", params}};
  doc["spec"] = cfg.spec;
  doc["horizon"] = cfg.horizon;
  doc["x0"] = x0;
  doc["budget"] = to_string(cfg.budget);
  doc["strategy"] = to_string(cfg.strategy);
  doc["seed"] = cfg.seed;
  doc["attack"] = attack;
  doc["caps"] = {{"falsify", cfg.falsify_cap}, {"paths", cfg.path_cap}, {"stall", cfg.stall_limit}};
  doc["grid"] = {{"enabled", cfg.grid},
                 {"x0_points", cfg.grid_spec.x0_points},
                 {"u_points", cfg.grid_spec.u_points},
                 {"s_points", cfg.grid_spec.s_points},
                 {"max_points", cfg.grid_spec.max_points}};
  doc["output_dir"] = cfg.output_dir;
  return doc;
}

Setup build(const RunConfig& cfg) {
  Setup s;
  auto ir = parse_controller({cfg.controller.text, cfg.controller.entry});
  if (ir.params != cfg.controller.inputs) {
    std::string have;
    for (const auto& p : ir.params) have += (have.empty() ? "" : ", ") + p;
    throw ConfigError("controller.inputs must list the parameters in order (" + have + ")");
  }
  s.ir = std::make_shared<const ControllerIR>(std::move(ir));
  ExtractOptions eo;
  eo.path_cap = cfg.path_cap;
  eo.control_vars = cfg.controller.controls;
  s.table = std::make_shared<const PathTable>(extract_paths(*s.ir, cfg.controller.box, eo));
  s.ranges = path_ranges(*s.table);
  s.plant = builtin_plant(cfg.plant.name, cfg.plant.params);
  s.safety = stl::parse(cfg.spec);
  return s;
}

CegarProblem make_problem(const RunConfig& cfg, const Setup& s) {
  CegarProblem p;
  p.plant = s.plant;
  p.controller = s.ir;
  p.table = s.table;
  p.ranges = s.ranges;
  p.safety = s.safety;
  p.horizon = cfg.horizon;
  for (const auto& [name, iv] : cfg.x0) p.x0_box.push_back(iv);
  p.attack = cfg.attack;
  return p;
}

CegarOptions make_options(const RunConfig& cfg) {
  CegarOptions o;
  o.strategy = cfg.strategy;
  o.falsify.budget = cfg.budget;
  o.falsify.seed = cfg.seed;
  o.falsify.grid = cfg.grid;
  o.falsify.grid_spec = cfg.grid_spec;
  o.falsify_cap = cfg.falsify_cap;
  o.stall_limit = cfg.stall_limit;
  return o;
}

}  // namespace rampo::app
