#include "rampo/plant.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace rampo {
namespace {

double param(const PlantParams& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

void reject_unknown(const std::string& plant, const PlantParams& p, std::initializer_list<const char*> known) {
  for (const auto& [k, v] : p) {
    bool ok = false;
    for (const char* name : known) ok = ok || k == name;
    if (!ok) throw ConfigError("plant '" + plant + "' has no parameter '" + k + "'");
    if (!std::isfinite(v)) throw ConfigError("plant parameter '" + k + "' is not finite");
  }
}

class IntegratorChain final : public PlantModel {
 public:
  IntegratorChain(int n, double dt, bool full_output) : n_(n), dt_(dt), full_(full_output) {}

  std::string name() const override { return "integrator_chain"; }
  double dt() const override { return dt_; }
  std::vector<std::string> state_names() const override {
    std::vector<std::string> names;
    for (int i = 1; i <= n_; ++i) names.push_back("x" + std::to_string(i));
    return names;
  }
  int output_dim() const override { return full_ ? n_ : 1; }
  int control_dim() const override { return 1; }

  std::vector<double> step(std::span<const double> x, std::span<const double> u) const override {
    std::vector<double> next(x.begin(), x.end());
    for (int i = 0; i + 1 < n_; ++i) next[i] = x[i] + dt_ * x[i + 1];
    next[n_ - 1] = x[n_ - 1] + dt_ * u[0];
    return next;
  }
  std::vector<double> output(std::span<const double> x) const override {
    if (full_) return {x.begin(), x.end()};
    return {x[0]};
  }

 private:
  int n_;
  double dt_;
  bool full_;
};

class DoubleIntegrator final : public PlantModel {
 public:
  explicit DoubleIntegrator(double dt) : dt_(dt) {}

  std::string name() const override { return "double_integrator"; }
  double dt() const override { return dt_; }
  std::vector<std::string> state_names() const override { return {"pos", "vel"}; }
  int output_dim() const override { return 1; }
  int control_dim() const override { return 1; }

  std::vector<double> step(std::span<const double> x, std::span<const double> u) const override {
    return {x[0] + dt_ * x[1], x[1] + dt_ * u[0]};
  }
  std::vector<double> output(std::span<const double> x) const override { return {x[0]}; }

 private:
  double dt_;
};

// First-order lags: throttle drives RPM, RPM drives Speed.
class EngineSurrogate final : public PlantModel {
 public:
  EngineSurrogate(double dt, double a, double b, double c, double d) : dt_(dt), a_(a), b_(b), c_(c), d_(d) {}

  std::string name() const override { return "engine_surrogate"; }
  double dt() const override { return dt_; }
  std::vector<std::string> state_names() const override { return {"RPM", "Speed"}; }
  int output_dim() const override { return 2; }
  int control_dim() const override { return 1; }

  std::vector<double> step(std::span<const double> x, std::span<const double> u) const override {
    return {x[0] + dt_ * (a_ * u[0] - b_ * x[0]), x[1] + dt_ * (c_ * x[0] - d_ * x[1])};
  }
  std::vector<double> output(std::span<const double> x) const override { return {x[0], x[1]}; }

 private:
  double dt_, a_, b_, c_, d_;
};

void check_finite(std::span<const double> x, int t) {
  for (double v : x) {
    if (!std::isfinite(v)) throw NonFiniteState("state became non-finite at step " + std::to_string(t));
  }
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void record_step(Trace& tr, const std::vector<std::string>& states, std::span<const double> x,
                 std::span<const double> y) {
  for (std::size_t i = 0; i < states.size(); ++i) tr.channels[states[i]].push_back(x[i]);
  for (std::size_t i = 0; i < y.size(); ++i) tr.channels[output_channel(static_cast<int>(i) + 1)].push_back(y[i]);
}

void check_rows(const std::vector<std::vector<double>>& rows, std::size_t width, const char* what) {
  for (const auto& r : rows) {
    if (r.size() != width) throw ConfigError(std::string(what) + " row has the wrong width");
  }
}

}  // namespace

std::string output_channel(int i) { return "y" + std::to_string(i); }
std::string control_channel(int i) { return "u" + std::to_string(i); }
std::string attack_channel(int i) { return "s" + std::to_string(i); }

std::vector<std::string> builtin_plant_names() { return {"double_integrator", "engine_surrogate", "integrator_chain"}; }

PlantPtr builtin_plant(const std::string& name, const PlantParams& params) {
  const double dt = param(params, "dt", 0.1);
  if (!(dt > 0)) throw ConfigError("plant dt must be positive");
  if (name == "integrator_chain") {
    reject_unknown(name, params, {"n", "dt", "full_output"});
    double n = param(params, "n", 1);
    if (n < 1 || n != std::floor(n) || n > 64) throw ConfigError("integrator_chain n must be an integer in 1..64");
    return std::make_shared<IntegratorChain>(static_cast<int>(n), dt, param(params, "full_output", 0) != 0);
  }
  if (name == "double_integrator") {
    reject_unknown(name, params, {"dt"});
    return std::make_shared<DoubleIntegrator>(dt);
  }
  if (name == "engine_surrogate") {
    reject_unknown(name, params, {"dt", "a", "b", "c", "d"});
    return std::make_shared<EngineSurrogate>(dt, param(params, "a", 15.0), param(params, "b", 0.5),
                                             param(params, "c", 0.012), param(params, "d", 0.5));
  }
  throw UnknownPlant("unknown plant '" + name + "'");
}

double AttackSpec::limit(std::size_t i, double y) const {
  if (i >= channels.size() || !channels[i].enabled) return 0.0;
  const auto& c = channels[i];
  return c.relative ? c.bound * std::fabs(y) : c.bound;
}

bool AttackSpec::any_enabled() const {
  for (const auto& c : channels) {
    if (c.enabled) return true;
  }
  return false;
}

Trace simulate_open(const PlantModel& plant, std::span<const double> x0, int horizon,
                    const std::vector<std::vector<double>>& u_seq, const std::vector<std::vector<double>>& s_seq) {
  const auto states = plant.state_names();
  const std::size_t o = static_cast<std::size_t>(plant.output_dim());
  const std::size_t m = static_cast<std::size_t>(plant.control_dim());
  if (x0.size() != states.size()) throw ConfigError("x0 has the wrong dimension");
  if (horizon < 1) throw ConfigError("horizon must be at least 1");
  const auto H = static_cast<std::size_t>(horizon);
  if (u_seq.size() != H && u_seq.size() != H + 1) throw ConfigError("control sequence must have H or H+1 rows");
  check_rows(u_seq, m, "control");
  if (!s_seq.empty()) {
    if (s_seq.size() != H + 1) throw ConfigError("attack sequence must have H+1 rows");
    check_rows(s_seq, o, "attack");
  }

  Trace tr;
  tr.dt = plant.dt();
  tr.horizon = horizon;
  std::vector<double> x(x0.begin(), x0.end());
  check_finite(x, 0);
  for (std::size_t t = 0; t <= H; ++t) {
    record_step(tr, states, x, plant.output(x));
    const auto& u = t < u_seq.size() ? u_seq[t] : u_seq.back();
    for (std::size_t j = 0; j < m; ++j) tr.channels[control_channel(static_cast<int>(j) + 1)].push_back(u[j]);
    for (std::size_t i = 0; i < o && !s_seq.empty(); ++i) {
      tr.channels[attack_channel(static_cast<int>(i) + 1)].push_back(s_seq[t][i]);
    }
    if (t < H) {
      x = plant.step(x, u);
      check_finite(x, static_cast<int>(t) + 1);
    }
  }
  return tr;
}

ClosedLoop make_closed_loop(PlantPtr plant, std::shared_ptr<const ControllerIR> controller,
                            std::shared_ptr<const PathTable> table, std::optional<AttackSpec> attack) {
  if (!plant || !controller || !table) throw ConfigError("closed loop needs a plant, controller and path table");
  if (static_cast<int>(controller->params.size()) != plant->output_dim()) {
    throw ConfigError("controller takes " + std::to_string(controller->params.size()) + " inputs but the plant has " +
                      std::to_string(plant->output_dim()) + " outputs");
  }
  if (static_cast<int>(table->control_vars().size()) != plant->control_dim()) {
    throw ConfigError("controller produces " + std::to_string(table->control_vars().size()) +
                      " controls but the plant takes " + std::to_string(plant->control_dim()));
  }
  if (attack && attack->channels.size() != static_cast<std::size_t>(plant->output_dim())) {
    throw ConfigError("attack spec must list one entry per plant output");
  }
  for (const auto& c : attack ? attack->channels : std::vector<AttackChannel>{}) {
    if (!(c.bound >= 0) || !std::isfinite(c.bound)) throw ConfigError("attack bounds must be finite and non-negative");
  }
  return ClosedLoop{std::move(plant), std::move(controller), std::move(table), std::move(attack)};
}

int realized_path(const ControllerIR& ir, const PathTable& table, std::span<const double> y) {
  auto exec = execute(ir, y);
  if (auto id = table.find_by_decisions(exec.decisions)) return *id;
  std::vector<double> clamped(y.begin(), y.end());
  table.clamp_to_box(clamped);
  return table.path_of(clamped);
}

namespace {

// attack(t, i, y) returns s_t,i for the clean reading y; null means no attack.
template <class AttackFn>
Trace run_closed(const ClosedLoop& cl, std::span<const double> x0, int horizon, const AttackFn* attack) {
  const auto& plant = *cl.plant;
  const auto states = plant.state_names();
  const std::size_t o = static_cast<std::size_t>(plant.output_dim());
  const std::size_t m = static_cast<std::size_t>(plant.control_dim());
  if (x0.size() != states.size()) throw ConfigError("x0 has the wrong dimension");
  if (horizon < 1) throw ConfigError("horizon must be at least 1");
  const auto H = static_cast<std::size_t>(horizon);

  Trace tr;
  tr.dt = plant.dt();
  tr.horizon = horizon;
  std::vector<double> x(x0.begin(), x0.end());
  check_finite(x, 0);
  std::vector<double> reading(o);
  for (std::size_t t = 0; t <= H; ++t) {
    const auto y = plant.output(x);
    record_step(tr, states, x, y);
    for (std::size_t i = 0; i < o; ++i) {
      double s = 0.0;
      if (attack) {
        s = (*attack)(t, i, y[i]);
        double lim = cl.attack ? cl.attack->limit(i, y[i]) : 0.0;
        if (!(std::fabs(s) <= lim)) {
          throw AttackBoundViolated("|s" + std::to_string(i + 1) + "| = " + fmt17(std::fabs(s)) + " exceeds " +
                                    fmt17(lim) + " at step " + std::to_string(t));
        }
        tr.channels[attack_channel(static_cast<int>(i) + 1)].push_back(s);
      }
      reading[i] = y[i] + s;
    }
    const auto u = interpret(*cl.controller, reading, cl.table->control_vars());
    for (std::size_t j = 0; j < m; ++j) tr.channels[control_channel(static_cast<int>(j) + 1)].push_back(u[j]);
    tr.paths.push_back(realized_path(*cl.controller, *cl.table, reading));
    if (t < H) {
      x = plant.step(x, u);
      check_finite(x, static_cast<int>(t) + 1);
    }
  }
  return tr;
}

}  // namespace

Trace simulate_closed(const ClosedLoop& cl, std::span<const double> x0, int horizon,
                      const std::vector<std::vector<double>>& s_seq) {
  if (s_seq.empty()) return run_closed<int (*)(std::size_t, std::size_t, double)>(cl, x0, horizon, nullptr);
  const auto o = static_cast<std::size_t>(cl.plant->output_dim());
  if (s_seq.size() != static_cast<std::size_t>(horizon) + 1) throw ConfigError("attack sequence must have H+1 rows");
  check_rows(s_seq, o, "attack");
  auto fn = [&](std::size_t t, std::size_t i, double) { return s_seq[t][i]; };
  return run_closed(cl, x0, horizon, &fn);
}

Trace simulate_closed_scaled(const ClosedLoop& cl, std::span<const double> x0, int horizon,
                             const std::vector<std::vector<double>>& r_seq) {
  const auto o = static_cast<std::size_t>(cl.plant->output_dim());
  if (r_seq.size() != static_cast<std::size_t>(horizon) + 1) throw ConfigError("attack sequence must have H+1 rows");
  check_rows(r_seq, o, "attack");
  auto fn = [&](std::size_t t, std::size_t i, double y) {
    double r = std::clamp(r_seq[t][i], -1.0, 1.0);
    return cl.attack ? r * cl.attack->limit(i, y) : 0.0;
  };
  return run_closed(cl, x0, horizon, &fn);
}

std::string trace_to_csv(const Trace& tr) {
  std::ostringstream out;
  out << "t";
  for (const auto& [name, values] : tr.channels) out << ',' << name;
  if (!tr.paths.empty()) out << ",path";
  out << '\n';
  for (std::size_t t = 0; t < tr.length(); ++t) {
    out << t;
    for (const auto& [name, values] : tr.channels) out << ',' << fmt17(values.at(t));
    if (!tr.paths.empty()) out << ',' << tr.paths.at(t);
    out << '\n';
  }
  return out.str();
}

Trace trace_from_csv(const std::string& text, double dt) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty trace CSV");
  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
  }
  if (header.empty() || header[0] != "t") throw ConfigError("trace CSV must start with a 't' column");
  Trace tr;
  tr.dt = dt;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ls, cell, ',')) {
      if (col >= header.size()) throw ConfigError("trace CSV row has too many cells");
      if (col == 0) {
        if (std::stoi(cell) != rows) throw ConfigError("trace CSV steps must be 0,1,2,...");
      } else if (header[col] == "path") {
        tr.paths.push_back(std::stoi(cell));
      } else {
        tr.channels[header[col]].push_back(std::stod(cell));
      }
      ++col;
    }
    if (col != header.size()) throw ConfigError("trace CSV row has too few cells");
    ++rows;
  }
  if (rows < 1) throw ConfigError("trace CSV has no rows");
  tr.horizon = rows - 1;
  return tr;
}

std::string trace_to_json(const Trace& tr) {
  nlohmann::ordered_json j;
  j["dt"] = tr.dt;
  j["horizon"] = tr.horizon;
  auto& ch = j["channels"];
  ch = nlohmann::ordered_json::object();
  for (const auto& [name, values] : tr.channels) ch[name] = values;
  if (!tr.paths.empty()) j["paths"] = tr.paths;
  return j.dump(2);
}

}  // namespace rampo
