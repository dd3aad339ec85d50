#include "rampo/falsifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <regex>

namespace rampo {
namespace {

constexpr double kT0 = 1.0;
constexpr double kCooling = 0.97;
constexpr double kStepFraction = 0.1;
constexpr double kInf = std::numeric_limits<double>::infinity();

bool attacked(const SearchSpace& space) { return space.attack && space.attack->any_enabled(); }

std::vector<std::vector<double>> rows(const std::vector<double>& z, std::size_t offset, std::size_t count,
                                      std::size_t width) {
  std::vector<std::vector<double>> out(count, std::vector<double>(width));
  for (std::size_t t = 0; t < count; ++t) {
    for (std::size_t j = 0; j < width; ++j) out[t][j] = z[offset + t * width + j];
  }
  return out;
}

void check_space(const FalsifyModel& model, const SearchSpace& space) {
  if (!model.plant) throw ConfigError("falsifier model has no plant");
  if (model.horizon < 1) throw ConfigError("horizon must be at least 1");
  if (space.x0_box.size() != static_cast<std::size_t>(model.plant->state_dim())) {
    throw ConfigError("x0 box has " + std::to_string(space.x0_box.size()) + " entries, plant has " +
                      std::to_string(model.plant->state_dim()) + " states");
  }
  for (const auto& iv : space.x0_box) {
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.hi < iv.lo) throw ConfigError("x0 box must be finite");
  }
  if (model.closed) {
    if (!space.free_u.empty()) throw ConfigError("closed-loop search takes no free controls");
  } else {
    const auto m = static_cast<std::size_t>(model.plant->control_dim());
    if (space.free_u.size() != static_cast<std::size_t>(model.horizon) + 1) {
      throw ConfigError("open-loop search needs control bounds for steps 0..H");
    }
    for (const auto& step : space.free_u) {
      if (step.size() != m) throw ConfigError("control bounds have the wrong width");
      for (const auto& iv : step) {
        if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.hi < iv.lo) {
          throw ConfigError("control bounds must be finite and non-empty");
        }
      }
    }
  }
  if (space.attack && space.attack->channels.size() != static_cast<std::size_t>(model.plant->output_dim())) {
    throw ConfigError("attack spec must list one entry per plant output");
  }
}

struct Evaluation {
  double robustness = kInf;
  double objective = kInf;
  bool violation = false;
  Trace trace;
};

class Objective {
 public:
  Objective(const FalsifyModel& model, const stl::Formula& phi, const SearchSpace& space)
      : model_(model), phi_(phi), space_(space) {}

  Evaluation operator()(const std::vector<double>& z) {
    ++simulations;
    Evaluation e;
    try {
      e.trace = realize(model_, space_, z);
    } catch (const NonFiniteState&) {
      return e;
    }
    e.robustness = stl::robustness(phi_, e.trace);
    if (std::isnan(e.robustness)) e.robustness = kInf;
    const double pen = model_.penalty ? model_.penalty(e.trace) : 0.0;
    e.objective = e.robustness + pen;
    e.violation = e.robustness < 0 && pen == 0.0;
    return e;
  }

  std::uint64_t simulations = 0;

 private:
  const FalsifyModel& model_;
  const stl::Formula& phi_;
  const SearchSpace& space_;
};

void take(FalsifyResult& res, Evaluation& e, const std::vector<double>& z) {
  res.objective = e.objective;
  res.robustness = e.robustness;
  res.trace = std::move(e.trace);
  res.decision = z;
}

void keep_best(FalsifyResult& res, Evaluation& e, const std::vector<double>& z, bool& have) {
  if (!have || e.objective < res.objective) {
    have = true;
    take(res, e, z);
  }
}

FalsifyResult anneal(const FalsifyModel& model, const stl::Formula& phi, const SearchSpace& space,
                     const FalsifyOptions& opt) {
  const auto box = decision_box(model, space);
  std::vector<std::size_t> movable;
  for (std::size_t i = 0; i < box.size(); ++i) {
    if (box[i].width() > 0) movable.push_back(i);
  }
  Objective eval(model, phi, space);
  FalsifyResult res;
  res.seed = opt.seed;
  bool have = false;

  for (int run = 0; run < opt.budget.n_runs; ++run) {
    ++res.runs_used;
    std::seed_seq seq{static_cast<std::uint32_t>(opt.seed), static_cast<std::uint32_t>(opt.seed >> 32),
                      static_cast<std::uint32_t>(run)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<double> z(box.size());
    for (std::size_t i = 0; i < box.size(); ++i) z[i] = box[i].lo + box[i].width() * unit(rng);
    auto cur = eval(z);
    if (cur.violation) {
      res.found = true;
      take(res, cur, z);
      break;
    }
    double f = cur.objective;
    keep_best(res, cur, z, have);
    if (movable.empty()) continue;

    double temp = kT0;
    // iters_per_run evaluations per run, the initial sample included.
    for (int k = 1; k < opt.budget.iters_per_run; ++k) {
      temp *= kCooling;
      std::size_t i = movable[std::uniform_int_distribution<std::size_t>(0, movable.size() - 1)(rng)];
      std::normal_distribution<double> step(0.0, kStepFraction * box[i].width());
      auto cand = z;
      cand[i] = std::clamp(z[i] + step(rng), box[i].lo, box[i].hi);
      auto e = eval(cand);
      if (e.violation) {
        res.found = true;
        take(res, e, cand);
        break;
      }
      double u = unit(rng);
      bool accept = e.objective <= f || (std::isfinite(e.objective) && u < std::exp(-(e.objective - f) / temp));
      double fe = e.objective;
      keep_best(res, e, cand, have);
      if (accept) {
        z = std::move(cand);
        f = fe;
      }
    }
    if (res.found) break;
  }
  res.simulations = eval.simulations;
  return res;
}

std::vector<double> lattice(const Interval& iv, int points) {
  if (iv.width() == 0 || points <= 1) return {iv.width() == 0 ? iv.lo : iv.lo + iv.width() / 2};
  std::vector<double> v(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) v[i] = i + 1 == points ? iv.hi : iv.lo + iv.width() * i / (points - 1);
  return v;
}

FalsifyResult grid(const FalsifyModel& model, const stl::Formula& phi, const SearchSpace& space,
                   const FalsifyOptions& opt) {
  const auto box = decision_box(model, space);
  const std::size_t n = static_cast<std::size_t>(model.plant->state_dim());
  const std::size_t nu = model.closed ? 0 : (model.horizon + 1) * static_cast<std::size_t>(model.plant->control_dim());
  std::vector<std::vector<double>> axes;
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < box.size(); ++i) {
    int pts = i < n ? opt.grid_spec.x0_points : i < n + nu ? opt.grid_spec.u_points : opt.grid_spec.s_points;
    axes.push_back(lattice(box[i], pts));
    total *= axes.back().size();
    if (total > opt.grid_spec.max_points) {
      throw ConfigError("grid has more than " + std::to_string(opt.grid_spec.max_points) + " points");
    }
  }
  Objective eval(model, phi, space);
  FalsifyResult res;
  res.seed = opt.seed;
  res.runs_used = 1;
  bool have = false;
  std::vector<std::size_t> idx(box.size(), 0);
  std::vector<double> z(box.size());
  for (std::uint64_t count = 0; count < total; ++count) {
    for (std::size_t i = 0; i < box.size(); ++i) z[i] = axes[i][idx[i]];
    auto e = eval(z);
    if (e.violation) {
      res.found = true;
      take(res, e, z);
      break;
    }
    keep_best(res, e, z, have);
    // Odometer, last coordinate fastest.
    for (std::size_t i = box.size(); i-- > 0;) {
      if (++idx[i] < axes[i].size()) break;
      idx[i] = 0;
    }
  }
  res.simulations = eval.simulations;
  return res;
}

}  // namespace

Budget parse_budget(const std::string& text) {
  static const std::regex re(R"(\s*(\d+)\s*[xX*]\s*(\d+)\s*)");
  std::smatch m;
  if (!std::regex_match(text, m, re)) throw ConfigError("budget must look like ITERSxRUNS, got '" + text + "'");
  Budget b;
  try {
    b.iters_per_run = std::stoi(m[1]);
    b.n_runs = std::stoi(m[2]);
  } catch (const std::out_of_range&) {
    throw ConfigError("budget values out of range: '" + text + "'");
  }
  if (b.iters_per_run < 1 || b.n_runs < 1) throw ConfigError("budget values must be at least 1");
  return b;
}

std::string to_string(const Budget& b) { return std::to_string(b.iters_per_run) + "x" + std::to_string(b.n_runs); }

std::vector<Interval> decision_box(const FalsifyModel& model, const SearchSpace& space) {
  check_space(model, space);
  std::vector<Interval> box(space.x0_box);
  if (!model.closed) {
    for (const auto& step : space.free_u) box.insert(box.end(), step.begin(), step.end());
  }
  if (attacked(space)) {
    for (int t = 0; t <= model.horizon; ++t) {
      for (const auto& c : space.attack->channels) box.push_back(c.enabled ? Interval{-1.0, 1.0} : Interval{0.0, 0.0});
    }
  }
  return box;
}

Trace realize(const FalsifyModel& model, const SearchSpace& space, const std::vector<double>& z) {
  const auto& plant = *model.plant;
  const std::size_t n = static_cast<std::size_t>(plant.state_dim());
  const std::size_t m = static_cast<std::size_t>(plant.control_dim());
  const std::size_t o = static_cast<std::size_t>(plant.output_dim());
  const std::size_t steps = static_cast<std::size_t>(model.horizon) + 1;
  const std::size_t nu = model.closed ? 0 : steps * m;
  const bool att = attacked(space);
  if (z.size() != n + nu + (att ? steps * o : 0)) throw ConfigError("decision vector has the wrong length");
  std::span<const double> x0(z.data(), n);

  if (model.closed) {
    ClosedLoop cl = *model.closed;
    cl.attack = space.attack;
    if (!att) return simulate_closed(cl, x0, model.horizon);
    return simulate_closed_scaled(cl, x0, model.horizon, rows(z, n, steps, o));
  }
  Trace tr = simulate_open(plant, x0, model.horizon, rows(z, n, steps, m));
  if (att) {
    auto r = rows(z, n + nu, steps, o);
    for (std::size_t i = 0; i < o; ++i) {
      const auto& y = tr.channel(output_channel(static_cast<int>(i) + 1));
      auto& s = tr.channels[attack_channel(static_cast<int>(i) + 1)];
      for (std::size_t t = 0; t < steps; ++t) s.push_back(std::clamp(r[t][i], -1.0, 1.0) * space.attack->limit(i, y[t]));
    }
  }
  return tr;
}

std::vector<std::string> model_channels(const FalsifyModel& model, const SearchSpace& space) {
  auto names = model.plant->state_names();
  for (int i = 1; i <= model.plant->output_dim(); ++i) names.push_back(output_channel(i));
  for (int j = 1; j <= model.plant->control_dim(); ++j) names.push_back(control_channel(j));
  if (attacked(space)) {
    for (int i = 1; i <= model.plant->output_dim(); ++i) names.push_back(attack_channel(i));
  }
  return names;
}

FalsifyResult falsify(const FalsifyModel& model, const stl::Formula& phi, const SearchSpace& space,
                      const FalsifyOptions& options) {
  check_space(model, space);
  const auto have = model_channels(model, space);
  for (const auto& c : stl::channels(phi)) {
    if (std::find(have.begin(), have.end(), c) == have.end()) {
      throw ChannelMismatch("formula refers to channel '" + c + "' that the model does not produce");
    }
  }
  if (options.budget.iters_per_run < 1 || options.budget.n_runs < 1) throw ConfigError("budget values must be at least 1");
  return options.grid ? grid(model, phi, space, options) : anneal(model, phi, space, options);
}

CyberTrajectory CyberTrajectory::prefix(int l) const {
  if (l < 0 || l > length()) throw InternalError("prefix length out of range");
  return CyberTrajectory{std::vector<int>(path_ids.begin(), path_ids.begin() + l + 1)};
}

std::string CyberTrajectory::to_string() const {
  std::string s = "(";
  for (std::size_t i = 0; i < path_ids.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(path_ids[i]);
  }
  return s + ")";
}

PathExtraction extract_path_sequence(const Trace& trace, const PathTable& table, const RangeTable* ranges) {
  PathExtraction out;
  const std::size_t o = table.input_vars().size();
  std::vector<double> y(o);
  for (int t = 0; t <= trace.horizon; ++t) {
    for (std::size_t i = 0; i < o; ++i) {
      const int ch = static_cast<int>(i) + 1;
      y[i] = trace.at(output_channel(ch), t);
      if (trace.has(attack_channel(ch))) y[i] += trace.at(attack_channel(ch), t);
    }
    if (table.clamp_to_box(y)) ++out.clamped_steps;
    const int p = table.path_of(y);
    out.trajectory.path_ids.push_back(p);
    if (ranges) {
      for (std::size_t j = 0; j < ranges->controls(); ++j) {
        const auto& r = ranges->at(p, j);
        const std::string ch = control_channel(static_cast<int>(j) + 1);
        if (!trace.has(ch)) continue;
        Rational u = from_double(trace.at(ch, t));
        if (u < r.lo || u > r.hi) {
          ++out.out_of_range_steps;
          break;
        }
      }
    }
  }
  return out;
}

}  // namespace rampo
