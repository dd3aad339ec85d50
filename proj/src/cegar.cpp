#include "rampo/cegar.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace rampo {
namespace {

std::vector<Interval> envelope(const RangeTable& ranges) {
  std::vector<Interval> env;
  for (const auto& g : ranges.global) env.push_back({to_double(g.lo), to_double(g.hi)});
  return env;
}

std::vector<std::vector<Interval>> envelope_box(const RangeTable& ranges, int horizon) {
  return std::vector<std::vector<Interval>>(static_cast<std::size_t>(horizon) + 1, envelope(ranges));
}

// Some control leaves [lo, hi] at step t.
stl::Formula escape_at(int t, const std::vector<Interval>& step) {
  std::vector<stl::Formula> outs;
  for (std::size_t j = 0; j < step.size(); ++j) {
    const std::string ch = control_channel(static_cast<int>(j) + 1);
    outs.push_back(stl::channel_cmp(ch, Relop::Lt, step[j].lo));
    outs.push_back(stl::channel_cmp(ch, Relop::Gt, step[j].hi));
  }
  return stl::eventually(t, t, stl::lor(std::move(outs)));
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

Vulnerability make_vuln(const FalsifyResult& r, int outputs) {
  Vulnerability v;
  v.trajectory = CyberTrajectory{r.trace.paths};
  v.witness = r.trace;
  v.decision = r.decision;
  v.robustness = r.robustness;
  if (r.trace.has(attack_channel(1))) {
    for (int t = 0; t <= r.trace.horizon; ++t) {
      std::vector<double> row;
      for (int i = 1; i <= outputs; ++i) row.push_back(r.trace.at(attack_channel(i), t));
      v.attack.push_back(std::move(row));
    }
  }
  return v;
}

}  // namespace

CyberTrajectory range_consistent(const CyberTrajectory& literal, const Trace& trace, const RangeTable& ranges) {
  CyberTrajectory out = literal;
  const std::size_t m = ranges.controls();
  auto inside = [&](int p, int t) {
    for (std::size_t j = 0; j < m; ++j) {
      Rational u = from_double(trace.at(control_channel(static_cast<int>(j) + 1), t));
      const auto& r = ranges.at(p, j);
      if (u < r.lo || u > r.hi) return false;
    }
    return true;
  };
  for (int t = 0; t <= literal.length(); ++t) {
    if (inside(literal.path_ids[t], t)) continue;
    for (const auto& pr : ranges.ranges) {
      if (inside(pr.path_id, t)) {
        out.path_ids[t] = pr.path_id;
        break;
      }
    }
  }
  return out;
}

TrajectoryRange tube_of(const CyberTrajectory& traj, const RangeTable& ranges) {
  TrajectoryRange tube;
  for (int p : traj.path_ids) {
    std::vector<Interval> step;
    for (std::size_t j = 0; j < ranges.controls(); ++j) {
      const auto& r = ranges.at(p, j);
      step.push_back({to_double(r.lo), to_double(r.hi)});
    }
    tube.push_back(std::move(step));
  }
  return tube;
}

Encoding build_phi_initial(const stl::Formula& safety, const RangeTable& ranges, int horizon) {
  if (ranges.ranges.empty()) throw ConfigError("range table is empty");
  if (horizon < 0) throw ConfigError("horizon must be non-negative");
  return Encoding{stl::negate(safety), envelope_box(ranges, horizon)};
}

Encoding build_phi_exclusion(const stl::Formula& safety, const RangeTable& ranges,
                             const std::vector<TrajectoryRange>& explored, int horizon) {
  Encoding enc = build_phi_initial(safety, ranges, horizon);
  if (explored.empty()) return enc;
  std::vector<stl::Formula> parts{enc.target};
  for (const auto& tube : explored) {
    if (tube.size() > static_cast<std::size_t>(horizon) + 1) throw ConfigError("explored prefix longer than H+1");
    std::vector<stl::Formula> escapes;
    for (std::size_t t = 0; t < tube.size(); ++t) escapes.push_back(escape_at(static_cast<int>(t), tube[t]));
    parts.push_back(stl::lor(std::move(escapes)));
  }
  enc.target = stl::land(std::move(parts));
  return enc;
}

Encoding build_phi_prefix(const stl::Formula& safety, const RangeTable& ranges, const TrajectoryRange& tube, int keep,
                          int horizon) {
  Encoding enc = build_phi_initial(safety, ranges, horizon);
  if (keep < 0 || keep >= static_cast<int>(tube.size()) || keep > horizon) {
    throw ConfigError("prefix length " + std::to_string(keep) + " out of range");
  }
  for (int t = 0; t <= keep; ++t) enc.u_box[static_cast<std::size_t>(t)] = tube[static_cast<std::size_t>(t)];
  return enc;
}

std::string to_string(Strategy s) { return s == Strategy::Linear ? "linear" : "binary"; }

Strategy parse_strategy(const std::string& text) {
  if (text == "linear") return Strategy::Linear;
  if (text == "binary") return Strategy::Binary;
  throw ConfigError("strategy must be 'linear' or 'binary', got '" + text + "'");
}

CegarSession::CegarSession(CegarProblem problem, CegarOptions options)
    : problem_(std::move(problem)), options_(std::move(options)) {
  if (!problem_.plant || !problem_.controller || !problem_.table) throw ConfigError("incomplete CEGAR problem");
  if (problem_.horizon < 1) throw ConfigError("horizon must be at least 1");
  if (options_.falsify_cap < 1) throw ConfigError("falsify cap must be at least 1");
  // Validates arity.
  make_closed_loop(problem_.plant, problem_.controller, problem_.table, problem_.attack);
}

FalsifyOptions CegarSession::next_options() {
  if (cap_reached()) throw InternalError("falsify cap exceeded");
  FalsifyOptions o = options_.falsify;
  o.seed = splitmix64(options_.falsify.seed ^ splitmix64(static_cast<std::uint64_t>(counters_.falsifier_calls)));
  ++counters_.falsifier_calls;
  return o;
}

FalsifyResult CegarSession::abstract_falsify(const Encoding& enc) {
  FalsifyModel model{problem_.plant, std::nullopt, problem_.horizon, nullptr};
  SearchSpace space{problem_.x0_box, enc.u_box, problem_.attack};
  ++counters_.abstract_calls;
  auto r = falsify(model, enc.phi(), space, next_options());
  counters_.simulations += r.simulations;
  return r;
}

FalsifyResult CegarSession::concrete_falsify(const CyberTrajectory& prefix) {
  auto cl = make_closed_loop(problem_.plant, problem_.controller, problem_.table, problem_.attack);
  auto ids = prefix.path_ids;
  FalsifyModel model{problem_.plant, cl, problem_.horizon, [ids](const Trace& tr) {
                       int mismatches = 0;
                       for (std::size_t t = 0; t < ids.size(); ++t) mismatches += tr.paths.at(t) != ids[t];
                       return 1000.0 * mismatches;
                     }};
  SearchSpace space{problem_.x0_box, {}, problem_.attack};
  ++counters_.concrete_calls;
  auto r = falsify(model, problem_.safety, space, next_options());
  counters_.simulations += r.simulations;
  return r;
}

CyberTrajectory CegarSession::extract(const FalsifyResult& r) {
  auto ex = extract_path_sequence(r.trace, *problem_.table, &problem_.ranges);
  counters_.clamped_steps += ex.clamped_steps;
  counters_.out_of_range_steps += ex.out_of_range_steps;
  return ex.trajectory;
}

bool CegarSession::probe(const CyberTrajectory& abstract, int keep) {
  auto enc = build_phi_prefix(problem_.safety, problem_.ranges, tube_of(abstract, problem_.ranges), keep,
                              problem_.horizon);
  return abstract_falsify(enc).found;
}

bool CegarSession::search_concrete(const CyberTrajectory& abstract, RefineResult& out) {
  const std::string budget = to_string(options_.falsify.budget);
  if (!probe(abstract, abstract.length())) {
    out.explored.push_back({abstract, "abstract-unfalsifiable", budget});
    return false;
  }
  if (cap_reached()) {
    caveats_.push_back("falsify cap reached before the concrete check of " + abstract.to_string());
    return true;
  }
  auto c = concrete_falsify(abstract);
  if (c.found) {
    auto v = make_vuln(c, problem_.plant->output_dim());
    out.explored.push_back({v.trajectory, "concrete-found", budget});
    out.vulns.push_back(std::move(v));
  } else {
    out.explored.push_back({abstract, "concrete-unfalsifiable", budget});
  }
  return true;
}

RefineResult CegarSession::refine_linear(const CyberTrajectory& abstract) {
  RefineResult out;
  ++counters_.refinements;
  if (cap_reached() || search_concrete(abstract, out)) return out;
  const int l = abstract.length();
  for (int i = 1; i <= l && !cap_reached(); ++i) {
    const int keep = l - i;
    if (probe(abstract, keep)) {
      out.abstracts.push_back(abstract.prefix(keep));
      break;
    }
    out.explored.push_back({abstract.prefix(keep), "abstract-unfalsifiable", to_string(options_.falsify.budget)});
  }
  return out;
}

RefineResult CegarSession::refine_binary(const CyberTrajectory& abstract) {
  RefineResult out;
  ++counters_.refinements;
  if (cap_reached() || search_concrete(abstract, out)) return out;
  const int l = abstract.length();
  int lo = 1;
  int hi = l;
  int best = -1;
  while (lo <= hi && !cap_reached()) {
    const int mid = lo + (hi - lo) / 2;
    if (probe(abstract, l - mid)) {
      best = mid;
      hi = mid - 1;
    } else {
      out.explored.push_back({abstract.prefix(l - mid), "abstract-unfalsifiable", to_string(options_.falsify.budget)});
      lo = mid + 1;
    }
  }
  if (best > 0) out.abstracts.push_back(abstract.prefix(l - best));
  return out;
}

RefineResult CegarSession::refine(const CyberTrajectory& abstract) {
  return options_.strategy == Strategy::Linear ? refine_linear(abstract) : refine_binary(abstract);
}

Report run(const CegarProblem& problem, const CegarOptions& options) {
  CegarSession s(problem, options);
  Report rep;
  rep.path_count = problem.table->k();
  rep.overlaps = overlapping_ranges(problem.ranges);
  for (auto [p, q] : rep.overlaps) {
    s.caveats().push_back("paths " + std::to_string(p) + " and " + std::to_string(q) +
                          " have overlapping control ranges; excluding one tube may also exclude the other");
  }

  std::set<CyberTrajectory> seen, explored, vulns;
  std::deque<CyberTrajectory> frontier;
  auto consider = [&](const CyberTrajectory& t) {
    if (seen.count(t) || explored.count(t) || vulns.count(t)) return false;
    seen.insert(t);
    frontier.push_back(t);
    return true;
  };
  auto merge = [&](RefineResult&& r) {
    for (auto& v : r.vulns) {
      if (vulns.insert(v.trajectory).second) rep.vulns.push_back(std::move(v));
    }
    for (auto& e : r.explored) {
      if (explored.insert(e.trajectory).second) rep.explored.push_back(std::move(e));
    }
    for (const auto& a : r.abstracts) consider(a);
  };

  const std::string budget = to_string(options.falsify.budget);
  auto first = s.abstract_falsify(build_phi_initial(problem.safety, problem.ranges, problem.horizon));
  if (!first.found) {
    // The whole envelope is certified under this budget.
    rep.explored.push_back({CyberTrajectory{}, "abstract-unfalsifiable", budget});
    rep.status = "frontier-exhausted";
  } else {
    consider(s.extract(first));
    int stalls = 0;
    for (;;) {
      while (!frontier.empty() && !s.cap_reached()) {
        auto a = frontier.front();
        frontier.pop_front();
        merge(s.refine(a));
      }
      if (s.cap_reached()) {
        rep.status = "budget-exhausted";
        break;
      }
      std::vector<TrajectoryRange> tubes;
      for (const auto& e : rep.explored) tubes.push_back(tube_of(e.trajectory, problem.ranges));
      auto r = s.abstract_falsify(build_phi_exclusion(problem.safety, problem.ranges, tubes, problem.horizon));
      s.count_exclusion();
      if (!r.found) {
        rep.status = frontier.empty() ? "frontier-exhausted" : "budget-exhausted";
        break;
      }
      auto t = s.extract(r);
      if (consider(t)) {
        stalls = 0;
        continue;
      }
      // The free controls escaped every explored tube but PATH(y) still lands
      // on a known sequence. Read the sequence off the control ranges instead.
      auto alt = range_consistent(t, r.trace, problem.ranges);
      if (consider(alt)) {
        stalls = 0;
        s.caveats().push_back("exclusion find " + t.to_string() + " is already known; continuing with " +
                              alt.to_string() + " read from the control ranges");
        continue;
      }
      s.caveats().push_back("exclusion search found a trace whose path sequence " + t.to_string() +
                            " is already known");
      // A grid search would only repeat itself; annealing draws a fresh seed.
      if (options.falsify.grid && ++stalls >= options.stall_limit) {
        rep.status = "stalled";
        break;
      }
    }
  }
  rep.counters = s.counters();
  rep.caveats = s.caveats();
  return rep;
}

BaselineResult partition_baseline(const CegarProblem& problem, int parts, const FalsifyOptions& options) {
  if (parts < 1) throw ConfigError("partition count must be at least 1");
  const std::size_t n = problem.x0_box.size();
  auto cl = make_closed_loop(problem.plant, problem.controller, problem.table, problem.attack);
  FalsifyModel model{problem.plant, cl, problem.horizon, nullptr};
  BaselineResult out;
  std::vector<int> idx(n, 0);
  for (;;) {
    SearchSpace space{{}, {}, problem.attack};
    for (std::size_t i = 0; i < n; ++i) {
      const auto& b = problem.x0_box[i];
      const double w = b.width() / parts;
      const double lo = b.lo + w * idx[i];
      space.x0_box.push_back({lo, idx[i] + 1 == parts ? b.hi : lo + w});
    }
    FalsifyOptions o = options;
    o.seed = splitmix64(options.seed ^ splitmix64(static_cast<std::uint64_t>(out.falsifier_calls)));
    ++out.falsifier_calls;
    auto r = falsify(model, problem.safety, space, o);
    out.simulations += r.simulations;
    if (r.found) out.vulns.insert(CyberTrajectory{r.trace.paths});
    std::size_t d = n;
    while (d > 0 && ++idx[d - 1] == parts) idx[--d] = 0;
    if (d == 0) break;
  }
  return out;
}

}  // namespace rampo
