#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rampo/falsifier.hpp"

namespace rampo {

// Per step, per control: [lo_t, hi_t] from the range table.
using TrajectoryRange = std::vector<std::vector<Interval>>;

TrajectoryRange tube_of(const CyberTrajectory& traj, const RangeTable& ranges);

// Replaces p_t by the first path whose control range contains u_t wherever
// u_t lies outside the range of p_t. Steps with no such path are kept.
CyberTrajectory range_consistent(const CyberTrajectory& literal, const Trace& trace, const RangeTable& ranges);

// A machine-built search objective. `target` is the formula a counterexample
// has to satisfy (the negated requirement plus any exclusions); interval
// constraints on u live in `u_box`, which the falsifier clips to.
struct Encoding {
  stl::Formula target;
  std::vector<std::vector<Interval>> u_box;  // steps 0..H

  // What the falsifier is asked to violate.
  stl::Formula phi() const { return stl::lnot(target); }
};

Encoding build_phi_initial(const stl::Formula& safety, const RangeTable& ranges, int horizon);
// Each explored tube must be escaped at some step within its prefix.
Encoding build_phi_exclusion(const stl::Formula& safety, const RangeTable& ranges,
                             const std::vector<TrajectoryRange>& explored, int horizon);
// Tube enforced on steps 0..keep, global envelope afterwards.
Encoding build_phi_prefix(const stl::Formula& safety, const RangeTable& ranges, const TrajectoryRange& tube, int keep,
                          int horizon);

enum class Strategy { Linear, Binary };
std::string to_string(Strategy s);
Strategy parse_strategy(const std::string& text);

struct CegarProblem {
  PlantPtr plant;
  std::shared_ptr<const ControllerIR> controller;
  std::shared_ptr<const PathTable> table;
  RangeTable ranges;
  stl::Formula safety;
  int horizon = 1;
  std::vector<Interval> x0_box;
  std::optional<AttackSpec> attack;
};

struct CegarOptions {
  Strategy strategy = Strategy::Linear;
  FalsifyOptions falsify;  // budget, base seed, grid mode
  int falsify_cap = 50;
  // Grid mode: consecutive exclusion finds that only map back to known
  // trajectories before the loop gives up. Annealing runs on to the cap.
  int stall_limit = 3;
};

struct Vulnerability {
  CyberTrajectory trajectory;
  Trace witness;
  std::vector<double> decision;  // x0, then attack fractions when attacked
  double robustness = 0.0;
  // s_t per output channel; empty without attack.
  std::vector<std::vector<double>> attack;
};

struct ExploredEntry {
  CyberTrajectory trajectory;
  std::string reason;  // abstract-unfalsifiable | concrete-unfalsifiable | concrete-found
  std::string budget;
};

struct RefineResult {
  std::vector<Vulnerability> vulns;
  std::vector<CyberTrajectory> abstracts;
  std::vector<ExploredEntry> explored;
};

struct CegarCounters {
  int falsifier_calls = 0;
  int abstract_calls = 0;
  int concrete_calls = 0;
  int exclusion_calls = 0;
  int refinements = 0;
  int clamped_steps = 0;
  int out_of_range_steps = 0;
  std::uint64_t simulations = 0;
};

// Holds the problem and the call accounting shared by refinement and run().
class CegarSession {
 public:
  CegarSession(CegarProblem problem, CegarOptions options);

  const CegarProblem& problem() const { return problem_; }
  const CegarOptions& options() const { return options_; }
  const CegarCounters& counters() const { return counters_; }
  bool cap_reached() const { return counters_.falsifier_calls >= options_.falsify_cap; }

  // Open-loop falsification under an encoding.
  FalsifyResult abstract_falsify(const Encoding& enc);
  // Closed loop restricted to the path constraints of `prefix`.
  FalsifyResult concrete_falsify(const CyberTrajectory& prefix);

  RefineResult refine_linear(const CyberTrajectory& abstract);
  RefineResult refine_binary(const CyberTrajectory& abstract);
  RefineResult refine(const CyberTrajectory& abstract);

  CyberTrajectory extract(const FalsifyResult& r);

  std::vector<std::string>& caveats() { return caveats_; }
  void count_exclusion() { ++counters_.exclusion_calls; }

 private:
  FalsifyOptions next_options();
  // Step 1 of refinement: abstract at keep = l, then the concrete check.
  // Returns false when the abstract search failed.
  bool search_concrete(const CyberTrajectory& abstract, RefineResult& out);
  bool probe(const CyberTrajectory& abstract, int keep);

  CegarProblem problem_;
  CegarOptions options_;
  CegarCounters counters_;
  std::vector<std::string> caveats_;
};

struct Report {
  std::string status;  // frontier-exhausted | budget-exhausted | stalled
  std::vector<Vulnerability> vulns;
  std::vector<ExploredEntry> explored;
  CegarCounters counters;
  std::vector<std::string> caveats;
  std::vector<std::pair<int, int>> overlaps;
  int path_count = 0;
};

Report run(const CegarProblem& problem, const CegarOptions& options);

// Brute-force baseline: split every x0 dimension into `parts` equal pieces and
// run one closed-loop falsification per cell (parts^n calls).
struct BaselineResult {
  int falsifier_calls = 0;
  std::set<CyberTrajectory> vulns;
  std::uint64_t simulations = 0;
};

BaselineResult partition_baseline(const CegarProblem& problem, int parts, const FalsifyOptions& options);

}  // namespace rampo
