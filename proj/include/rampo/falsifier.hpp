#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rampo/plant.hpp"
#include "rampo/ranges.hpp"
#include "rampo/stl.hpp"

namespace rampo {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  bool operator==(const Interval&) const = default;
};

struct SearchSpace {
  std::vector<Interval> x0_box;
  // Open loop only: free_u[t][j] bounds control j at step t, t = 0..H.
  std::vector<std::vector<Interval>> free_u;
  std::optional<AttackSpec> attack;
};

struct Budget {
  int iters_per_run = 100;
  int n_runs = 5;
  bool operator==(const Budget&) const = default;
};

// "ITERSxRUNS", e.g. "100x5".
Budget parse_budget(const std::string& text);
std::string to_string(const Budget& b);

struct GridSpec {
  int x0_points = 3;
  int u_points = 3;
  int s_points = 3;
  std::uint64_t max_points = 2'000'000;
};

struct FalsifyOptions {
  Budget budget;
  std::uint64_t seed = 0;
  bool grid = false;
  GridSpec grid_spec;
};

// What gets simulated. Without `closed` the plant runs open loop on free u.
struct FalsifyModel {
  PlantPtr plant;
  std::optional<ClosedLoop> closed;
  int horizon = 1;
  // Added to robustness in the objective. A trace only counts as a violation
  // when its penalty is exactly zero.
  std::function<double(const Trace&)> penalty;
};

struct FalsifyResult {
  bool found = false;
  Trace trace;                  // witness if found, else best seen
  std::vector<double> decision;  // reproduces `trace` via realize()
  double robustness = 0.0;      // of phi on `trace`
  double objective = 0.0;       // robustness + penalty
  std::uint64_t seed = 0;
  int falsifier_calls = 1;
  int runs_used = 0;
  std::uint64_t simulations = 0;
};

// Flattened decision layout: x0, then u (t-major, open loop), then attack
// fractions r in [-1, 1] (t-major) when an attack channel is enabled.
std::vector<Interval> decision_box(const FalsifyModel& model, const SearchSpace& space);

Trace realize(const FalsifyModel& model, const SearchSpace& space, const std::vector<double>& decision);

// Channels the model's traces carry.
std::vector<std::string> model_channels(const FalsifyModel& model, const SearchSpace& space);

// Search for a trace with robustness(phi) < 0.
FalsifyResult falsify(const FalsifyModel& model, const stl::Formula& phi, const SearchSpace& space,
                      const FalsifyOptions& options);

// Cyber trajectory (path ids p_0..p_l).
struct CyberTrajectory {
  std::vector<int> path_ids;

  int length() const { return static_cast<int>(path_ids.size()) - 1; }  // l
  CyberTrajectory prefix(int l) const;
  std::string to_string() const;
  auto operator<=>(const CyberTrajectory&) const = default;
};

struct PathExtraction {
  CyberTrajectory trajectory;
  int clamped_steps = 0;       // y + s outside the controller box
  int out_of_range_steps = 0;  // u_t outside the range of p_t
};

// p_t = path_of(y_t + s_t) for t = 0..H. y channels are read in controller
// parameter order from y1..yo.
PathExtraction extract_path_sequence(const Trace& trace, const PathTable& table, const RangeTable* ranges = nullptr);

}  // namespace rampo
