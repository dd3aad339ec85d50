#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rampo/controller.hpp"
#include "rampo/lp.hpp"

namespace rampo {

// Closed-hull bounds of one control output over one path (or over all paths).
struct ControlRange {
  std::string control_var;
  Rational lo;
  Rational hi;
  bool lo_attained = true;
  bool hi_attained = true;
};

struct PathRange {
  int path_id = 0;
  std::vector<ControlRange> controls;  // PathTable::control_vars() order
};

struct RangeTable {
  std::vector<PathRange> ranges;   // ranges[p-1] belongs to path p
  std::vector<ControlRange> global;  // envelope over all paths, per control

  const ControlRange& at(int path_id, std::size_t control) const {
    return ranges.at(static_cast<std::size_t>(path_id - 1)).controls.at(control);
  }
  std::size_t controls() const { return global.size(); }
};

// Min and max of every path function over its constraint and the input box.
RangeTable path_ranges(const PathTable& table);

// Pairs of distinct paths (p < q) whose ranges intersect on every control.
std::vector<std::pair<int, int>> overlapping_ranges(const RangeTable& ranges);

}  // namespace rampo
