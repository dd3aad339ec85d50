#include "rampo/ranges.hpp"

#include "rampo/errors.hpp"

namespace rampo {
namespace {

// One bound over the union of a path's cells.
struct CellBound {
  Rational value;
  bool attained = false;
  bool set = false;
};

void merge(CellBound& acc, const LpSolution& s, bool take_max) {
  if (!acc.set || (take_max ? s.optimum > acc.value : s.optimum < acc.value)) {
    acc = {s.optimum, s.attained, true};
  } else if (s.optimum == acc.value) {
    acc.attained = acc.attained || s.attained;
  }
}

}  // namespace

RangeTable path_ranges(const PathTable& table) {
  RangeTable out;
  const auto& controls = table.control_vars();
  for (const auto& entry : table.entries()) {
    PathRange pr;
    pr.path_id = entry.constraint.path_id;
    for (const auto& cv : controls) {
      CellBound lo;
      CellBound hi;
      for (const auto& cell : entry.constraint.cells) {
        LinearProgram lp{entry.function.outputs.at(cv), Sense::Minimize, cell, table.box()};
        LpSolution smin = solve_lp(lp);
        if (smin.status != LpStatus::Optimal) continue;
        lp.sense = Sense::Maximize;
        LpSolution smax = solve_lp(lp);
        merge(lo, smin, false);
        merge(hi, smax, true);
      }
      if (!lo.set) {
        throw InternalError("path " + std::to_string(pr.path_id) + " has no feasible cell");
      }
      pr.controls.push_back({cv, lo.value, hi.value, lo.attained, hi.attained});
    }
    out.ranges.push_back(std::move(pr));
  }
  for (std::size_t c = 0; c < controls.size(); ++c) {
    ControlRange g = out.ranges.front().controls[c];
    for (std::size_t p = 1; p < out.ranges.size(); ++p) {
      const ControlRange& r = out.ranges[p].controls[c];
      if (r.lo < g.lo) {
        g.lo = r.lo;
        g.lo_attained = r.lo_attained;
      } else if (r.lo == g.lo) {
        g.lo_attained = g.lo_attained || r.lo_attained;
      }
      if (r.hi > g.hi) {
        g.hi = r.hi;
        g.hi_attained = r.hi_attained;
      } else if (r.hi == g.hi) {
        g.hi_attained = g.hi_attained || r.hi_attained;
      }
    }
    out.global.push_back(g);
  }
  return out;
}

std::vector<std::pair<int, int>> overlapping_ranges(const RangeTable& ranges) {
  std::vector<std::pair<int, int>> out;
  for (std::size_t p = 0; p < ranges.ranges.size(); ++p) {
    for (std::size_t q = p + 1; q < ranges.ranges.size(); ++q) {
      bool all = true;
      for (std::size_t c = 0; c < ranges.global.size(); ++c) {
        const auto& a = ranges.ranges[p].controls[c];
        const auto& b = ranges.ranges[q].controls[c];
        if (a.hi < b.lo || b.hi < a.lo) {
          all = false;
          break;
        }
      }
      if (all) out.emplace_back(ranges.ranges[p].path_id, ranges.ranges[q].path_id);
    }
  }
  return out;
}

}  // namespace rampo
