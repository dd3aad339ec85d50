#pragma once

#include <map>
#include <string>
#include <vector>

#include "rampo/affine.hpp"

namespace rampo {

struct VarBound {
  std::string name;
  Rational lo;
  Rational hi;
};

// Finite per-variable box; order fixes the variable order of the LP.
using Box = std::vector<VarBound>;

enum class Sense { Minimize, Maximize };
enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LinearProgram {
  AffineExpr objective;
  Sense sense = Sense::Maximize;
  std::vector<Atom> constraints;
  Box box;
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Rational optimum;
  std::map<std::string, Rational> witness;
  // Whether some point satisfying the strict form of every atom reaches the optimum.
  bool attained = false;
};

// Exact two-phase simplex with Bland's rule. Strict atoms are relaxed to their
// closure for the optimum; attainment is decided by a strict feasibility check
// on the optimal face.
LpSolution solve_lp(const LinearProgram& lp);

// True iff some point in the box satisfies every atom, strict atoms strictly.
// Strictness is handled exactly by maximizing a slack epsilon shared by all
// strict atoms; thin regions (epsilon = 0) are infeasible.
bool feasible(const std::vector<Atom>& atoms, const Box& box);

namespace detail {

struct StandardResult {
  LpStatus status = LpStatus::Infeasible;
  Rational value;
  std::vector<Rational> x;
};

// maximize c.x  s.t.  A x <= b, x >= 0.
StandardResult solve_standard(const std::vector<std::vector<Rational>>& A,
                              const std::vector<Rational>& b,
                              const std::vector<Rational>& c);

}  // namespace detail
}  // namespace rampo
