#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rampo/affine.hpp"
#include "rampo/errors.hpp"
#include "rampo/lp.hpp"

namespace rampo {

struct ControllerSource {
  std::string text;
  std::string entry = "control";
};

// ---------------------------------------------------------------------------
// Controller IR. The language: scalar doubles, affine arithmetic, sequential
// assignment, if/else over && / || of comparisons, and one trailing return.

struct Expr {
  enum class Kind { Number, Variable, Add, Sub, Mul, Neg };
  Kind kind = Kind::Number;
  Rational value;
  std::string name;
  std::vector<Expr> args;
  SourceLoc loc;
};

struct Condition {
  enum class Kind { Compare, And, Or };
  Kind kind = Kind::Compare;
  Expr lhs;
  Expr rhs;
  Relop op = Relop::Lt;
  std::vector<Condition> args;
  SourceLoc loc;
};

struct Stmt;

struct Assign {
  std::string target;
  Expr value;
  SourceLoc loc;
};

struct IfStmt {
  int id = 0;  // pre-order index among all if statements
  Condition cond;
  std::vector<Stmt> then_branch;
  std::vector<Stmt> else_branch;
  SourceLoc loc;
};

struct Stmt {
  std::variant<Assign, IfStmt> node;
};

struct ControllerIR {
  std::string name;
  std::vector<std::string> params;
  std::vector<Stmt> body;
  std::string return_var;
  int if_count = 0;
};

ControllerIR parse_controller(const ControllerSource& src);

// ---------------------------------------------------------------------------
// Path decomposition.

// Which branch an if statement took.
struct Decision {
  int if_id = 0;
  bool taken = true;
  bool operator==(const Decision&) const = default;
  auto operator<=>(const Decision& rhs) const {
    if (auto c = if_id <=> rhs.if_id; c != 0) return c;
    // then-before-else
    return rhs.taken <=> taken;
  }
};

// A path is one branch-decision sequence. Its guard is a union of disjoint
// conjunctive cells: || in a guard, and the else side of &&, split a branch
// into several short-circuit cells that all reach the same leaf.
struct PathConstraint {
  int path_id = 0;
  std::vector<std::vector<Atom>> cells;

  bool holds(const std::map<std::string, Rational>& point) const;
  std::string to_string() const;
};

struct PathFunction {
  std::map<std::string, AffineExpr> outputs;
};

struct PathEntry {
  PathConstraint constraint;
  PathFunction function;
  std::vector<Decision> decisions;
};

class PathTable {
 public:
  PathTable(std::vector<std::string> input_vars, Box box, std::vector<std::string> control_vars,
            std::vector<PathEntry> entries, std::vector<std::vector<Atom>> pruned);

  int k() const { return static_cast<int>(entries_.size()); }
  const std::vector<PathEntry>& entries() const { return entries_; }
  const PathEntry& entry(int path_id) const { return entries_.at(static_cast<std::size_t>(path_id - 1)); }
  const std::vector<std::string>& input_vars() const { return input_vars_; }
  const std::vector<std::string>& control_vars() const { return control_vars_; }
  const Box& box() const { return box_; }
  // Cells dropped during extraction because their guard was infeasible.
  const std::vector<std::vector<Atom>>& pruned() const { return pruned_; }

  // Unique path whose constraint holds at y (inputs in input_vars order),
  // evaluated exactly. Throws OutOfDomain if none holds.
  int path_of(std::span<const double> y) const;
  int path_of_exact(std::span<const Rational> y) const;

  // Control values of the given path at y, exact, rounded once to double.
  std::vector<double> evaluate(int path_id, std::span<const double> y) const;

  // Clamp y into the declared box; returns whether any coordinate moved.
  bool clamp_to_box(std::span<double> y) const;

  std::optional<int> find_by_decisions(const std::vector<Decision>& decisions) const;

 private:
  struct DenseAtom {
    DenseAffine expr;
    Relop op;
  };
  struct Compiled {
    std::vector<std::vector<DenseAtom>> cells;
    std::vector<DenseAffine> outputs;
  };

  std::vector<std::string> input_vars_;
  Box box_;
  std::vector<double> box_lo_;
  std::vector<double> box_hi_;
  std::vector<std::string> control_vars_;
  std::vector<PathEntry> entries_;
  std::vector<std::vector<Atom>> pruned_;
  std::vector<Compiled> compiled_;
};

struct ExtractOptions {
  std::size_t path_cap = 4096;
  // Defaults to the returned variable.
  std::vector<std::string> control_vars;
};

// Forward symbolic execution over every branch combination. `box` must bound
// every parameter; cells infeasible inside the box are pruned.
PathTable extract_paths(const ControllerIR& ir, const Box& box, const ExtractOptions& options = {});

// ---------------------------------------------------------------------------
// Concrete execution.

struct Execution {
  std::vector<Decision> decisions;
  std::map<std::string, Rational> env;
};

// Runs the program on y (parameter order). Literals and arithmetic are exact;
// branch decisions are exact on the given double inputs.
Execution execute(const ControllerIR& ir, std::span<const double> y);

// Control values (in `control_vars` order, default the returned variable),
// each rounded once to the nearest double.
std::vector<double> interpret(const ControllerIR& ir, std::span<const double> y,
                              const std::vector<std::string>& control_vars = {});

}  // namespace rampo
