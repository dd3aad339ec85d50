#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "rampo/controller.hpp"

namespace rampo {
namespace {

using Env = std::map<std::string, AffineExpr>;

AffineExpr to_affine(const Expr& e, const Env& env) {
  switch (e.kind) {
    case Expr::Kind::Number:
      return AffineExpr(e.value);
    case Expr::Kind::Variable: {
      auto it = env.find(e.name);
      if (it == env.end()) {
        throw UnsupportedConstruct("use of unassigned variable '" + e.name + "'", e.loc);
      }
      return it->second;
    }
    case Expr::Kind::Add:
      return to_affine(e.args[0], env) + to_affine(e.args[1], env);
    case Expr::Kind::Sub:
      return to_affine(e.args[0], env) - to_affine(e.args[1], env);
    case Expr::Kind::Neg:
      return -to_affine(e.args[0], env);
    case Expr::Kind::Mul: {
      AffineExpr a = to_affine(e.args[0], env);
      AffineExpr b = to_affine(e.args[1], env);
      if (a.is_constant()) return b * a.constant();
      if (b.is_constant()) return a * b.constant();
      throw UnsupportedConstruct("non-affine product of variables", e.loc);
    }
  }
  return {};
}

// Short-circuit evaluation outcomes of a condition: each entry is a
// conjunction of atoms and the truth value it yields. Outcomes are mutually
// exclusive and exhaustive, enumerated depth-first with true before false.
struct Outcome {
  std::vector<Atom> atoms;
  bool value = false;
};

std::vector<Outcome> outcomes(const Condition& c, const Env& env) {
  switch (c.kind) {
    case Condition::Kind::Compare: {
      Atom atom{to_affine(c.lhs, env) - to_affine(c.rhs, env), c.op};
      if (atom.expr.is_constant()) return {Outcome{{}, atom.holds(atom.expr.constant())}};
      return {Outcome{{atom}, true}, Outcome{{atom.negated()}, false}};
    }
    case Condition::Kind::And:
    case Condition::Kind::Or: {
      // && continues on true, || continues on false.
      const bool continue_on = c.kind == Condition::Kind::And;
      std::vector<Outcome> acc = outcomes(c.args[0], env);
      for (std::size_t i = 1; i < c.args.size(); ++i) {
        std::vector<Outcome> next;
        std::vector<Outcome> rhs = outcomes(c.args[i], env);
        for (auto& o : acc) {
          if (o.value != continue_on) {
            next.push_back(std::move(o));
            continue;
          }
          for (const auto& r : rhs) {
            Outcome merged = o;
            merged.atoms.insert(merged.atoms.end(), r.atoms.begin(), r.atoms.end());
            merged.value = r.value;
            next.push_back(std::move(merged));
          }
        }
        acc = std::move(next);
      }
      return acc;
    }
  }
  return {};
}

struct SymState {
  std::vector<Decision> decisions;
  Env env;
  std::vector<Atom> cell;
};

class SymbolicExecutor {
 public:
  SymbolicExecutor(const Box& box, std::size_t cap) : box_(box), cap_(cap) {}

  std::vector<SymState> run(const std::vector<Stmt>& body, std::vector<SymState> states) {
    for (const auto& stmt : body) {
      std::vector<SymState> next;
      for (auto& s : states) step(stmt, std::move(s), next);
      states = std::move(next);
      check_cap(states);
    }
    return states;
  }

  std::vector<std::vector<Atom>> pruned;

 private:
  void step(const Stmt& stmt, SymState s, std::vector<SymState>& out) {
    if (const auto* a = std::get_if<Assign>(&stmt.node)) {
      s.env[a->target] = to_affine(a->value, s.env);
      out.push_back(std::move(s));
      return;
    }
    const auto& branch = std::get<IfStmt>(stmt.node);
    std::vector<Outcome> outs = outcomes(branch.cond, s.env);
    for (bool side : {true, false}) {
      for (const auto& o : outs) {
        if (o.value != side) continue;
        SymState child = s;
        for (const auto& atom : o.atoms) {
          if (std::find(child.cell.begin(), child.cell.end(), atom) == child.cell.end()) {
            child.cell.push_back(atom);
          }
        }
        if (!o.atoms.empty() && !feasible(child.cell, box_)) {
          pruned.push_back(std::move(child.cell));
          continue;
        }
        child.decisions.push_back({branch.id, side});
        const auto& block = side ? branch.then_branch : branch.else_branch;
        std::vector<SymState> sub = run(block, {std::move(child)});
        for (auto& t : sub) out.push_back(std::move(t));
      }
    }
  }

  void check_cap(const std::vector<SymState>& states) const {
    std::set<std::vector<Decision>> distinct;
    for (const auto& s : states) distinct.insert(s.decisions);
    if (distinct.size() > cap_) {
      throw PathExplosion("path count exceeds cap of " + std::to_string(cap_));
    }
  }

  const Box& box_;
  std::size_t cap_;
};

Box order_box(const ControllerIR& ir, const Box& box) {
  Box ordered;
  for (const auto& p : ir.params) {
    auto it = std::find_if(box.begin(), box.end(), [&](const VarBound& b) { return b.name == p; });
    if (it == box.end()) throw ConfigError("no box bound for controller input '" + p + "'");
    if (it->hi < it->lo) throw ConfigError("empty box bound for '" + p + "'");
    ordered.push_back(*it);
  }
  for (const auto& b : box) {
    if (std::find(ir.params.begin(), ir.params.end(), b.name) == ir.params.end()) {
      throw ConfigError("box names unknown controller input '" + b.name + "'");
    }
  }
  return ordered;
}

}  // namespace

bool PathConstraint::holds(const std::map<std::string, Rational>& point) const {
  for (const auto& cell : cells) {
    if (std::all_of(cell.begin(), cell.end(), [&](const Atom& a) { return a.holds(point); })) return true;
  }
  return false;
}

std::string PathConstraint::to_string() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) os << " | ";
    os << "(";
    if (cells[i].empty()) os << "true";
    for (std::size_t j = 0; j < cells[i].size(); ++j) {
      if (j) os << " & ";
      os << cells[i][j].to_string();
    }
    os << ")";
  }
  return os.str();
}

PathTable::PathTable(std::vector<std::string> input_vars, Box box, std::vector<std::string> control_vars,
                     std::vector<PathEntry> entries, std::vector<std::vector<Atom>> pruned)
    : input_vars_(std::move(input_vars)),
      box_(std::move(box)),
      control_vars_(std::move(control_vars)),
      entries_(std::move(entries)),
      pruned_(std::move(pruned)) {
  for (const auto& b : box_) {
    box_lo_.push_back(to_double(b.lo));
    box_hi_.push_back(to_double(b.hi));
  }
  for (const auto& e : entries_) {
    Compiled c;
    for (const auto& cell : e.constraint.cells) {
      std::vector<DenseAtom> dense;
      for (const auto& a : cell) dense.push_back({DenseAffine::from(a.expr, input_vars_), a.op});
      c.cells.push_back(std::move(dense));
    }
    for (const auto& cv : control_vars_) c.outputs.push_back(DenseAffine::from(e.function.outputs.at(cv), input_vars_));
    compiled_.push_back(std::move(c));
  }
}

int PathTable::path_of_exact(std::span<const Rational> y) const {
  for (std::size_t p = 0; p < compiled_.size(); ++p) {
    for (const auto& cell : compiled_[p].cells) {
      bool ok = true;
      for (const auto& a : cell) {
        if (!Atom{AffineExpr(), a.op}.holds(a.expr.evaluate(y))) {
          ok = false;
          break;
        }
      }
      if (ok) return static_cast<int>(p) + 1;
    }
  }
  throw OutOfDomain("no path constraint holds for the given input");
}

int PathTable::path_of(std::span<const double> y) const {
  if (y.size() != input_vars_.size()) throw OutOfDomain("input arity mismatch");
  std::vector<Rational> q;
  q.reserve(y.size());
  for (double v : y) q.push_back(from_double(v));
  return path_of_exact(q);
}

std::vector<double> PathTable::evaluate(int path_id, std::span<const double> y) const {
  const auto& c = compiled_.at(static_cast<std::size_t>(path_id - 1));
  std::vector<Rational> q;
  q.reserve(y.size());
  for (double v : y) q.push_back(from_double(v));
  std::vector<double> out;
  out.reserve(c.outputs.size());
  for (const auto& o : c.outputs) out.push_back(to_double(o.evaluate(q)));
  return out;
}

bool PathTable::clamp_to_box(std::span<double> y) const {
  bool moved = false;
  for (std::size_t i = 0; i < y.size() && i < box_lo_.size(); ++i) {
    double c = std::clamp(y[i], box_lo_[i], box_hi_[i]);
    // Rounded bounds may sit just outside an exact decimal bound.
    if (from_double(c) < box_[i].lo) c = std::nextafter(c, HUGE_VAL);
    if (from_double(c) > box_[i].hi) c = std::nextafter(c, -HUGE_VAL);
    if (c != y[i]) moved = true;
    y[i] = c;
  }
  return moved;
}

std::optional<int> PathTable::find_by_decisions(const std::vector<Decision>& decisions) const {
  for (std::size_t p = 0; p < entries_.size(); ++p) {
    if (entries_[p].decisions == decisions) return static_cast<int>(p) + 1;
  }
  return std::nullopt;
}

PathTable extract_paths(const ControllerIR& ir, const Box& box, const ExtractOptions& options) {
  Box ordered = order_box(ir, box);
  std::vector<std::string> controls = options.control_vars;
  if (controls.empty()) controls.push_back(ir.return_var);

  SymState init;
  for (const auto& p : ir.params) init.env[p] = AffineExpr::variable(p);
  SymbolicExecutor exec(ordered, options.path_cap);
  std::vector<SymState> leaves = exec.run(ir.body, {std::move(init)});
  if (leaves.empty()) throw NoFeasiblePath("no path of '" + ir.name + "' is feasible inside the input box");

  std::map<std::vector<Decision>, PathEntry> grouped;
  for (auto& leaf : leaves) {
    auto [it, fresh] = grouped.try_emplace(leaf.decisions);
    PathEntry& entry = it->second;
    if (fresh) {
      entry.decisions = leaf.decisions;
      for (const auto& cv : controls) {
        auto v = leaf.env.find(cv);
        if (v == leaf.env.end()) {
          throw UnsupportedConstruct("control variable '" + cv + "' is unassigned on a feasible path",
                                     SourceLoc{});
        }
        entry.function.outputs[cv] = v->second;
      }
    }
    entry.constraint.cells.push_back(std::move(leaf.cell));
  }
  // std::map orders decision sequences lexicographically, then-before-else:
  // the source order of branch leaves.
  std::vector<PathEntry> entries;
  int id = 1;
  for (auto& [key, entry] : grouped) {
    entry.constraint.path_id = id++;
    entries.push_back(std::move(entry));
  }
  if (entries.size() > options.path_cap) {
    throw PathExplosion("path count exceeds cap of " + std::to_string(options.path_cap));
  }
  return PathTable(ir.params, std::move(ordered), std::move(controls), std::move(entries),
                   std::move(exec.pruned));
}

namespace {

Rational eval_exact(const Expr& e, const std::map<std::string, Rational>& env) {
  switch (e.kind) {
    case Expr::Kind::Number: return e.value;
    case Expr::Kind::Variable: {
      auto it = env.find(e.name);
      if (it == env.end()) throw UnsupportedConstruct("use of unassigned variable '" + e.name + "'", e.loc);
      return it->second;
    }
    case Expr::Kind::Add: return eval_exact(e.args[0], env) + eval_exact(e.args[1], env);
    case Expr::Kind::Sub: return eval_exact(e.args[0], env) - eval_exact(e.args[1], env);
    case Expr::Kind::Neg: return -eval_exact(e.args[0], env);
    case Expr::Kind::Mul: return eval_exact(e.args[0], env) * eval_exact(e.args[1], env);
  }
  return 0;
}

bool eval_cond(const Condition& c, const std::map<std::string, Rational>& env) {
  switch (c.kind) {
    case Condition::Kind::Compare:
      return Atom{AffineExpr(), c.op}.holds(eval_exact(c.lhs, env) - eval_exact(c.rhs, env));
    case Condition::Kind::And:
      for (const auto& a : c.args) {
        if (!eval_cond(a, env)) return false;
      }
      return true;
    case Condition::Kind::Or:
      for (const auto& a : c.args) {
        if (eval_cond(a, env)) return true;
      }
      return false;
  }
  return false;
}

void run_block(const std::vector<Stmt>& body, Execution& ex) {
  for (const auto& stmt : body) {
    if (const auto* a = std::get_if<Assign>(&stmt.node)) {
      ex.env[a->target] = eval_exact(a->value, ex.env);
      continue;
    }
    const auto& branch = std::get<IfStmt>(stmt.node);
    const bool taken = eval_cond(branch.cond, ex.env);
    ex.decisions.push_back({branch.id, taken});
    run_block(taken ? branch.then_branch : branch.else_branch, ex);
  }
}

}  // namespace

Execution execute(const ControllerIR& ir, std::span<const double> y) {
  if (y.size() != ir.params.size()) throw OutOfDomain("input arity mismatch");
  Execution ex;
  for (std::size_t i = 0; i < y.size(); ++i) ex.env[ir.params[i]] = from_double(y[i]);
  run_block(ir.body, ex);
  return ex;
}

std::vector<double> interpret(const ControllerIR& ir, std::span<const double> y,
                              const std::vector<std::string>& control_vars) {
  Execution ex = execute(ir, y);
  std::vector<std::string> names = control_vars;
  if (names.empty()) names.push_back(ir.return_var);
  std::vector<double> out;
  for (const auto& n : names) {
    auto it = ex.env.find(n);
    if (it == ex.env.end()) throw OutOfDomain("control variable '" + n + "' unassigned on this input");
    out.push_back(to_double(it->second));
  }
  return out;
}

}  // namespace rampo
