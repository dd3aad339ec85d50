#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rampo/affine.hpp"
#include "rampo/trace.hpp"

namespace rampo::stl {

// Open upper end of a temporal interval: runs to the end of the trace.
inline constexpr int kEnd = -1;

// sum(coeff * channel) + constant  op  0
struct Predicate {
  std::vector<std::pair<double, std::string>> terms;
  double constant = 0.0;
  Relop op = Relop::Lt;
};

struct Formula {
  enum class Kind { Pred, Not, And, Or, Always, Eventually, Until };
  Kind kind = Kind::Pred;
  Predicate pred;
  std::vector<Formula> args;
  int lo = 0;
  int hi = kEnd;
};

// Constructors. Intervals are in steps; hi may be kEnd.
Formula pred(std::vector<std::pair<double, std::string>> terms, Relop op, double rhs);
Formula channel_cmp(const std::string& channel, Relop op, double rhs);
Formula lnot(Formula f);
Formula land(std::vector<Formula> fs);
Formula lor(std::vector<Formula> fs);
Formula always(int lo, int hi, Formula f);
Formula eventually(int lo, int hi, Formula f);
Formula until(int lo, int hi, Formula lhs, Formula rhs);

// Grammar:
//   f    := disj
//   disj := conj ('|' conj)*
//   conj := un ('&' un)*
//   un   := base ('U[' a ',' b ']' base)*
//   base := '!' base | 'G[' a ',' b ']' base | 'F[' a ',' b ']' base | '(' f ')' | pred
//   pred := affine relop affine    relop in < <= > >=
// b may be "end" (or "inf") for the end of the trace.
Formula parse(const std::string& text);

std::string to_string(const Formula& f);

// Structural negation: predicates flip, And/Or and G/F swap by duality,
// double negation cancels, Until is wrapped in Not.
Formula negate(const Formula& f);

std::set<std::string> channels(const Formula& f);

// Quantitative semantics at every step 0..H.
std::vector<double> robustness_signal(const Formula& f, const Trace& tr);
double robustness(const Formula& f, const Trace& tr);

// Boolean semantics at step 0.
bool satisfied(const Formula& f, const Trace& tr);

// Nodes in the tree.
std::size_t size(const Formula& f);

}  // namespace rampo::stl
