#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "rampo/rational.hpp"

namespace rampo {

enum class Relop { Lt, Le, Gt, Ge };

Relop negate(Relop op);
Relop mirror(Relop op);  // a op b  <=>  b mirror(op) a
bool is_strict(Relop op);
const char* to_string(Relop op);

// sum(coeffs[v] * v) + constant, with exact rational coefficients.
class AffineExpr {
 public:
  AffineExpr() = default;
  explicit AffineExpr(Rational constant) : constant_(std::move(constant)) {}
  static AffineExpr variable(const std::string& name);

  const std::map<std::string, Rational>& coeffs() const { return coeffs_; }
  const Rational& constant() const { return constant_; }
  Rational coeff(const std::string& name) const;
  bool is_constant() const { return coeffs_.empty(); }

  AffineExpr& operator+=(const AffineExpr& rhs);
  AffineExpr& operator-=(const AffineExpr& rhs);
  AffineExpr& operator*=(const Rational& k);
  friend AffineExpr operator+(AffineExpr a, const AffineExpr& b) { return a += b; }
  friend AffineExpr operator-(AffineExpr a, const AffineExpr& b) { return a -= b; }
  friend AffineExpr operator*(AffineExpr a, const Rational& k) { return a *= k; }
  AffineExpr operator-() const;

  bool operator==(const AffineExpr& rhs) const {
    return constant_ == rhs.constant_ && coeffs_ == rhs.coeffs_;
  }

  // Throws std::out_of_range if a referenced variable is missing.
  Rational evaluate(const std::map<std::string, Rational>& point) const;

  // Replace each variable by the expression bound to it; unbound variables stay.
  AffineExpr substitute(const std::map<std::string, AffineExpr>& env) const;

  std::string to_string() const;

 private:
  void prune(const std::string& name);

  std::map<std::string, Rational> coeffs_;
  Rational constant_{0};
};

// expr op 0
struct Atom {
  AffineExpr expr;
  Relop op = Relop::Le;

  Atom negated() const { return Atom{expr, rampo::negate(op)}; }
  bool holds(const Rational& value) const;
  bool holds(const std::map<std::string, Rational>& point) const {
    return holds(expr.evaluate(point));
  }
  bool operator==(const Atom& rhs) const { return op == rhs.op && expr == rhs.expr; }
  std::string to_string() const;
};

// Same expression over a fixed variable order, for hot evaluation loops.
struct DenseAffine {
  std::vector<Rational> coeffs;
  Rational constant;

  static DenseAffine from(const AffineExpr& e, std::span<const std::string> vars);
  Rational evaluate(std::span<const Rational> point) const;
};

}  // namespace rampo
