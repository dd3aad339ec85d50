#include "rampo/affine.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace rampo {

Relop negate(Relop op) {
  switch (op) {
    case Relop::Lt: return Relop::Ge;
    case Relop::Le: return Relop::Gt;
    case Relop::Gt: return Relop::Le;
    case Relop::Ge: return Relop::Lt;
  }
  return op;
}

Relop mirror(Relop op) {
  switch (op) {
    case Relop::Lt: return Relop::Gt;
    case Relop::Le: return Relop::Ge;
    case Relop::Gt: return Relop::Lt;
    case Relop::Ge: return Relop::Le;
  }
  return op;
}

bool is_strict(Relop op) { return op == Relop::Lt || op == Relop::Gt; }

const char* to_string(Relop op) {
  switch (op) {
    case Relop::Lt: return "<";
    case Relop::Le: return "<=";
    case Relop::Gt: return ">";
    case Relop::Ge: return ">=";
  }
  return "?";
}

AffineExpr AffineExpr::variable(const std::string& name) {
  AffineExpr e;
  e.coeffs_[name] = 1;
  return e;
}

Rational AffineExpr::coeff(const std::string& name) const {
  auto it = coeffs_.find(name);
  return it == coeffs_.end() ? Rational(0) : it->second;
}

void AffineExpr::prune(const std::string& name) {
  auto it = coeffs_.find(name);
  if (it != coeffs_.end() && it->second == 0) coeffs_.erase(it);
}

AffineExpr& AffineExpr::operator+=(const AffineExpr& rhs) {
  for (const auto& [name, c] : rhs.coeffs_) {
    coeffs_[name] += c;
    prune(name);
  }
  constant_ += rhs.constant_;
  return *this;
}

AffineExpr& AffineExpr::operator-=(const AffineExpr& rhs) {
  for (const auto& [name, c] : rhs.coeffs_) {
    coeffs_[name] -= c;
    prune(name);
  }
  constant_ -= rhs.constant_;
  return *this;
}

AffineExpr& AffineExpr::operator*=(const Rational& k) {
  if (k == 0) {
    coeffs_.clear();
    constant_ = 0;
    return *this;
  }
  for (auto& [name, c] : coeffs_) c *= k;
  constant_ *= k;
  return *this;
}

AffineExpr AffineExpr::operator-() const {
  AffineExpr e = *this;
  e *= Rational(-1);
  return e;
}

Rational AffineExpr::evaluate(const std::map<std::string, Rational>& point) const {
  Rational acc = constant_;
  for (const auto& [name, c] : coeffs_) acc += c * point.at(name);
  return acc;
}

AffineExpr AffineExpr::substitute(const std::map<std::string, AffineExpr>& env) const {
  AffineExpr out(constant_);
  for (const auto& [name, c] : coeffs_) {
    auto it = env.find(name);
    if (it == env.end()) {
      out += AffineExpr::variable(name) * c;
    } else {
      out += it->second * c;
    }
  }
  return out;
}

std::string AffineExpr::to_string() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& [name, c] : coeffs_) {
    Rational mag = abs(c);
    if (first) {
      if (c < 0) os << "-";
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    if (mag != 1) os << to_decimal_string(mag) << "*";
    os << name;
    first = false;
  }
  if (first) {
    os << to_decimal_string(constant_);
  } else if (constant_ != 0) {
    os << (constant_ < 0 ? " - " : " + ") << to_decimal_string(abs(constant_));
  }
  return os.str();
}

bool Atom::holds(const Rational& value) const {
  switch (op) {
    case Relop::Lt: return value < 0;
    case Relop::Le: return value <= 0;
    case Relop::Gt: return value > 0;
    case Relop::Ge: return value >= 0;
  }
  return false;
}

std::string Atom::to_string() const {
  return expr.to_string() + " " + rampo::to_string(op) + " 0";
}

DenseAffine DenseAffine::from(const AffineExpr& e, std::span<const std::string> vars) {
  DenseAffine d;
  d.coeffs.assign(vars.size(), Rational(0));
  d.constant = e.constant();
  for (const auto& [name, c] : e.coeffs()) {
    auto it = std::find(vars.begin(), vars.end(), name);
    if (it == vars.end()) throw std::out_of_range("variable not in order: " + name);
    d.coeffs[static_cast<std::size_t>(it - vars.begin())] = c;
  }
  return d;
}

Rational DenseAffine::evaluate(std::span<const Rational> point) const {
  Rational acc = constant;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (coeffs[i] != 0) acc += coeffs[i] * point[i];
  }
  return acc;
}

}  // namespace rampo
