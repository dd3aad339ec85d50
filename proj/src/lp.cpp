#include "rampo/lp.hpp"

#include <algorithm>
#include <optional>

#include "rampo/errors.hpp"

namespace rampo {
namespace detail {
namespace {

class Tableau {
 public:
  Tableau(const std::vector<std::vector<Rational>>& A, const std::vector<Rational>& b,
          std::size_t n)
      : n_(n), m_(b.size()), m_orig_(b.size()) {
    // Columns: [structural n | slack m | artificial m].
    cols_ = n_ + 2 * m_;
    rows_.assign(m_, std::vector<Rational>(cols_ + 1, Rational(0)));
    basis_.assign(m_, 0);
    for (std::size_t i = 0; i < m_; ++i) {
      auto& row = rows_[i];
      const bool flip = b[i] < 0;
      for (std::size_t j = 0; j < n_; ++j) row[j] = flip ? Rational(-A[i][j]) : A[i][j];
      row[n_ + i] = flip ? -1 : 1;
      row[cols_] = flip ? Rational(-b[i]) : b[i];
      if (flip) {
        row[n_ + m_ + i] = 1;
        basis_[i] = n_ + m_ + i;
      } else {
        basis_[i] = n_ + i;
      }
    }
    allowed_.assign(cols_, true);
  }

  bool is_artificial(std::size_t j) const { return j >= n_ + m_orig_; }

  // Returns false if unbounded.
  bool optimize(const std::vector<Rational>& cost) {
    load_objective(cost);
    for (;;) {
      std::optional<std::size_t> enter;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (allowed_[j] && obj_[j] < 0) {
          enter = j;
          break;
        }
      }
      if (!enter) return true;
      std::optional<std::size_t> leave;
      Rational best;
      for (std::size_t i = 0; i < m_; ++i) {
        const Rational& aij = rows_[i][*enter];
        if (aij <= 0) continue;
        Rational ratio = rows_[i][cols_] / aij;
        if (!leave || ratio < best || (ratio == best && basis_[i] < basis_[*leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (!leave) return false;
      pivot(*leave, *enter);
    }
  }

  const Rational& objective_value() const { return obj_[cols_]; }

  // After phase 1: pivot artificials out of the basis, drop redundant rows,
  // and forbid artificial columns from re-entering.
  void purge_artificials() {
    for (std::size_t i = 0; i < m_;) {
      if (!is_artificial(basis_[i])) {
        ++i;
        continue;
      }
      std::optional<std::size_t> col;
      for (std::size_t j = 0; j < n_ + m_orig_; ++j) {
        if (rows_[i][j] != 0) {
          col = j;
          break;
        }
      }
      if (col) {
        pivot(i, *col);
        ++i;
      } else {
        rows_.erase(rows_.begin() + static_cast<std::ptrdiff_t>(i));
        basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(i));
        --m_;
      }
    }
    for (std::size_t j = n_ + m_orig_; j < cols_; ++j) allowed_[j] = false;
  }

  std::vector<Rational> structural_values() const {
    std::vector<Rational> x(n_, Rational(0));
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) x[basis_[i]] = rows_[i][cols_];
    }
    return x;
  }

  std::size_t columns() const { return cols_; }

 private:
  // cost has one entry per column; we maximize cost.x.
  void load_objective(const std::vector<Rational>& cost) {
    obj_.assign(cols_ + 1, Rational(0));
    for (std::size_t j = 0; j < cols_; ++j) obj_[j] = -cost[j];
    for (std::size_t i = 0; i < m_; ++i) {
      const Rational f = obj_[basis_[i]];
      if (f == 0) continue;
      for (std::size_t j = 0; j <= cols_; ++j) obj_[j] -= f * rows_[i][j];
    }
  }

  void pivot(std::size_t r, std::size_t c) {
    auto& prow = rows_[r];
    const Rational p = prow[c];
    for (auto& v : prow) v /= p;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      const Rational f = rows_[i][c];
      if (f == 0) continue;
      for (std::size_t j = 0; j <= cols_; ++j) rows_[i][j] -= f * prow[j];
    }
    if (!obj_.empty()) {
      const Rational f = obj_[c];
      if (f != 0) {
        for (std::size_t j = 0; j <= cols_; ++j) obj_[j] -= f * prow[j];
      }
    }
    basis_[r] = c;
  }

  std::size_t n_;
  std::size_t m_;
  std::size_t m_orig_;
  std::size_t cols_ = 0;
  std::vector<std::vector<Rational>> rows_;
  std::vector<std::size_t> basis_;
  std::vector<Rational> obj_;
  std::vector<bool> allowed_;
};

}  // namespace

StandardResult solve_standard(const std::vector<std::vector<Rational>>& A,
                              const std::vector<Rational>& b,
                              const std::vector<Rational>& c) {
  const std::size_t n = c.size();
  const std::size_t m = b.size();
  Tableau t(A, b, n);

  bool need_phase1 = std::any_of(b.begin(), b.end(), [](const Rational& v) { return v < 0; });
  if (need_phase1) {
    std::vector<Rational> phase1(t.columns(), Rational(0));
    for (std::size_t j = n + m; j < t.columns(); ++j) phase1[j] = -1;
    t.optimize(phase1);
    if (t.objective_value() < 0) return {LpStatus::Infeasible, Rational(0), {}};
  }
  t.purge_artificials();

  std::vector<Rational> cost(t.columns(), Rational(0));
  std::copy(c.begin(), c.end(), cost.begin());
  if (!t.optimize(cost)) return {LpStatus::Unbounded, Rational(0), {}};
  return {LpStatus::Optimal, t.objective_value(), t.structural_values()};
}

}  // namespace detail

namespace {

// Shifted standard form over z = y - lo, z in [0, hi - lo].
struct StandardForm {
  std::vector<std::vector<Rational>> A;
  std::vector<Rational> b;
  std::vector<bool> strict;  // per row
  bool empty_box = false;
};

StandardForm build_rows(const std::vector<Atom>& atoms, const Box& box) {
  StandardForm sf;
  const std::size_t n = box.size();
  for (const auto& atom : atoms) {
    std::vector<Rational> row(n, Rational(0));
    Rational shift = atom.expr.constant();
    std::size_t seen = 0;
    for (std::size_t j = 0; j < n; ++j) {
      Rational a = atom.expr.coeff(box[j].name);
      if (a != 0) ++seen;
      row[j] = a;
      shift += a * box[j].lo;
    }
    if (seen != atom.expr.coeffs().size()) {
      throw InternalError("constraint references a variable outside the box: " + atom.to_string());
    }
    const bool upper = atom.op == Relop::Le || atom.op == Relop::Lt;
    if (!upper) {
      for (auto& v : row) v = -v;
    }
    sf.A.push_back(std::move(row));
    sf.b.push_back(upper ? Rational(-shift) : shift);
    sf.strict.push_back(is_strict(atom.op));
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (box[j].hi < box[j].lo) sf.empty_box = true;
    std::vector<Rational> row(n, Rational(0));
    row[j] = 1;
    sf.A.push_back(std::move(row));
    sf.b.push_back(box[j].hi - box[j].lo);
    sf.strict.push_back(false);
  }
  return sf;
}

}  // namespace

bool feasible(const std::vector<Atom>& atoms, const Box& box) {
  StandardForm sf = build_rows(atoms, box);
  if (sf.empty_box) return false;
  const bool any_strict = std::any_of(sf.strict.begin(), sf.strict.end(), [](bool s) { return s; });
  const std::size_t n = box.size();
  if (!any_strict) {
    auto r = detail::solve_standard(sf.A, sf.b, std::vector<Rational>(n, Rational(0)));
    return r.status == LpStatus::Optimal;
  }
  // Extra column eps: strict rows become a.z + eps <= b; maximize eps <= 1.
  for (std::size_t i = 0; i < sf.A.size(); ++i) sf.A[i].push_back(sf.strict[i] ? 1 : 0);
  std::vector<Rational> cap(n + 1, Rational(0));
  cap[n] = 1;
  sf.A.push_back(cap);
  sf.b.push_back(1);
  std::vector<Rational> c(n + 1, Rational(0));
  c[n] = 1;
  auto r = detail::solve_standard(sf.A, sf.b, c);
  return r.status == LpStatus::Optimal && r.value > 0;
}

LpSolution solve_lp(const LinearProgram& lp) {
  LpSolution out;
  StandardForm sf = build_rows(lp.constraints, lp.box);
  if (sf.empty_box) return out;
  const std::size_t n = lp.box.size();
  const bool maximize = lp.sense == Sense::Maximize;

  std::vector<Rational> c(n, Rational(0));
  Rational offset = lp.objective.constant();
  for (std::size_t j = 0; j < n; ++j) {
    Rational a = lp.objective.coeff(lp.box[j].name);
    offset += a * lp.box[j].lo;
    c[j] = maximize ? a : Rational(-a);
  }
  auto r = detail::solve_standard(sf.A, sf.b, c);
  out.status = r.status;
  if (r.status == LpStatus::Unbounded) {
    throw InternalError("linear program unbounded over a finite box");
  }
  if (r.status != LpStatus::Optimal) return out;

  out.optimum = (maximize ? r.value : Rational(-r.value)) + offset;
  for (std::size_t j = 0; j < n; ++j) out.witness[lp.box[j].name] = lp.box[j].lo + r.x[j];

  bool has_strict = std::any_of(lp.constraints.begin(), lp.constraints.end(),
                                [](const Atom& a) { return is_strict(a.op); });
  if (!has_strict) {
    out.attained = true;
  } else {
    std::vector<Atom> face = lp.constraints;
    AffineExpr level = lp.objective - AffineExpr(out.optimum);
    face.push_back({level, Relop::Le});
    face.push_back({level, Relop::Ge});
    out.attained = feasible(face, lp.box);
  }
  return out;
}

}  // namespace rampo
