#include "rampo/stl.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>

namespace rampo::stl {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_interval(int lo, int hi) {
  if (lo < 0) throw NegativeInterval("interval lower bound must be non-negative");
  if (hi != kEnd && hi < lo) {
    throw NegativeInterval("interval [" + std::to_string(lo) + "," + std::to_string(hi) + "] is empty");
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // Prefer the shortest representation that round-trips.
  for (int prec = 1; prec < 17; ++prec) {
    char shorter[40];
    std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
    if (std::strtod(shorter, nullptr) == v) return shorter;
  }
  return buf;
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  Formula parse_all() {
    Formula f = disj();
    skip_ws();
    if (pos_ != s_.size()) {
      if (s_.compare(pos_, 2, "->") == 0) fail("implication '->' is not supported; write !a | b");
      fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    }
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    int line = 1;
    int col = 1;
    for (std::size_t i = 0; i < pos_ && i < s_.size(); ++i) {
      if (s_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw SyntaxError(what, SourceLoc{line, col});
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool peek_char(char c) {
    skip_ws();
    return pos_ < s_.size() && s_[pos_] == c;
  }
  bool eat(char c) {
    if (!peek_char(c)) return false;
    ++pos_;
    return true;
  }
  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }
  // Temporal operator letter followed by '['.
  bool peek_temporal(char op) {
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != op) return false;
    std::size_t j = pos_ + 1;
    while (j < s_.size() && std::isspace(static_cast<unsigned char>(s_[j]))) ++j;
    return j < s_.size() && s_[j] == '[';
  }

  int bound_value(bool allow_end) {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    std::string word = s_.substr(start, pos_ - start);
    if (allow_end && (word == "end" || word == "inf")) return kEnd;
    if (word.empty() || !std::all_of(word.begin(), word.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      pos_ = start;
      fail("expected a non-negative integer step bound");
    }
    return std::stoi(word);
  }

  std::pair<int, int> interval() {
    expect('[');
    int lo = bound_value(false);
    expect(',');
    int hi = bound_value(true);
    expect(']');
    check_interval(lo, hi);
    return {lo, hi};
  }

  Formula disj() {
    std::vector<Formula> parts{conj()};
    while (peek_char('|')) {
      ++pos_;
      if (pos_ < s_.size() && s_[pos_] == '|') ++pos_;
      parts.push_back(conj());
    }
    return parts.size() == 1 ? std::move(parts[0]) : lor(std::move(parts));
  }

  Formula conj() {
    std::vector<Formula> parts{until_chain()};
    while (peek_char('&')) {
      ++pos_;
      if (pos_ < s_.size() && s_[pos_] == '&') ++pos_;
      parts.push_back(until_chain());
    }
    return parts.size() == 1 ? std::move(parts[0]) : land(std::move(parts));
  }

  Formula until_chain() {
    Formula lhs = base();
    while (peek_temporal('U')) {
      ++pos_;
      auto [lo, hi] = interval();
      Formula rhs = base();
      lhs = until(lo, hi, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  Formula base() {
    if (eat('!')) return lnot(base());
    if (peek_temporal('G')) {
      ++pos_;
      auto [lo, hi] = interval();
      return always(lo, hi, base());
    }
    if (peek_temporal('F')) {
      ++pos_;
      auto [lo, hi] = interval();
      return eventually(lo, hi, base());
    }
    if (peek_char('(')) {
      std::size_t save = pos_;
      try {
        ++pos_;
        Formula inner = disj();
        expect(')');
        skip_ws();
        if (!starts_arith_or_relop()) return inner;
      } catch (const SyntaxError&) {
      }
      pos_ = save;
    }
    return predicate();
  }

  bool starts_arith_or_relop() const {
    if (pos_ >= s_.size()) return false;
    char c = s_[pos_];
    return c == '<' || c == '>' || c == '+' || c == '-' || c == '*';
  }

  // Affine expression over channels, as (coeff, channel) map + constant.
  struct Lin {
    std::map<std::string, double> terms;
    double constant = 0.0;
    bool has_vars() const { return !terms.empty(); }
  };

  static Lin scale(Lin a, double k) {
    for (auto& [n, c] : a.terms) c *= k;
    a.constant *= k;
    return a;
  }
  static Lin add(Lin a, const Lin& b, double sign) {
    for (const auto& [n, c] : b.terms) a.terms[n] += sign * c;
    a.constant += sign * b.constant;
    return a;
  }

  Lin lin_expr() {
    Lin acc = lin_term();
    for (;;) {
      if (eat('+')) {
        acc = add(std::move(acc), lin_term(), 1.0);
      } else if (peek_char('-') && !(pos_ + 1 < s_.size() && s_[pos_ + 1] == '>')) {
        ++pos_;
        acc = add(std::move(acc), lin_term(), -1.0);
      } else {
        return acc;
      }
    }
  }

  Lin lin_term() {
    Lin acc = lin_unary();
    while (eat('*')) {
      Lin rhs = lin_unary();
      if (acc.has_vars() && rhs.has_vars()) fail("non-affine product of channels");
      acc = acc.has_vars() ? scale(std::move(acc), rhs.constant) : scale(std::move(rhs), acc.constant);
    }
    return acc;
  }

  Lin lin_unary() {
    if (eat('-')) return scale(lin_unary(), -1.0);
    if (eat('+')) return lin_unary();
    skip_ws();
    if (eat('(')) {
      Lin inner = lin_expr();
      expect(')');
      return inner;
    }
    if (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      double v = std::strtod(begin, &end);
      if (end == begin) fail("malformed number");
      pos_ += static_cast<std::size_t>(end - begin);
      Lin l;
      l.constant = v;
      return l;
    }
    if (pos_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
      std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      Lin l;
      l.terms[s_.substr(start, pos_ - start)] = 1.0;
      return l;
    }
    fail("expected an expression");
  }

  Formula predicate() {
    Lin lhs = lin_expr();
    skip_ws();
    Relop op;
    if (s_.compare(pos_, 2, "<=") == 0) {
      op = Relop::Le;
      pos_ += 2;
    } else if (s_.compare(pos_, 2, ">=") == 0) {
      op = Relop::Ge;
      pos_ += 2;
    } else if (pos_ < s_.size() && s_[pos_] == '<') {
      op = Relop::Lt;
      ++pos_;
    } else if (pos_ < s_.size() && s_[pos_] == '>') {
      op = Relop::Gt;
      ++pos_;
    } else {
      fail("expected a comparison operator");
    }
    Lin rhs = lin_expr();
    Lin diff = add(std::move(lhs), rhs, -1.0);
    Formula f;
    f.kind = Formula::Kind::Pred;
    for (const auto& [n, c] : diff.terms) {
      if (c != 0.0) f.pred.terms.emplace_back(c, n);
    }
    f.pred.constant = diff.constant;
    f.pred.op = op;
    return f;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Evaluation

std::vector<double> pred_signal(const Predicate& p, const Trace& tr) {
  std::vector<double> expr(tr.length(), p.constant);
  for (const auto& [c, name] : p.terms) {
    const auto& ch = tr.channel(name);
    if (ch.size() != tr.length()) throw UnknownChannel("channel '" + name + "' has the wrong length");
    for (std::size_t t = 0; t < expr.size(); ++t) expr[t] += c * ch[t];
  }
  const bool upper = p.op == Relop::Lt || p.op == Relop::Le;
  if (upper) {
    for (auto& v : expr) v = -v;
  }
  return expr;
}

std::size_t window_end(int hi, std::size_t t, std::size_t last) {
  if (hi == kEnd) return last;
  return std::min(last, t + static_cast<std::size_t>(hi));
}

}  // namespace

Formula pred(std::vector<std::pair<double, std::string>> terms, Relop op, double rhs) {
  Formula f;
  f.kind = Formula::Kind::Pred;
  f.pred.terms = std::move(terms);
  f.pred.constant = -rhs;
  f.pred.op = op;
  return f;
}

Formula channel_cmp(const std::string& channel, Relop op, double rhs) { return pred({{1.0, channel}}, op, rhs); }

Formula lnot(Formula f) {
  Formula n;
  n.kind = Formula::Kind::Not;
  n.args.push_back(std::move(f));
  return n;
}

Formula land(std::vector<Formula> fs) {
  Formula f;
  f.kind = Formula::Kind::And;
  f.args = std::move(fs);
  return f;
}

Formula lor(std::vector<Formula> fs) {
  Formula f;
  f.kind = Formula::Kind::Or;
  f.args = std::move(fs);
  return f;
}

Formula always(int lo, int hi, Formula g) {
  check_interval(lo, hi);
  Formula f;
  f.kind = Formula::Kind::Always;
  f.lo = lo;
  f.hi = hi;
  f.args.push_back(std::move(g));
  return f;
}

Formula eventually(int lo, int hi, Formula g) {
  check_interval(lo, hi);
  Formula f;
  f.kind = Formula::Kind::Eventually;
  f.lo = lo;
  f.hi = hi;
  f.args.push_back(std::move(g));
  return f;
}

Formula until(int lo, int hi, Formula lhs, Formula rhs) {
  check_interval(lo, hi);
  Formula f;
  f.kind = Formula::Kind::Until;
  f.lo = lo;
  f.hi = hi;
  f.args.push_back(std::move(lhs));
  f.args.push_back(std::move(rhs));
  return f;
}

Formula parse(const std::string& text) { return Parser(text).parse_all(); }

std::string to_string(const Formula& f) {
  auto interval = [](const Formula& g) {
    return "[" + std::to_string(g.lo) + "," + (g.hi == kEnd ? std::string("end") : std::to_string(g.hi)) + "]";
  };
  switch (f.kind) {
    case Formula::Kind::Pred: {
      std::string s;
      for (const auto& [c, name] : f.pred.terms) {
        if (s.empty()) {
          s = c == 1.0 ? name : c == -1.0 ? "-" + name : fmt(c) + "*" + name;
        } else {
          double mag = std::fabs(c);
          s += c < 0 ? " - " : " + ";
          s += mag == 1.0 ? name : fmt(mag) + "*" + name;
        }
      }
      if (s.empty()) s = "0";
      return "(" + s + " " + rampo::to_string(f.pred.op) + " " + fmt(-f.pred.constant) + ")";
    }
    case Formula::Kind::Not:
      return "!" + to_string(f.args[0]);
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      if (f.args.empty()) {
        // Empty conjunction is true, empty disjunction false.
        return f.kind == Formula::Kind::And ? "(0 < 1)" : "(1 < 0)";
      }
      std::string sep = f.kind == Formula::Kind::And ? " & " : " | ";
      std::string s = "(";
      for (std::size_t i = 0; i < f.args.size(); ++i) {
        if (i) s += sep;
        s += to_string(f.args[i]);
      }
      return s + ")";
    }
    case Formula::Kind::Always:
      return "G" + interval(f) + to_string(f.args[0]);
    case Formula::Kind::Eventually:
      return "F" + interval(f) + to_string(f.args[0]);
    case Formula::Kind::Until:
      return "(" + to_string(f.args[0]) + " U" + interval(f) + " " + to_string(f.args[1]) + ")";
  }
  return "";
}

Formula negate(const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::Pred: {
      Formula g = f;
      g.pred.op = rampo::negate(f.pred.op);
      return g;
    }
    case Formula::Kind::Not:
      return f.args[0];
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      std::vector<Formula> parts;
      parts.reserve(f.args.size());
      for (const auto& a : f.args) parts.push_back(negate(a));
      return f.kind == Formula::Kind::And ? lor(std::move(parts)) : land(std::move(parts));
    }
    case Formula::Kind::Always:
      return eventually(f.lo, f.hi, negate(f.args[0]));
    case Formula::Kind::Eventually:
      return always(f.lo, f.hi, negate(f.args[0]));
    case Formula::Kind::Until:
      return lnot(f);
  }
  return f;
}

std::set<std::string> channels(const Formula& f) {
  std::set<std::string> out;
  if (f.kind == Formula::Kind::Pred) {
    for (const auto& [c, name] : f.pred.terms) out.insert(name);
  }
  for (const auto& a : f.args) {
    auto sub = channels(a);
    out.insert(sub.begin(), sub.end());
  }
  return out;
}

std::vector<double> robustness_signal(const Formula& f, const Trace& tr) {
  const std::size_t n = tr.length();
  const std::size_t last = n - 1;
  switch (f.kind) {
    case Formula::Kind::Pred:
      return pred_signal(f.pred, tr);
    case Formula::Kind::Not: {
      auto r = robustness_signal(f.args[0], tr);
      for (auto& v : r) v = -v;
      return r;
    }
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      const bool is_and = f.kind == Formula::Kind::And;
      std::vector<double> acc(n, is_and ? kInf : -kInf);
      for (const auto& a : f.args) {
        auto r = robustness_signal(a, tr);
        for (std::size_t t = 0; t < n; ++t) acc[t] = is_and ? std::min(acc[t], r[t]) : std::max(acc[t], r[t]);
      }
      return acc;
    }
    case Formula::Kind::Always:
    case Formula::Kind::Eventually: {
      const bool is_g = f.kind == Formula::Kind::Always;
      auto r = robustness_signal(f.args[0], tr);
      std::vector<double> out(n, is_g ? kInf : -kInf);
      for (std::size_t t = 0; t < n; ++t) {
        std::size_t from = t + static_cast<std::size_t>(f.lo);
        std::size_t to = window_end(f.hi, t, last);
        for (std::size_t s = from; s <= to && s <= last; ++s) {
          out[t] = is_g ? std::min(out[t], r[s]) : std::max(out[t], r[s]);
        }
      }
      return out;
    }
    case Formula::Kind::Until: {
      auto r1 = robustness_signal(f.args[0], tr);
      auto r2 = robustness_signal(f.args[1], tr);
      std::vector<double> out(n, -kInf);
      for (std::size_t t = 0; t < n; ++t) {
        double prefix = kInf;  // min of r1 over [t, t')
        std::size_t to = window_end(f.hi, t, last);
        for (std::size_t tp = t; tp <= to; ++tp) {
          if (tp >= t + static_cast<std::size_t>(f.lo)) out[t] = std::max(out[t], std::min(r2[tp], prefix));
          prefix = std::min(prefix, r1[tp]);
        }
      }
      return out;
    }
  }
  return {};
}

double robustness(const Formula& f, const Trace& tr) { return robustness_signal(f, tr).front(); }

namespace {

std::vector<bool> sat_signal(const Formula& f, const Trace& tr) {
  const std::size_t n = tr.length();
  const std::size_t last = n - 1;
  switch (f.kind) {
    case Formula::Kind::Pred: {
      std::vector<double> expr(n, f.pred.constant);
      for (const auto& [c, name] : f.pred.terms) {
        const auto& ch = tr.channel(name);
        for (std::size_t t = 0; t < n; ++t) expr[t] += c * ch[t];
      }
      std::vector<bool> out(n);
      for (std::size_t t = 0; t < n; ++t) {
        switch (f.pred.op) {
          case Relop::Lt: out[t] = expr[t] < 0.0; break;
          case Relop::Le: out[t] = expr[t] <= 0.0; break;
          case Relop::Gt: out[t] = expr[t] > 0.0; break;
          case Relop::Ge: out[t] = expr[t] >= 0.0; break;
        }
      }
      return out;
    }
    case Formula::Kind::Not: {
      auto r = sat_signal(f.args[0], tr);
      r.flip();
      return r;
    }
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      const bool is_and = f.kind == Formula::Kind::And;
      std::vector<bool> acc(n, is_and);
      for (const auto& a : f.args) {
        auto r = sat_signal(a, tr);
        for (std::size_t t = 0; t < n; ++t) acc[t] = is_and ? (acc[t] && r[t]) : (acc[t] || r[t]);
      }
      return acc;
    }
    case Formula::Kind::Always:
    case Formula::Kind::Eventually: {
      const bool is_g = f.kind == Formula::Kind::Always;
      auto r = sat_signal(f.args[0], tr);
      std::vector<bool> out(n, is_g);
      for (std::size_t t = 0; t < n; ++t) {
        std::size_t to = window_end(f.hi, t, last);
        for (std::size_t s = t + static_cast<std::size_t>(f.lo); s <= to && s <= last; ++s) {
          if (is_g && !r[s]) out[t] = false;
          if (!is_g && r[s]) out[t] = true;
        }
      }
      return out;
    }
    case Formula::Kind::Until: {
      auto r1 = sat_signal(f.args[0], tr);
      auto r2 = sat_signal(f.args[1], tr);
      std::vector<bool> out(n, false);
      for (std::size_t t = 0; t < n; ++t) {
        bool prefix = true;
        std::size_t to = window_end(f.hi, t, last);
        for (std::size_t tp = t; tp <= to && !out[t]; ++tp) {
          if (tp >= t + static_cast<std::size_t>(f.lo) && prefix && r2[tp]) out[t] = true;
          prefix = prefix && r1[tp];
        }
      }
      return out;
    }
  }
  return {};
}

}  // namespace

bool satisfied(const Formula& f, const Trace& tr) { return sat_signal(f, tr).front(); }

std::size_t size(const Formula& f) {
  std::size_t n = 1;
  for (const auto& a : f.args) n += size(a);
  return n;
}

}  // namespace rampo::stl
