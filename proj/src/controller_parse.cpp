#include <cctype>
#include <set>

#include "rampo/controller.hpp"

namespace rampo {
namespace {

enum class Tok { Ident, Number, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourceLoc loc;
};

std::vector<Token> lex(const std::string& text) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    if (c == '/' && i + 1 < text.size() && text[i + 1] == '*') {
      SourceLoc start{line, col};
      advance(2);
      while (i + 1 < text.size() && !(text[i] == '*' && text[i + 1] == '/')) advance(1);
      if (i + 1 >= text.size()) throw SyntaxError("unterminated comment", start);
      advance(2);
      continue;
    }
    SourceLoc loc{line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
      out.push_back({Tok::Ident, text.substr(i, j - i), loc});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
      std::size_t j = i;
      while (j < text.size() && (std::isdigit(static_cast<unsigned char>(text[j])) || text[j] == '.')) ++j;
      if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
        if (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) {
          j = k;
          while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
        }
      }
      std::string lit = text.substr(i, j - i);
      // C-style float suffix.
      if (j < text.size() && (text[j] == 'f' || text[j] == 'F')) ++j;
      out.push_back({Tok::Number, lit, loc});
      advance(j - i);
      continue;
    }
    static const char* two[] = {"&&", "||", "<=", ">=", "==", "!=", "+=", "-=", "*=", "/=", "++", "--"};
    bool matched = false;
    for (const char* t : two) {
      if (text.compare(i, 2, t) == 0) {
        out.push_back({Tok::Punct, t, loc});
        advance(2);
        matched = true;
        break;
      }
    }
    if (matched) continue;
    static const std::string one = "(){};,=<>+-*/%!&|[]?:";
    if (one.find(c) == std::string::npos) {
      throw SyntaxError(std::string("unexpected character '") + c + "'", loc);
    }
    out.push_back({Tok::Punct, std::string(1, c), loc});
    advance(1);
  }
  out.push_back({Tok::End, "", SourceLoc{line, col}});
  return out;
}

bool mentions_variable(const Expr& e) {
  if (e.kind == Expr::Kind::Variable) return true;
  for (const auto& a : e.args) {
    if (mentions_variable(a)) return true;
  }
  return false;
}

class Parser {
 public:
  Parser(std::vector<Token> toks, std::string entry) : toks_(std::move(toks)), entry_(std::move(entry)) {}

  ControllerIR program() {
    ControllerIR ir;
    if (peek().kind == Tok::End) throw SyntaxError("empty program", peek().loc);
    expect_keyword("double");
    const Token& name = expect(Tok::Ident, "function name");
    ir.name = name.text;
    if (ir.name != entry_) {
      throw SyntaxError("expected entry function '" + entry_ + "', found '" + ir.name + "'", name.loc);
    }
    expect_punct("(");
    if (!is_punct(")")) {
      for (;;) {
        expect_keyword("double");
        const Token& p = expect(Tok::Ident, "parameter name");
        for (const auto& seen : ir.params) {
          if (seen == p.text) throw SyntaxError("duplicate parameter '" + p.text + "'", p.loc);
        }
        ir.params.push_back(p.text);
        if (!is_punct(",")) break;
        next();
      }
    }
    expect_punct(")");
    expect_punct("{");
    while (!is_keyword("return")) {
      if (peek().kind == Tok::End || is_punct("}")) {
        throw SyntaxError("missing return statement", peek().loc);
      }
      statement(ir.body);
    }
    next();
    const Token& ret = expect(Tok::Ident, "returned variable");
    ir.return_var = ret.text;
    expect_punct(";");
    if (!is_punct("}")) {
      throw UnsupportedConstruct("statements after return", peek().loc);
    }
    next();
    if (peek().kind != Tok::End) {
      if (is_keyword("double")) throw UnsupportedConstruct("more than one function", peek().loc);
      throw SyntaxError("unexpected '" + peek().text + "' after function body", peek().loc);
    }
    ir.if_count = if_count_;
    return ir;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool is_punct(const char* p, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Punct && peek(ahead).text == p;
  }
  bool is_keyword(const char* k) const { return peek().kind == Tok::Ident && peek().text == k; }

  [[noreturn]] void fail(const std::string& expected) const {
    const Token& t = peek();
    std::string got = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw SyntaxError("expected " + expected + ", got " + got, t.loc);
  }
  const Token& expect(Tok kind, const std::string& what) {
    if (peek().kind != kind) fail(what);
    return next();
  }
  void expect_punct(const char* p) {
    if (!is_punct(p)) fail(std::string("'") + p + "'");
    next();
  }
  void expect_keyword(const char* k) {
    if (!is_keyword(k)) fail(std::string("'") + k + "'");
    next();
  }

  static bool reserved(const std::string& w) {
    static const std::set<std::string> words = {"if", "else", "return", "double", "for", "while",
                                                "do", "switch", "case", "goto", "break", "continue"};
    return words.count(w) > 0;
  }

  void reject_unsupported_statement() {
    const Token& t = peek();
    if (t.kind != Tok::Ident) return;
    static const std::set<std::string> loops = {"for", "while", "do"};
    if (loops.count(t.text)) throw UnsupportedConstruct("loop '" + t.text + "'", t.loc);
    if (t.text == "switch" || t.text == "goto" || t.text == "break" || t.text == "continue") {
      throw UnsupportedConstruct("'" + t.text + "' statement", t.loc);
    }
    if (t.text == "return") throw UnsupportedConstruct("return before end of function", t.loc);
    static const std::set<std::string> types = {"int", "float", "long", "short", "char", "unsigned",
                                                "signed", "bool", "void"};
    if (types.count(t.text)) throw UnsupportedConstruct("non-double type '" + t.text + "'", t.loc);
  }

  void statement(std::vector<Stmt>& out) {
    reject_unsupported_statement();
    if (is_punct("{")) {
      next();
      while (!is_punct("}")) {
        if (peek().kind == Tok::End) fail("'}'");
        statement(out);
      }
      next();
      return;
    }
    if (is_keyword("if")) {
      out.push_back(Stmt{if_statement()});
      return;
    }
    if (is_keyword("double")) {
      next();
      const Token& name = expect(Tok::Ident, "variable name");
      if (reserved(name.text)) throw SyntaxError("reserved word '" + name.text + "'", name.loc);
      if (is_punct("=")) {
        next();
        Expr value = expr();
        expect_punct(";");
        out.push_back(Stmt{Assign{name.text, std::move(value), name.loc}});
      } else {
        expect_punct(";");
      }
      return;
    }
    if (peek().kind == Tok::Ident && !reserved(peek().text)) {
      const Token& target = next();
      if (is_punct("(")) throw UnsupportedConstruct("function call '" + target.text + "'", target.loc);
      if (is_punct("[")) throw UnsupportedConstruct("array access", peek().loc);
      if (is_punct("+=") || is_punct("-=") || is_punct("*=") || is_punct("/=") || is_punct("++") ||
          is_punct("--")) {
        throw UnsupportedConstruct("compound assignment '" + peek().text + "'", peek().loc);
      }
      expect_punct("=");
      Expr value = expr();
      expect_punct(";");
      out.push_back(Stmt{Assign{target.text, std::move(value), target.loc}});
      return;
    }
    if (is_punct(";")) {
      next();
      return;
    }
    fail("statement");
  }

  IfStmt if_statement() {
    IfStmt s;
    s.loc = peek().loc;
    next();
    s.id = if_count_++;
    expect_punct("(");
    s.cond = condition();
    expect_punct(")");
    statement(s.then_branch);
    if (is_keyword("else")) {
      next();
      statement(s.else_branch);
    }
    return s;
  }

  Condition condition() {
    Condition lhs = conjunction();
    if (!is_punct("||")) return lhs;
    Condition out;
    out.kind = Condition::Kind::Or;
    out.loc = lhs.loc;
    out.args.push_back(std::move(lhs));
    while (is_punct("||")) {
      next();
      out.args.push_back(conjunction());
    }
    return out;
  }

  Condition conjunction() {
    Condition lhs = cond_atom();
    if (!is_punct("&&")) return lhs;
    Condition out;
    out.kind = Condition::Kind::And;
    out.loc = lhs.loc;
    out.args.push_back(std::move(lhs));
    while (is_punct("&&")) {
      next();
      out.args.push_back(cond_atom());
    }
    return out;
  }

  Condition cond_atom() {
    if (is_punct("!")) throw UnsupportedConstruct("logical negation '!'", peek().loc);
    if (is_punct("(")) {
      // Either a parenthesized condition or a comparison whose left side
      // starts with a parenthesized expression.
      std::size_t save = pos_;
      try {
        next();
        Condition inner = condition();
        expect_punct(")");
        if (!starts_continuation()) return inner;
      } catch (const SyntaxError&) {
      }
      pos_ = save;
    }
    Condition c;
    c.kind = Condition::Kind::Compare;
    c.loc = peek().loc;
    c.lhs = expr();
    const Token& op = peek();
    if (op.kind == Tok::Punct && (op.text == "==" || op.text == "!=")) {
      throw UnsupportedConstruct("equality comparison '" + op.text + "'", op.loc);
    }
    if (op.kind != Tok::Punct || (op.text != "<" && op.text != "<=" && op.text != ">" && op.text != ">=")) {
      fail("comparison operator");
    }
    next();
    c.op = op.text == "<" ? Relop::Lt : op.text == "<=" ? Relop::Le : op.text == ">" ? Relop::Gt : Relop::Ge;
    c.rhs = expr();
    return c;
  }

  bool starts_continuation() const {
    if (peek().kind != Tok::Punct) return false;
    static const std::set<std::string> ops = {"<", "<=", ">", ">=", "+", "-", "*", "/", "==", "!="};
    return ops.count(peek().text) > 0;
  }

  Expr expr() {
    Expr lhs = term();
    while (is_punct("+") || is_punct("-")) {
      const Token& op = next();
      Expr rhs = term();
      Expr e;
      e.kind = op.text == "+" ? Expr::Kind::Add : Expr::Kind::Sub;
      e.loc = op.loc;
      e.args.push_back(std::move(lhs));
      e.args.push_back(std::move(rhs));
      lhs = std::move(e);
    }
    return lhs;
  }

  Expr term() {
    Expr lhs = unary();
    for (;;) {
      if (is_punct("/") || is_punct("%")) {
        throw UnsupportedConstruct("operator '" + peek().text + "'", peek().loc);
      }
      if (!is_punct("*")) break;
      const Token& op = next();
      Expr rhs = unary();
      if (mentions_variable(lhs) && mentions_variable(rhs)) {
        throw UnsupportedConstruct("non-affine product of variables", op.loc);
      }
      Expr e;
      e.kind = Expr::Kind::Mul;
      e.loc = op.loc;
      e.args.push_back(std::move(lhs));
      e.args.push_back(std::move(rhs));
      lhs = std::move(e);
    }
    return lhs;
  }

  Expr unary() {
    if (is_punct("-")) {
      const Token& op = next();
      Expr e;
      e.kind = Expr::Kind::Neg;
      e.loc = op.loc;
      e.args.push_back(unary());
      return e;
    }
    if (is_punct("+")) {
      next();
      return unary();
    }
    return primary();
  }

  Expr primary() {
    const Token& t = peek();
    if (t.kind == Tok::Number) {
      next();
      Expr e;
      e.kind = Expr::Kind::Number;
      e.loc = t.loc;
      try {
        e.value = parse_decimal(t.text);
      } catch (const std::exception&) {
        throw SyntaxError("malformed number '" + t.text + "'", t.loc);
      }
      return e;
    }
    if (t.kind == Tok::Ident && !reserved(t.text)) {
      next();
      if (is_punct("(")) throw UnsupportedConstruct("function call '" + t.text + "'", t.loc);
      if (is_punct("[")) throw UnsupportedConstruct("array access", peek().loc);
      Expr e;
      e.kind = Expr::Kind::Variable;
      e.name = t.text;
      e.loc = t.loc;
      return e;
    }
    if (is_punct("(")) {
      next();
      Expr inner = expr();
      expect_punct(")");
      return inner;
    }
    if (t.kind == Tok::Punct && (t.text == "&" || t.text == "[" || t.text == "?")) {
      throw UnsupportedConstruct("operator '" + t.text + "'", t.loc);
    }
    fail("expression");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::string entry_;
  int if_count_ = 0;
};

}  // namespace

ControllerIR parse_controller(const ControllerSource& src) {
  Parser p(lex(src.text), src.entry.empty() ? "control" : src.entry);
  return p.program();
}

}  // namespace rampo
