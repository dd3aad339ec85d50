#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "rampo/controller.hpp"
#include "support.hpp"

using namespace rampo;
using rampo::test::bound;
using rampo::test::load_ir;

namespace {

int count_leaves(const std::vector<Stmt>& body) {
  // Leaves of the branch tree: product over sequential ifs of (then + else).
  int leaves = 1;
  for (const auto& s : body) {
    if (const auto* br = std::get_if<IfStmt>(&s.node)) {
      leaves *= count_leaves(br->then_branch) + count_leaves(br->else_branch);
    }
  }
  return leaves;
}

PathTable three_path_table() {
  return extract_paths(load_ir("three_path.c"), {bound("y1", "-2", "2"), bound("y2", "-2", "2")});
}

std::map<std::string, Rational> point(const std::vector<std::string>& names, const std::vector<double>& y) {
  std::map<std::string, Rational> m;
  for (std::size_t i = 0; i < names.size(); ++i) m[names[i]] = from_double(y[i]);
  return m;
}

}  // namespace

TEST_CASE("parse: three-path example has one if/else nest with three leaves") {
  ControllerIR ir = load_ir("three_path.c");
  CHECK(ir.params == std::vector<std::string>{"y1", "y2"});
  CHECK(ir.return_var == "u");
  CHECK(ir.body.size() == 1);
  CHECK(ir.if_count == 2);
  CHECK(count_leaves(ir.body) == 3);
}

TEST_CASE("parse: straight-line program has one leaf") {
  ControllerIR ir = parse_controller({"double control(double y){ u = 1.0; return u; }"});
  REQUIRE(ir.body.size() == 1);
  CHECK(std::holds_alternative<Assign>(ir.body[0].node));
  CHECK(count_leaves(ir.body) == 1);
}

TEST_CASE("parse: reassignment order is preserved") {
  ControllerIR ir = load_ir("drone.c");
  REQUIRE(ir.body.size() == 3);
  const auto& clamp = std::get<IfStmt>(ir.body[0].node);
  REQUIRE(clamp.then_branch.size() == 1);
  CHECK(std::get<Assign>(clamp.then_branch[0].node).target == "x1");
}

TEST_CASE("parse: unsupported constructs carry a location") {
  CHECK_THROWS_AS(parse_controller({"double control(double y){ u = y * y; return u; }"}),
                  UnsupportedConstruct);
  CHECK_THROWS_AS(parse_controller({"double control(double y){ while (y < 1) { y = y + 1; } return y; }"}),
                  UnsupportedConstruct);
  CHECK_THROWS_AS(parse_controller({"double control(double y){ u = f(y); return u; }"}), UnsupportedConstruct);
  CHECK_THROWS_AS(parse_controller({"double control(double y){ if (y == 0) u = 1; else u = 2; return u; }"}),
                  UnsupportedConstruct);
  CHECK_THROWS_AS(parse_controller({"double control(double y){ u = y / 2; return u; }"}), UnsupportedConstruct);
  try {
    parse_controller({"double control(double y){\n  u = y * y;\n  return u; }"});
    FAIL("expected UnsupportedConstruct");
  } catch (const UnsupportedConstruct& e) {
    CHECK(e.loc().line == 2);
  }
}

TEST_CASE("parse: syntax errors") {
  CHECK_THROWS_AS(parse_controller({""}), SyntaxError);
  CHECK_THROWS_AS(parse_controller({"double control(double y){ u = ; return u; }"}), SyntaxError);
  CHECK_THROWS_AS(parse_controller({"double control(double y){ u = 1; }"}), SyntaxError);
  CHECK_THROWS_AS(parse_controller({"double other(double y){ return y; }"}), SyntaxError);
  try {
    parse_controller({"double control(double y){\n  u = 1 $ 2;\n  return u; }"});
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.loc().line == 2);
    CHECK(e.loc().column == 9);
  }
}

TEST_CASE("parse: parenthesized expressions and conditions") {
  ControllerIR ir = parse_controller(
      {"double control(double a, double b){ if ((a + 1) * 2 < b || (a > 0 && b > 0)) u = 2 * (a - b); "
       "else u = -(a); return u; }"});
  PathTable t = extract_paths(ir, {bound("a", "-1", "1"), bound("b", "-1", "1")});
  CHECK(t.k() == 2);
  std::vector<double> y{0.5, 0.5};
  CHECK(t.path_of(y) == 1);
  CHECK(interpret(ir, y)[0] == 0.0);
}

TEST_CASE("extract_paths: three-path example") {
  PathTable t = three_path_table();
  REQUIRE(t.k() == 3);
  AffineExpr y1 = AffineExpr::variable("y1");
  CHECK(t.entry(1).function.outputs.at("u") == y1 * Rational(4) - AffineExpr(Rational(6)));
  CHECK(t.entry(2).function.outputs.at("u") == AffineExpr(Rational(0)));
  CHECK(t.entry(3).function.outputs.at("u") == y1 * Rational(-4) - AffineExpr(Rational(6)));
  // The else side of && splits into two short-circuit cells of one path.
  CHECK(t.entry(3).constraint.cells.size() == 2);
  CHECK(t.entry(1).constraint.cells.size() == 1);
}

TEST_CASE("extract_paths: engine controller has four paths") {
  PathTable t = extract_paths(load_ir("engine.c"), {bound("RPM", "0", "6000"), bound("Speed", "0", "150")});
  REQUIRE(t.k() == 4);
  std::vector<std::pair<double, double>> probes{{4000, 100}, {4000, 50}, {2000, 100}, {2000, 50}};
  for (int p = 1; p <= 4; ++p) {
    std::vector<double> y{probes[p - 1].first, probes[p - 1].second};
    CHECK(t.path_of(y) == p);
  }
}

TEST_CASE("extract_paths: drone controller prunes contradictory leaves") {
  ControllerIR ir = load_ir("drone.c");
  PathTable t = extract_paths(ir, {bound("x1", "-3", "3")});
  CHECK(t.k() == 5);
  CHECK_FALSE(t.pruned().empty());
  for (const auto& cell : t.pruned()) CHECK_FALSE(feasible(cell, t.box()));

  // Oracle: cluster concrete executions by branch sequence.
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  std::set<std::vector<Decision>> clusters;
  for (int i = 0; i < 100000; ++i) {
    std::vector<double> y{dist(rng)};
    clusters.insert(execute(ir, y).decisions);
  }
  CHECK(clusters.size() == 5);
  for (const auto& c : clusters) CHECK(t.find_by_decisions(c).has_value());

  // Clamp paths come first in source order and output -10.
  CHECK(t.entry(1).function.outputs.at("u") == AffineExpr(Rational(-10)));
  CHECK(t.entry(2).function.outputs.at("u") == AffineExpr(Rational(-10)));
}

TEST_CASE("path_of: three-path examples") {
  PathTable t = three_path_table();
  CHECK(t.path_of(std::vector<double>{-0.7, 0.3}) == 1);
  CHECK(t.path_of(std::vector<double>{-0.7, -0.3}) == 2);
  CHECK(t.path_of(std::vector<double>{0.0, 5.0}) == 3);
  // Boundary atoms are evaluated exactly as written.
  CHECK(t.path_of(std::vector<double>{-0.5, 0.0}) == 2);
  CHECK(t.path_of(std::vector<double>{-1.0, 1e-300}) == 1);
}

TEST_CASE("interpret: examples") {
  CHECK(interpret(load_ir("three_path.c"), std::vector<double>{-0.7, 0.3})[0] == -8.8);
  CHECK(interpret(load_ir("drone.c"), std::vector<double>{2.0})[0] == -10.0);
  CHECK(interpret(load_ir("engine.c"), std::vector<double>{3300, 80})[0] == 87.7);
}

TEST_CASE("partition and interpreter/table agreement") {
  struct Case {
    const char* file;
    Box box;
  };
  std::vector<Case> cases{
      {"three_path.c", {bound("y1", "-2", "2"), bound("y2", "-2", "2")}},
      {"drone.c", {bound("x1", "-3", "3")}},
      {"engine.c", {bound("RPM", "0", "6000"), bound("Speed", "0", "150")}},
  };
  std::mt19937_64 rng(99);
  for (const auto& c : cases) {
    ControllerIR ir = load_ir(c.file);
    PathTable t = extract_paths(ir, c.box);
    for (int i = 0; i < 10000; ++i) {
      std::vector<double> y;
      for (const auto& b : t.box()) {
        std::uniform_real_distribution<double> d(to_double(b.lo), to_double(b.hi));
        y.push_back(d(rng));
      }
      auto pt = point(t.input_vars(), y);
      int satisfied = 0;
      for (const auto& e : t.entries()) satisfied += e.constraint.holds(pt) ? 1 : 0;
      REQUIRE(satisfied == 1);
      int p = t.path_of(y);
      double table_u = to_double(t.entry(p).function.outputs.at(t.control_vars()[0]).evaluate(pt));
      CHECK(interpret(ir, y)[0] == table_u);
      CHECK(*t.find_by_decisions(execute(ir, y).decisions) == p);
    }
  }
}

TEST_CASE("extract_paths is deterministic") {
  ControllerIR ir = load_ir("drone.c");
  PathTable a = extract_paths(ir, {bound("x1", "-3", "3")});
  PathTable b = extract_paths(ir, {bound("x1", "-3", "3")});
  REQUIRE(a.k() == b.k());
  for (int p = 1; p <= a.k(); ++p) {
    CHECK(a.entry(p).decisions == b.entry(p).decisions);
    CHECK(a.entry(p).constraint.to_string() == b.entry(p).constraint.to_string());
  }
}

TEST_CASE("extract_paths: errors") {
  ControllerIR ir = load_ir("engine.c");
  ExtractOptions opts;
  opts.path_cap = 3;
  CHECK_THROWS_AS(extract_paths(ir, {bound("RPM", "0", "6000"), bound("Speed", "0", "150")}, opts),
                  PathExplosion);
  CHECK_THROWS_AS(extract_paths(ir, {bound("RPM", "0", "6000")}), ConfigError);
  ControllerIR partial = parse_controller({"double control(double y){ if (y > 0) u = 1; return u; }"});
  CHECK_THROWS_AS(extract_paths(partial, {bound("y", "-1", "1")}), UnsupportedConstruct);
  // The unassigned leaf is outside the box, so it is pruned.
  CHECK(extract_paths(partial, {bound("y", "0.5", "1")}).k() == 1);
}

TEST_CASE("path_of outside every constraint") {
  ControllerIR ir = parse_controller({"double control(double y){ if (y > 0) u = 1; else u = 2; return u; }"});
  PathTable t = extract_paths(ir, {bound("y", "0.5", "1")});
  CHECK(t.k() == 1);
  CHECK_THROWS_AS(t.path_of(std::vector<double>{-1.0}), OutOfDomain);
}
