#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "rampo/stl.hpp"
#include "stl_oracle.hpp"

using namespace rampo;
namespace stl = rampo::stl;

namespace {

Trace single(const std::string& name, std::vector<double> values) {
  Trace tr;
  tr.horizon = static_cast<int>(values.size()) - 1;
  tr.channels[name] = std::move(values);
  return tr;
}

}  // namespace

TEST_CASE("stl parse examples") {
  auto g = stl::parse("G[0,50](pos < 0.98)");
  CHECK(g.kind == stl::Formula::Kind::Always);
  CHECK(g.lo == 0);
  CHECK(g.hi == 50);
  REQUIRE(g.args.size() == 1);
  CHECK(g.args[0].kind == stl::Formula::Kind::Pred);
  CHECK(g.args[0].pred.op == Relop::Lt);

  auto d = stl::parse("(Speed < 120) | (RPM < 4500)");
  CHECK(d.kind == stl::Formula::Kind::Or);
  REQUIRE(d.args.size() == 2);
  CHECK(d.args[0].kind == stl::Formula::Kind::Pred);
  CHECK(d.args[1].kind == stl::Formula::Kind::Pred);
  CHECK(stl::channels(d) == std::set<std::string>{"RPM", "Speed"});

  CHECK_THROWS_AS(stl::parse("G[3,1](x<0)"), NegativeInterval);
  CHECK_THROWS_AS(stl::always(3, 1, stl::channel_cmp("x", Relop::Lt, 0)), NegativeInterval);
  CHECK_THROWS_AS(stl::parse("(x < 0) -> (y < 0)"), SyntaxError);
  CHECK_THROWS_AS(stl::parse("G[0,2] (x * y < 1)"), SyntaxError);
  CHECK_THROWS_AS(stl::parse("x <"), SyntaxError);

  auto e = stl::parse("F[2,end] (2*a - b >= -1.5)");
  CHECK(e.kind == stl::Formula::Kind::Eventually);
  CHECK(e.hi == stl::kEnd);
}

TEST_CASE("stl robustness examples") {
  auto tr = single("pos", {0.5, 0.9, 0.97});
  CHECK(stl::robustness(stl::parse("G[0,2](pos<0.98)"), tr) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(stl::robustness(stl::parse("F[0,2](pos>=1)"), tr) == doctest::Approx(-0.03).epsilon(1e-12));

  auto x = single("x", {0.5, 0.2, -0.1});
  CHECK(stl::robustness(stl::parse("(x<1) U[0,2] (x<0)"), x) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("stl unknown channel") {
  auto tr = single("pos", {0.0, 1.0});
  CHECK_THROWS_AS(stl::robustness(stl::parse("G[0,1](vel < 1)"), tr), UnknownChannel);
}

TEST_CASE("stl window clipped at horizon") {
  auto tr = single("x", {0.0, 0.0, 5.0});
  // F[1,10] sees steps 1..2 only.
  CHECK(stl::robustness(stl::parse("F[1,10](x > 1)"), tr) == doctest::Approx(4.0));
  // Window past the end: empty, so G is vacuously true and F false.
  CHECK(stl::robustness(stl::parse("G[5,7](x > 1)"), tr) == std::numeric_limits<double>::infinity());
  CHECK(stl::robustness(stl::parse("F[5,7](x > 1)"), tr) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("stl to_string round trips") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    auto f = test::random_formula(rng, 3);
    auto text = stl::to_string(f);
    auto g = stl::parse(text);
    CHECK(stl::to_string(g) == text);
    auto tr = test::random_trace(rng, 8);
    CHECK(stl::robustness(g, tr) == stl::robustness(f, tr));
  }
}

TEST_CASE("stl property: robustness matches pointwise oracle") {
  std::mt19937_64 rng(20240611);
  for (int i = 0; i < 500; ++i) {
    auto f = test::random_formula(rng, 3);
    auto tr = test::random_trace(rng, 10);
    double got = stl::robustness(f, tr);
    double want = test::oracle_rob(f, tr, 0);
    INFO(stl::to_string(f));
    if (std::isinf(want)) {
      CHECK(got == want);
    } else {
      CHECK(std::fabs(got - want) <= 1e-9);
    }
    auto sig = stl::robustness_signal(f, tr);
    REQUIRE(sig.size() == tr.length());
    for (int t = 0; t <= tr.horizon; ++t) {
      double w = test::oracle_rob(f, tr, t);
      CHECK((std::isinf(w) ? sig[t] == w : std::fabs(sig[t] - w) <= 1e-9));
    }
    bool sat = stl::satisfied(f, tr);
    CHECK(sat == test::oracle_sat(f, tr, 0));
    // Strict sign soundness.
    if (got > 0) CHECK(sat);
    if (got < 0) CHECK_FALSE(sat);
  }
}

TEST_CASE("stl property: negation duality") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 300; ++i) {
    auto f = test::random_formula(rng, 3);
    auto tr = test::random_trace(rng, 10);
    double r = stl::robustness(f, tr);
    double n = stl::robustness(stl::negate(f), tr);
    CHECK(n == -r);
    CHECK(stl::robustness(stl::lnot(f), tr) == -r);
  }
}

TEST_CASE("stl property: monotonicity") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    auto tr = test::random_trace(rng, 10);
    auto p = stl::channel_cmp("a", Relop::Gt, val(rng));
    auto q = stl::channel_cmp("b", Relop::Lt, val(rng));
    int lo = std::uniform_int_distribution<int>(0, 3)(rng);
    int hi = lo + std::uniform_int_distribution<int>(0, 3)(rng);
    // Widening a G window can only lower robustness; widening F can only raise it.
    CHECK(stl::robustness(stl::always(lo, hi + 2, p), tr) <= stl::robustness(stl::always(lo, hi, p), tr));
    CHECK(stl::robustness(stl::eventually(lo, hi + 2, p), tr) >= stl::robustness(stl::eventually(lo, hi, p), tr));
    // Adding a conjunct lowers, adding a disjunct raises.
    CHECK(stl::robustness(stl::land({p, q}), tr) <= stl::robustness(p, tr));
    CHECK(stl::robustness(stl::lor({p, q}), tr) >= stl::robustness(p, tr));
    // Shifting the channel up raises robustness of a > predicate.
    Trace up = tr;
    for (auto& v : up.channels["a"]) v += 0.25;
    CHECK(stl::robustness(stl::always(lo, hi, p), up) >= stl::robustness(stl::always(lo, hi, p), tr));
  }
}
