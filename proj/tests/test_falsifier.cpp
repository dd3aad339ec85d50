#include <cmath>
#include <random>

#include "doctest.h"
#include "rampo/falsifier.hpp"
#include "support.hpp"

using namespace rampo;

namespace {

SearchSpace open_space(std::vector<Interval> x0, int H, Interval u) {
  SearchSpace s;
  s.x0_box = std::move(x0);
  s.free_u.assign(static_cast<std::size_t>(H) + 1, {u});
  return s;
}

FalsifyOptions sa(int iters, int runs, std::uint64_t seed) {
  FalsifyOptions o;
  o.budget = {iters, runs};
  o.seed = seed;
  return o;
}

}  // namespace

TEST_CASE("falsifier: budget parsing") {
  CHECK(parse_budget("100x5") == Budget{100, 5});
  CHECK(parse_budget(" 20 x 3 ") == Budget{20, 3});
  CHECK(to_string(Budget{7, 2}) == "7x2");
  CHECK_THROWS_AS(parse_budget("100"), ConfigError);
  CHECK_THROWS_AS(parse_budget("0x5"), ConfigError);
  CHECK_THROWS_AS(parse_budget("5x-1"), ConfigError);
}

TEST_CASE("falsifier: unreachable and tautological requirements are not falsified") {
  const int H = 10;
  FalsifyModel model{builtin_plant("integrator_chain", {{"n", 2}}), std::nullopt, H, nullptr};
  auto space = open_space({{-1, 1}, {-1, 1}}, H, {-1, 1});
  // Reaching x1 > 1e9 is impossible, so "never reach it" cannot be violated.
  auto r1 = falsify(model, stl::parse("!F[0,end](x1 > 1e9)"), space, sa(100, 3, 1));
  CHECK_FALSE(r1.found);
  CHECK(r1.robustness > 0);
  auto r2 = falsify(model, stl::parse("G[0,end](x1 < x1 + 1)"), space, sa(100, 3, 1));
  CHECK_FALSE(r2.found);
  CHECK(r2.robustness == doctest::Approx(1.0));
  CHECK(r2.runs_used == 3);
}

TEST_CASE("falsifier: double integrator violates pos < 0.98 under free control") {
  const int H = 50;
  FalsifyModel model{builtin_plant("double_integrator", {{"dt", 0.1}}), std::nullopt, H, nullptr};
  auto space = open_space({{0, 0.1}, {0, 0.1}}, H, {-10, 10});
  auto phi = stl::parse("G[0,50](pos < 0.98)");
  auto r = falsify(model, phi, space, sa(200, 5, 42));
  REQUIRE(r.found);
  CHECK(r.robustness < 0);
  CHECK(stl::robustness(phi, r.trace) == r.robustness);

  // Closed-form check: constant u = 10 from rest reaches the threshold.
  std::vector<double> x0{0, 0};
  auto tr = simulate_open(*model.plant, x0, H, std::vector<std::vector<double>>(H, {10.0}));
  CHECK(stl::robustness(phi, tr) < 0);

  SUBCASE("replay reproduces the witness bit for bit") {
    auto again = realize(model, space, r.decision);
    CHECK(again == r.trace);
  }
  SUBCASE("seed determinism") {
    auto r2 = falsify(model, phi, space, sa(200, 5, 42));
    CHECK(r2.found == r.found);
    CHECK(r2.decision == r.decision);
    CHECK(r2.trace == r.trace);
    CHECK(r2.simulations == r.simulations);
  }
}

TEST_CASE("falsifier: property seed determinism and monotone budget") {
  const int H = 12;
  FalsifyModel model{builtin_plant("double_integrator", {{"dt", 0.1}}), std::nullopt, H, nullptr};
  auto space = open_space({{-0.5, 0.5}, {-0.5, 0.5}}, H, {-2, 2});
  for (double thr : {0.6, 0.9, 1.2}) {
    auto phi = stl::always(0, stl::kEnd, stl::channel_cmp("pos", Relop::Lt, thr));
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      auto small = falsify(model, phi, space, sa(20, 2, seed));
      auto again = falsify(model, phi, space, sa(20, 2, seed));
      CHECK(small.decision == again.decision);
      CHECK(small.objective == again.objective);
      auto big = falsify(model, phi, space, sa(60, 2, seed));
      if (small.found) CHECK(big.found);
      auto more_runs = falsify(model, phi, space, sa(20, 4, seed));
      if (small.found) CHECK(more_runs.found);
      if (small.found) CHECK(realize(model, space, small.decision) == small.trace);
    }
  }
}

TEST_CASE("falsifier: grid mode matches an independent lattice enumeration") {
  const int H = 3;
  FalsifyModel model{builtin_plant("integrator_chain", {{"n", 1}, {"dt", 0.5}}), std::nullopt, H, nullptr};
  auto space = open_space({{-1, 1}}, H, {-1, 1});
  FalsifyOptions grid;
  grid.grid = true;
  grid.grid_spec = {3, 3, 3, 100000};
  for (double thr : {0.5, 1.0, 2.0, 2.5, 3.0}) {
    auto phi = stl::always(0, stl::kEnd, stl::channel_cmp("x1", Relop::Lt, thr));
    auto r = falsify(model, phi, space, grid);
    // Oracle: every lattice point, same resolution.
    bool any = false;
    const double pts[] = {-1, 0, 1};
    for (double a : pts)
      for (double u0 : pts)
        for (double u1 : pts)
          for (double u2 : pts)
            for (double u3 : pts) {
              std::vector<double> x0{a};
              auto tr = simulate_open(*model.plant, x0, H, {{u0}, {u1}, {u2}, {u3}});
              any = any || stl::robustness(phi, tr) < 0;
            }
    CHECK(r.found == any);
    if (r.found) CHECK(realize(model, space, r.decision) == r.trace);
  }
  grid.grid_spec.max_points = 10;
  CHECK_THROWS_AS(falsify(model, stl::parse("G[0,end](x1 < 9)"), space, grid), ConfigError);
}

TEST_CASE("falsifier: channel mismatch") {
  FalsifyModel model{builtin_plant("double_integrator"), std::nullopt, 3, nullptr};
  auto space = open_space({{0, 0}, {0, 0}}, 3, {-1, 1});
  CHECK_THROWS_AS(falsify(model, stl::parse("G[0,3](RPM < 1)"), space, sa(5, 1, 0)), ChannelMismatch);
  CHECK_THROWS_AS(falsify(model, stl::parse("G[0,3](s1 < 1)"), space, sa(5, 1, 0)), ChannelMismatch);
}

TEST_CASE("falsifier: property box clipping agrees in sign with interval conjuncts") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> d(-1, 1);
  const int H = 6;
  auto plant = builtin_plant("double_integrator");
  for (int i = 0; i < 300; ++i) {
    double lo = d(rng) * 5 - 5, hi = lo + 1 + std::fabs(d(rng)) * 10;
    std::vector<std::vector<double>> u;
    std::uniform_real_distribution<double> inside(std::nextafter(lo, hi), std::nextafter(hi, lo));
    for (int t = 0; t <= H; ++t) u.push_back({inside(rng)});
    std::vector<double> x0{d(rng), d(rng)};
    auto tr = simulate_open(*plant, x0, H, u);
    auto target = stl::eventually(0, stl::kEnd, stl::channel_cmp("pos", Relop::Ge, d(rng)));
    auto conj = stl::land({target, stl::always(0, stl::kEnd, stl::land({stl::channel_cmp("u1", Relop::Ge, lo),
                                                                          stl::channel_cmp("u1", Relop::Le, hi)}))});
    double a = stl::robustness(target, tr);
    double b = stl::robustness(conj, tr);
    if (a != 0) CHECK((a < 0) == (b < 0));
  }
}

TEST_CASE("falsifier: closed loop with penalty and attack variables") {
  auto engine = test::engine_case();
  auto plant = builtin_plant("engine_surrogate");
  auto cl = make_closed_loop(plant, engine.ir, engine.table);
  const int H = 5;
  FalsifyModel model{plant, cl, H, nullptr};
  SearchSpace space;
  space.x0_box = {{2500, 3500}, {60, 90}};
  AttackSpec spec;
  spec.channels = {{true, 0.02, true}, {false, 0.0, false}};
  space.attack = spec;
  auto box = decision_box(model, space);
  CHECK(box.size() == 2 + (H + 1) * 2);
  CHECK(box[3] == Interval{0, 0});  // s2 disabled
  CHECK(box[2] == Interval{-1, 1});

  // Penalty forces p_0 = 4: a violation must stay on that path at t = 0.
  model.penalty = [](const Trace& tr) { return tr.paths.at(0) == 4 ? 0.0 : 1000.0; };
  auto phi = stl::parse("G[0,end](RPM < 1e6)");
  auto r = falsify(model, phi, space, sa(30, 2, 3));
  CHECK_FALSE(r.found);
  auto reach = stl::parse("G[0,end](RPM > 0)");
  auto r2 = falsify(model, stl::lnot(reach), space, sa(30, 2, 3));
  REQUIRE(r2.found);
  CHECK(r2.trace.paths.at(0) == 4);
  for (int t = 0; t <= H; ++t) CHECK(std::fabs(r2.trace.at("s1", t)) <= 0.02 * std::fabs(r2.trace.at("RPM", t)));
  CHECK(realize(model, space, r2.decision) == r2.trace);
  // Replay from the recorded s values through the plain closed loop.
  ClosedLoop attacked = cl;
  attacked.attack = spec;
  std::vector<std::vector<double>> s;
  for (int t = 0; t <= H; ++t) s.push_back({r2.trace.at("s1", t), r2.trace.at("s2", t)});
  std::vector<double> x0{r2.decision[0], r2.decision[1]};
  CHECK(simulate_closed(attacked, x0, H, s) == r2.trace);
}

TEST_CASE("falsifier: extract_path_sequence examples") {
  auto three = test::three_path_case();
  Trace tr;
  tr.horizon = 2;
  tr.channels["y1"] = {-0.7, -0.7, 0.0};
  tr.channels["y2"] = {0.3, -0.3, 5.0};
  auto ex = extract_path_sequence(tr, *three.table);
  CHECK(ex.trajectory.path_ids == std::vector<int>{1, 2, 3});
  CHECK(ex.clamped_steps == 1);  // y2 = 5 lies outside [-2, 2]
  CHECK(ex.trajectory.to_string() == "(1,2,3)");
  CHECK(ex.trajectory.prefix(1).path_ids == std::vector<int>{1, 2});

  Trace flat;
  flat.horizon = 4;
  flat.channels["y1"].assign(5, 1.5);
  flat.channels["y2"].assign(5, -1.0);
  CHECK(extract_path_sequence(flat, *three.table).trajectory.path_ids == std::vector<int>(5, 3));

  auto engine = test::engine_case();
  Trace e;
  e.horizon = 3;
  e.channels["y1"] = {4000, 3000, 3000, 3000};
  e.channels["y2"] = {100, 50, 50, 50};
  CHECK(extract_path_sequence(e, *engine.table).trajectory.path_ids == std::vector<int>{1, 4, 4, 4});
  // Attack channels shift the reading.
  e.channels["s1"] = {0, 400, 0, 0};
  e.channels["s2"] = {0, 0, 0, 0};
  CHECK(extract_path_sequence(e, *engine.table).trajectory.path_ids == std::vector<int>{1, 2, 4, 4});

  auto ranges = path_ranges(*three.table);
  Trace u = tr;
  u.channels["u1"] = {-9.0, 5.0, -6.0};
  CHECK(extract_path_sequence(u, *three.table, &ranges).out_of_range_steps == 1);
}
