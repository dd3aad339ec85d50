#include <cmath>

#include "doctest.h"
#include "rampo/cegar.hpp"
#include "support.hpp"

using namespace rampo;

namespace {

struct Toy {
  CegarProblem problem;
  CegarOptions options;
};

// One-input controller from source text, integrator chain plant.
Toy toy(const std::string& src, const char* lo, const char* hi, const std::string& safety, int H, double dt,
        std::vector<Interval> x0) {
  auto ir = std::make_shared<const ControllerIR>(parse_controller({src}));
  auto table = std::make_shared<const PathTable>(extract_paths(*ir, {test::bound(ir->params.at(0), lo, hi)}));
  Toy t;
  t.problem.plant = builtin_plant("integrator_chain", {{"n", 1}, {"dt", dt}});
  t.problem.controller = ir;
  t.problem.table = table;
  t.problem.ranges = path_ranges(*table);
  t.problem.safety = stl::parse(safety);
  t.problem.horizon = H;
  t.problem.x0_box = std::move(x0);
  t.options.falsify.grid = true;
  t.options.falsify.grid_spec = {3, 3, 3, 1'000'000};
  t.options.falsify_cap = 1000;
  return t;
}

CyberTrajectory traj(std::vector<int> ids) { return CyberTrajectory{std::move(ids)}; }

std::set<CyberTrajectory> explored_set(const RefineResult& r) {
  std::set<CyberTrajectory> s;
  for (const auto& e : r.explored) s.insert(e.trajectory);
  return s;
}

const char* kTwoPath = "double control(double y){ if (y < 0.25) { u = 0; } else { u = 1; } return u; }";
const char* kZero = "double control(double y){ if (y < 0) { u = 0; } else { u = 0; } return u; }";
const char* kPush = "double control(double y){ u = 1; return u; }";

}  // namespace

TEST_CASE("cegar: initial encoding") {
  auto drone = test::drone_case();
  auto ranges = path_ranges(*drone.table);
  auto safety = stl::parse("G[0,3](pos < 0.98)");
  auto enc = build_phi_initial(safety, ranges, 3);
  REQUIRE(enc.u_box.size() == 4);
  for (const auto& step : enc.u_box) CHECK(step == std::vector<Interval>{{-10, 10}});
  CHECK(stl::to_string(enc.target) == stl::to_string(stl::negate(safety)));
  CHECK(build_phi_initial(safety, ranges, 0).u_box.size() == 1);

  auto k1 = toy(kPush, "-5", "5", "G[0,end](x1 < 9)", 3, 0.1, {{0, 0}});
  auto enc1 = build_phi_initial(k1.problem.safety, k1.problem.ranges, 3);
  for (const auto& step : enc1.u_box) CHECK(step == std::vector<Interval>{{1, 1}});
}

TEST_CASE("cegar: exclusion encoding") {
  auto drone = test::drone_case();
  auto ranges = path_ranges(*drone.table);
  auto safety = stl::parse("G[0,3](pos < 0.98)");
  const int H = 3;
  auto empty = build_phi_exclusion(safety, ranges, {}, H);
  CHECK(stl::to_string(empty.target) == stl::to_string(build_phi_initial(safety, ranges, H).target));

  // A tube equal to the envelope leaves nothing to search.
  TrajectoryRange all(H + 1, std::vector<Interval>{{-10, 10}});
  auto none = build_phi_exclusion(safety, ranges, {all}, H);
  FalsifyModel model{builtin_plant("double_integrator"), std::nullopt, H, nullptr};
  SearchSpace space{{{0.9, 0.97}, {0, 1}}, none.u_box, std::nullopt};
  FalsifyOptions grid;
  grid.grid = true;
  CHECK_FALSE(falsify(model, none.phi(), space, grid).found);
  // Same search without the exclusion does find one.
  space.free_u = empty.u_box;
  CHECK(falsify(model, empty.phi(), space, grid).found);

  // Tube [-10, -8] at every step: u_1 = 9 escapes it at t = 1.
  TrajectoryRange low(H + 1, std::vector<Interval>{{-10, -8}});
  auto enc = build_phi_exclusion(stl::parse("G[0,3](pos < 100)"), ranges, {low}, H);
  Trace tr;
  tr.horizon = H;
  tr.channels["u1"] = {-9, 9, -9, -9};
  tr.channels["pos"] = {0, 0, 0, 0};
  REQUIRE(enc.target.kind == stl::Formula::Kind::And);
  CHECK(stl::robustness(enc.target.args[1], tr) > 0);
  tr.channels["u1"] = {-9, -9, -9, -9};
  CHECK(stl::robustness(enc.target.args[1], tr) < 0);
}

TEST_CASE("cegar: prefix encoding") {
  auto three = test::three_path_case();
  auto ranges = path_ranges(*three.table);
  auto safety = stl::parse("G[0,end](y1 < 5)");
  auto tube = tube_of(traj({1, 2}), ranges);
  auto enc = build_phi_prefix(safety, ranges, tube, 1, 3);
  CHECK(enc.u_box[0] == std::vector<Interval>{{-10, -8}});
  CHECK(enc.u_box[1] == std::vector<Interval>{{0, 0}});
  CHECK(enc.u_box[2] == std::vector<Interval>{{-14, 2}});
  auto keep0 = build_phi_prefix(safety, ranges, tube, 0, 3);
  CHECK(keep0.u_box[0] == std::vector<Interval>{{-10, -8}});
  CHECK(keep0.u_box[1] == std::vector<Interval>{{-14, 2}});
  CHECK_THROWS_AS(build_phi_prefix(safety, ranges, tube, 2, 3), ConfigError);
}

TEST_CASE("cegar: refine_linear examples") {
  SUBCASE("nothing falsifiable at any relaxation") {
    auto t = toy(kZero, "-2", "2", "G[0,end](x1 < 5)", 3, 0.5, {{-1, 1}});
    CegarSession s(t.problem, t.options);
    auto r = s.refine_linear(traj({1, 2, 1, 1}));
    CHECK(r.vulns.empty());
    CHECK(r.abstracts.empty());
    CHECK(explored_set(r) == std::set<CyberTrajectory>{traj({1, 2, 1, 1}), traj({1, 2, 1}), traj({1, 2}), traj({1})});
    CHECK(s.counters().falsifier_calls == 4);
  }
  SUBCASE("genuine closed-loop violation") {
    auto t = toy(kPush, "-5", "5", "G[0,end](x1 < 0.5)", 3, 0.5, {{0, 0.4}});
    CegarSession s(t.problem, t.options);
    auto r = s.refine_linear(traj({1, 1, 1, 1}));
    REQUIRE(r.vulns.size() == 1);
    CHECK(r.vulns[0].trajectory == traj({1, 1, 1, 1}));
    CHECK(r.vulns[0].robustness < 0);
    CHECK(r.abstracts.empty());
    CHECK(explored_set(r) == std::set<CyberTrajectory>{traj({1, 1, 1, 1})});
  }
  SUBCASE("spurious at keep = l, falsifiable at keep = l - 2") {
    auto t = toy(kTwoPath, "-1", "2", "G[0,end](x1 < 0.5)", 3, 1.0, {{0, 0}});
    CegarSession s(t.problem, t.options);
    auto r = s.refine_linear(traj({1, 1, 1, 1}));
    CHECK(r.vulns.empty());
    CHECK(r.abstracts == std::vector<CyberTrajectory>{traj({1, 1})});
    CHECK(explored_set(r) == std::set<CyberTrajectory>{traj({1, 1, 1, 1}), traj({1, 1, 1})});

    CegarSession b(t.problem, t.options);
    auto rb = b.refine_binary(traj({1, 1, 1, 1}));
    CHECK(rb.abstracts == r.abstracts);
    CHECK(explored_set(rb) == explored_set(r));
  }
}

TEST_CASE("cegar: refine_binary call counts") {
  SUBCASE("l = 1 is a single probe") {
    auto t = toy(kZero, "-2", "2", "G[0,end](x1 < 5)", 1, 0.5, {{-1, 1}});
    CegarSession lin(t.problem, t.options);
    CegarSession bin(t.problem, t.options);
    auto a = lin.refine_linear(traj({1, 1}));
    auto b = bin.refine_binary(traj({1, 1}));
    CHECK(explored_set(a) == explored_set(b));
    CHECK(lin.counters().falsifier_calls == bin.counters().falsifier_calls);
    CHECK(bin.counters().falsifier_calls == 2);
  }
  SUBCASE("all relaxations unfalsifiable") {
    const int H = 16;
    auto t = toy(kZero, "-2", "2", "G[0,end](x1 < 5)", H, 0.5, {{-1, 1}});
    t.options.falsify.grid_spec.u_points = 1;
    CegarSession lin(t.problem, t.options);
    CegarSession bin(t.problem, t.options);
    auto a = traj(std::vector<int>(H + 1, 1));
    lin.refine_linear(a);
    bin.refine_binary(a);
    CHECK(lin.counters().falsifier_calls == 1 + H);
    CHECK(bin.counters().falsifier_calls == 1 + 5);  // ceil(log2 16) + 1 probes
    CHECK(bin.counters().falsifier_calls < lin.counters().falsifier_calls);
  }
}

TEST_CASE("cegar: run examples") {
  SUBCASE("single path that cannot violate") {
    auto t = toy(kPush, "-5", "5", "G[0,end](x1 < 100)", 3, 0.1, {{0, 1}});
    auto rep = run(t.problem, t.options);
    CHECK(rep.vulns.empty());
    CHECK(rep.explored.size() == 1);
    CHECK(rep.counters.falsifier_calls >= 1);
    CHECK(rep.status == "frontier-exhausted");
  }
  SUBCASE("single path that violates") {
    auto t = toy(kPush, "-5", "5", "G[0,end](x1 < 0.5)", 3, 0.5, {{0, 0.4}});
    auto rep = run(t.problem, t.options);
    REQUIRE(rep.vulns.size() == 1);
    CHECK(rep.vulns[0].trajectory == traj({1, 1, 1, 1}));
    CHECK(rep.status == "frontier-exhausted");
  }
  SUBCASE("cap is honoured") {
    auto t = toy(kTwoPath, "-1", "2", "G[0,end](x1 < 0.5)", 3, 1.0, {{-0.5, 0.5}});
    t.options.falsify_cap = 2;
    auto rep = run(t.problem, t.options);
    CHECK(rep.counters.falsifier_calls <= 2);
    CHECK(rep.status == "budget-exhausted");
  }
}

TEST_CASE("cegar: property soundness of reported vulnerabilities") {
  auto drone = test::drone_case();
  CegarProblem p;
  p.plant = builtin_plant("double_integrator", {{"dt", 0.1}});
  p.controller = drone.ir;
  p.table = drone.table;
  p.ranges = path_ranges(*drone.table);
  p.safety = stl::parse("G[0,end](pos < 0.98)");
  p.horizon = 8;
  p.x0_box = {{-1, 1}, {-1, 1}};
  std::size_t total = 0;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    for (auto strat : {Strategy::Linear, Strategy::Binary}) {
      CegarOptions o;
      o.strategy = strat;
      o.falsify.budget = {60, 2};
      o.falsify.seed = seed;
      o.falsify_cap = 30;
      auto rep = run(p, o);
      CHECK(rep.counters.falsifier_calls <= 30);
      std::set<CyberTrajectory> ids;
      for (const auto& v : rep.vulns) {
        CHECK(ids.insert(v.trajectory).second);
        auto cl = make_closed_loop(p.plant, p.controller, p.table);
        std::vector<double> x0(v.decision.begin(), v.decision.begin() + 2);
        auto tr = simulate_closed(cl, x0, p.horizon);
        CHECK(tr == v.witness);
        CHECK(stl::robustness(p.safety, tr) < 0);
        CHECK(CyberTrajectory{tr.paths} == v.trajectory);
      }
      // Determinism.
      total += rep.vulns.size();
      auto again = run(p, o);
      CHECK(again.vulns.size() == rep.vulns.size());
      CHECK(again.counters.falsifier_calls == rep.counters.falsifier_calls);
    }
  }
  CHECK(total > 0);
}

TEST_CASE("cegar: partition baseline grows as parts^n") {
  auto drone = test::drone_case();
  for (int n = 1; n <= 3; ++n) {
    CegarProblem p;
    p.plant = builtin_plant("integrator_chain", {{"n", double(n)}, {"dt", 0.01}});
    p.controller = drone.ir;
    p.table = drone.table;
    p.safety = stl::parse("G[0,end](x1 < 0.98)");
    p.horizon = 4;
    p.x0_box = {{0.9, 1.1}};
    for (int i = 1; i < n; ++i) p.x0_box.push_back({-0.1, 0.1});
    FalsifyOptions o;
    o.budget = {20, 1};
    o.seed = 5;
    for (int parts : {2, 3}) {
      auto b = partition_baseline(p, parts, o);
      CHECK(b.falsifier_calls == static_cast<int>(std::pow(parts, n)));
      CHECK(!b.vulns.empty());
      auto again = partition_baseline(p, parts, o);
      CHECK(again.vulns == b.vulns);
    }
  }
  CegarProblem empty;
  CHECK_THROWS_AS(partition_baseline(empty, 0, {}), ConfigError);
}
