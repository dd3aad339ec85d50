#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "rampo/plant.hpp"
#include "support.hpp"

using namespace rampo;

namespace {

std::vector<std::vector<double>> constant_u(int rows, double v) { return std::vector<std::vector<double>>(rows, {v}); }

}  // namespace

TEST_CASE("plant: builtin models") {
  auto p = builtin_plant("integrator_chain", {{"n", 1}, {"dt", 0.1}});
  std::vector<double> x{0.0};
  std::vector<double> u{1.0};
  CHECK(p->step(x, u)[0] == doctest::Approx(0.1));

  auto chain2 = builtin_plant("integrator_chain", {{"n", 2}, {"dt", 0.1}});
  auto di = builtin_plant("double_integrator", {{"dt", 0.1}});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-5, 5);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> s{d(rng), d(rng)};
    std::vector<double> c{d(rng)};
    CHECK(chain2->step(s, c) == di->step(s, c));
    CHECK(chain2->output(s) == di->output(s));
  }

  auto eng = builtin_plant("engine_surrogate", {{"a", 2.0}, {"b", 0.5}});
  // a * Th = b * RPM keeps RPM fixed.
  std::vector<double> e{2000.0, 50.0};
  std::vector<double> th{500.0};
  CHECK(eng->step(e, th)[0] == 2000.0);
  CHECK(eng->state_names() == std::vector<std::string>{"RPM", "Speed"});

  CHECK_THROWS_AS(builtin_plant("pendulum"), UnknownPlant);
  CHECK_THROWS_AS(builtin_plant("double_integrator", {{"mass", 1.0}}), ConfigError);
  CHECK_THROWS_AS(builtin_plant("integrator_chain", {{"n", 0}}), ConfigError);
}

TEST_CASE("plant: simulate_open examples") {
  auto p = builtin_plant("integrator_chain", {{"n", 1}, {"dt", 0.1}});
  std::vector<double> x0{0.0};
  auto tr = simulate_open(*p, x0, 2, constant_u(2, 1.0));
  REQUIRE(tr.channel("x1").size() == 3);
  CHECK(tr.at("x1", 0) == 0.0);
  CHECK(tr.at("x1", 1) == doctest::Approx(0.1));
  CHECK(tr.at("x1", 2) == doctest::Approx(0.2));
  CHECK(tr.channel("u1").size() == 3);
  CHECK(tr.at("u1", 2) == 1.0);  // pad copies u_{H-1}
  CHECK(tr.channel("y1") == tr.channel("x1"));

  auto di = builtin_plant("double_integrator");
  std::vector<double> d0{0.5, 0.0};
  auto dt = simulate_open(*di, d0, 20, constant_u(20, 0.0));
  for (double v : dt.channel("pos")) CHECK(v == 0.5);

  auto chain = builtin_plant("integrator_chain", {{"n", 3}});
  std::vector<double> z{0, 0, 0};
  auto zt = simulate_open(*chain, z, 5, constant_u(5, 0.0));
  for (const auto& [name, values] : zt.channels) {
    for (double v : values) CHECK(v == 0.0);
  }

  // H+1 rows: the last row is u_H.
  auto padded = simulate_open(*p, x0, 2, {{1.0}, {1.0}, {7.0}});
  CHECK(padded.at("u1", 2) == 7.0);
  CHECK(padded.at("x1", 2) == tr.at("x1", 2));

  CHECK_THROWS_AS(simulate_open(*p, x0, 2, constant_u(4, 1.0)), ConfigError);
  auto coarse = builtin_plant("integrator_chain", {{"n", 1}, {"dt", 10.0}});
  std::vector<double> huge{1e308};
  CHECK_THROWS_AS(simulate_open(*coarse, huge, 2, constant_u(2, 1e308)), NonFiniteState);
}

TEST_CASE("plant: closed loop examples") {
  auto drone = test::drone_case();
  auto cl = make_closed_loop(builtin_plant("double_integrator"), drone.ir, drone.table);
  std::vector<double> x0{0.0, 0.0};
  auto tr = simulate_closed(cl, x0, 10);
  // y = 0 is inside (-0.5, 0.5): the interior u = 2*x1 + 9 path.
  const int p0 = tr.paths.at(0);
  std::vector<double> zero{0.0};
  CHECK(drone.table->evaluate(p0, zero)[0] == 9.0);
  CHECK(tr.at("u1", 0) == 9.0);

  auto engine = test::engine_case();
  auto ecl = make_closed_loop(builtin_plant("engine_surrogate"), engine.ir, engine.table);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> rpm(0, 3300), speed(0, 80);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> e0{rpm(rng), speed(rng)};
    CHECK(simulate_closed(ecl, e0, 3).paths.at(0) == 4);
  }

  auto three = test::three_path_case();
  CHECK_THROWS_AS(make_closed_loop(builtin_plant("double_integrator"), three.ir, three.table), ConfigError);
  auto full = builtin_plant("integrator_chain", {{"n", 2}, {"full_output", 1}});
  CHECK_NOTHROW(make_closed_loop(full, three.ir, three.table));
}

TEST_CASE("plant: property closed-loop consistency and determinism") {
  auto drone = test::drone_case();
  auto cl = make_closed_loop(builtin_plant("double_integrator", {{"dt", 0.1}}), drone.ir, drone.table);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> d(-1.5, 1.5);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> x0{d(rng), d(rng)};
    auto tr = simulate_closed(cl, x0, 15);
    CHECK(tr == simulate_closed(cl, x0, 15));
    for (int t = 0; t <= tr.horizon; ++t) {
      std::vector<double> y{tr.at("y1", t)};
      CHECK(tr.at("u1", t) == interpret(*drone.ir, y)[0]);
      if (std::fabs(y[0]) <= 3) CHECK(tr.paths[t] == drone.table->path_of(y));
    }
  }
}

TEST_CASE("plant: attack reduction and bounds") {
  auto engine = test::engine_case();
  AttackSpec spec;
  spec.channels = {{true, 0.02, true}, {true, 0.02, true}};
  auto plant = builtin_plant("engine_surrogate");
  auto clean = make_closed_loop(plant, engine.ir, engine.table);
  auto attacked = make_closed_loop(plant, engine.ir, engine.table, spec);
  AttackSpec zero_spec;
  zero_spec.channels = {{true, 0.0, false}, {true, 0.0, false}};
  auto zero = make_closed_loop(plant, engine.ir, engine.table, zero_spec);

  std::vector<double> x0{3000.0, 70.0};
  const int H = 8;
  std::vector<std::vector<double>> s0(H + 1, std::vector<double>(2, 0.0));
  auto base = simulate_closed(clean, x0, H);
  auto with_zero = simulate_closed(attacked, x0, H, s0);
  CHECK(with_zero.channels.at("RPM") == base.channels.at("RPM"));
  CHECK(with_zero.channels.at("u1") == base.channels.at("u1"));
  CHECK(with_zero.paths == base.paths);
  auto bound_zero = simulate_closed(zero, x0, H, s0);
  CHECK(bound_zero.channels.at("Speed") == base.channels.at("Speed"));

  auto big = s0;
  big[0][0] = 0.05 * 3000.0;
  CHECK_THROWS_AS(simulate_closed(attacked, x0, H, big), AttackBoundViolated);
  auto ok = s0;
  ok[0][0] = 0.02 * 3000.0;
  auto tr = simulate_closed(attacked, x0, H, ok);
  // The controller read RPM + 60 > 3300 at t = 0.
  CHECK(tr.paths.at(0) == engine.table->path_of(std::vector<double>{3060.0, 70.0}));
  CHECK(tr.at("s1", 0) == 60.0);
  CHECK_THROWS_AS(simulate_closed(clean, x0, H, ok), AttackBoundViolated);
}

TEST_CASE("plant: trace CSV round trip") {
  auto drone = test::drone_case();
  auto cl = make_closed_loop(builtin_plant("double_integrator"), drone.ir, drone.table);
  std::vector<double> x0{0.123456789, -0.3};
  auto tr = simulate_closed(cl, x0, 12);
  auto back = trace_from_csv(trace_to_csv(tr), tr.dt);
  CHECK(back == tr);
  auto json = trace_to_json(tr);
  CHECK(json.find("\"paths\"") != std::string::npos);
  CHECK_THROWS_AS(trace_from_csv("x,y\n1,2\n"), ConfigError);
}
