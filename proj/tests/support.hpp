#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "rampo/controller.hpp"
#include "rampo/plant.hpp"

namespace rampo::test {

inline std::string read_case(const std::string& name) {
  std::ifstream in(std::string(RAMPO_CASES_DIR) + "/" + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline VarBound bound(const std::string& name, const char* lo, const char* hi) {
  return {name, parse_decimal(lo), parse_decimal(hi)};
}

inline ControllerIR load_ir(const std::string& name) { return parse_controller({read_case(name), "control"}); }

struct CaseLoop {
  std::shared_ptr<const ControllerIR> ir;
  std::shared_ptr<const PathTable> table;
};

inline CaseLoop load_case(const std::string& name, const Box& box) {
  auto ir = std::make_shared<const ControllerIR>(load_ir(name));
  auto table = std::make_shared<const PathTable>(extract_paths(*ir, box));
  return {ir, table};
}

inline CaseLoop drone_case() { return load_case("drone.c", {bound("x1", "-3", "3")}); }
inline CaseLoop engine_case() {
  return load_case("engine.c", {bound("RPM", "0", "6000"), bound("Speed", "0", "150")});
}
inline CaseLoop three_path_case() {
  return load_case("three_path.c", {bound("y1", "-2", "2"), bound("y2", "-2", "2")});
}

}  // namespace rampo::test
