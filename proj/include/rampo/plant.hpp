#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rampo/controller.hpp"
#include "rampo/errors.hpp"
#include "rampo/trace.hpp"

namespace rampo {

// x' = step(x, u), y = output(x). Implementations hold no mutable state.
class PlantModel {
 public:
  virtual ~PlantModel() = default;

  virtual std::string name() const = 0;
  virtual double dt() const = 0;
  // Names of the state channels in a trace; outputs are y1..yo, controls u1..um.
  virtual std::vector<std::string> state_names() const = 0;
  virtual int output_dim() const = 0;
  virtual int control_dim() const = 0;

  virtual std::vector<double> step(std::span<const double> x, std::span<const double> u) const = 0;
  virtual std::vector<double> output(std::span<const double> x) const = 0;

  int state_dim() const { return static_cast<int>(state_names().size()); }
};

using PlantPtr = std::shared_ptr<const PlantModel>;
using PlantParams = std::map<std::string, double>;

// integrator_chain: n (default 1), dt (0.1), full_output (0: y = x1, 1: y = x).
// double_integrator: dt (0.1); states pos, vel; y = pos.
// engine_surrogate: dt, a, b, c, d; states RPM, Speed; y = (RPM, Speed).
PlantPtr builtin_plant(const std::string& name, const PlantParams& params = {});
std::vector<std::string> builtin_plant_names();

std::string output_channel(int i);   // "y1", ...
std::string control_channel(int i);  // "u1", ...
std::string attack_channel(int i);   // "s1", ...

struct AttackChannel {
  bool enabled = false;
  double bound = 0.0;     // absolute, used when !relative
  bool relative = false;  // |s| <= bound * |y|
};

struct AttackSpec {
  std::vector<AttackChannel> channels;  // one per plant output

  // Largest admissible |s| on output i given the clean reading y.
  double limit(std::size_t i, double y) const;
  bool any_enabled() const;
};

// u_seq holds H rows (u_H copies u_{H-1}) or H+1 rows (u_H given). s_seq, if
// non-empty, holds H+1 rows and is only recorded; it does not feed the plant.
Trace simulate_open(const PlantModel& plant, std::span<const double> x0, int horizon,
                    const std::vector<std::vector<double>>& u_seq,
                    const std::vector<std::vector<double>>& s_seq = {});

struct ClosedLoop {
  PlantPtr plant;
  std::shared_ptr<const ControllerIR> controller;
  std::shared_ptr<const PathTable> table;
  std::optional<AttackSpec> attack;
};

// Builds a ClosedLoop, checking controller arity against the plant.
ClosedLoop make_closed_loop(PlantPtr plant, std::shared_ptr<const ControllerIR> controller,
                            std::shared_ptr<const PathTable> table, std::optional<AttackSpec> attack = {});

// Runs H steps. The controller reads y_t + s_t; the trace records y (clean),
// s, u and the realized path per step. s_seq is empty or has H+1 rows.
Trace simulate_closed(const ClosedLoop& cl, std::span<const double> x0, int horizon,
                      const std::vector<std::vector<double>>& s_seq = {});

// Attack given as fractions r in [-1, 1] of the admissible bound at each step:
// s_t,i = r_t,i * limit(i, y_t,i). The trace records the resulting s.
Trace simulate_closed_scaled(const ClosedLoop& cl, std::span<const double> x0, int horizon,
                             const std::vector<std::vector<double>>& r_seq);

// Path taken at y, by the controller's own branch decisions. Falls back to the
// table evaluated at the box-clamped point when y lies outside the box.
int realized_path(const ControllerIR& ir, const PathTable& table, std::span<const double> y);

// CSV: header "t,<channels...>[,path]", one row per step.
std::string trace_to_csv(const Trace& tr);
Trace trace_from_csv(const std::string& text, double dt = 1.0);
std::string trace_to_json(const Trace& tr);

}  // namespace rampo
