#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "app.hpp"

namespace py = pybind11;
using namespace rampo;

namespace {

class Controller {
 public:
  Controller(const std::string& source, const std::map<std::string, std::pair<std::string, std::string>>& box,
             const std::vector<std::string>& controls, const std::string& entry) {
    ir_ = std::make_shared<const ControllerIR>(parse_controller({source, entry}));
    Box b;
    for (const auto& p : ir_->params) {
      auto it = box.find(p);
      if (it == box.end()) throw ConfigError("box has no bounds for input '" + p + "'");
      b.push_back({p, parse_decimal(it->second.first), parse_decimal(it->second.second)});
    }
    ExtractOptions eo;
    eo.control_vars = controls;
    table_ = std::make_shared<const PathTable>(extract_paths(*ir_, b, eo));
    ranges_ = path_ranges(*table_);
  }

  int path_count() const { return table_->k(); }
  std::vector<std::string> inputs() const { return table_->input_vars(); }
  int path_of(const std::vector<double>& y) const { return table_->path_of(y); }
  std::vector<double> interpret(const std::vector<double>& y) const {
    return rampo::interpret(*ir_, y, table_->control_vars());
  }
  std::vector<double> evaluate(int path, const std::vector<double>& y) const { return table_->evaluate(path, y); }
  std::string table_json() const { return app::path_table_json(*table_).dump(); }
  std::string ranges_json() const { return app::range_table_json(ranges_).dump(); }

 private:
  std::shared_ptr<const ControllerIR> ir_;
  std::shared_ptr<const PathTable> table_;
  RangeTable ranges_;
};

Trace trace_of(const std::map<std::string, std::vector<double>>& channels) {
  Trace tr;
  std::size_t len = 0;
  for (const auto& [k, v] : channels) {
    if (len && v.size() != len) throw ConfigError("channels must have equal length");
    len = v.size();
  }
  if (len == 0) throw ConfigError("trace is empty");
  tr.horizon = static_cast<int>(len) - 1;
  tr.channels = channels;
  return tr;
}

app::RunConfig overridden(const std::string& config, std::optional<std::uint64_t> seed,
                          std::optional<std::string> strategy, std::optional<std::string> budget,
                          std::optional<int> cap, std::optional<bool> grid) {
  auto cfg = app::load_config(config);
  if (seed) cfg.seed = *seed;
  if (strategy) cfg.strategy = parse_strategy(*strategy);
  if (budget) cfg.budget = parse_budget(*budget);
  if (cap) cfg.falsify_cap = *cap;
  if (grid) cfg.grid = *grid;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "CEGAR search for cyber-kinetic vulnerabilities of controller code";

  auto base = py::register_exception<Error>(m, "RampoError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<SyntaxError>(m, "SyntaxError", base.ptr());
  py::register_exception<UnknownChannel>(m, "UnknownChannel", base.ptr());
  py::register_exception<OutOfDomain>(m, "OutOfDomain", base.ptr());

  py::class_<Controller>(m, "Controller")
      .def(py::init<const std::string&, const std::map<std::string, std::pair<std::string, std::string>>&,
                    const std::vector<std::string>&, const std::string&>(),
           py::arg("source"), py::arg("box"), py::arg("controls") = std::vector<std::string>{},
           py::arg("entry") = "control")
      .def_property_readonly("path_count", &Controller::path_count)
      .def_property_readonly("inputs", &Controller::inputs)
      .def("path_of", &Controller::path_of, py::arg("y"))
      .def("interpret", &Controller::interpret, py::arg("y"))
      .def("evaluate", &Controller::evaluate, py::arg("path"), py::arg("y"))
      .def("table_json", &Controller::table_json)
      .def("ranges_json", &Controller::ranges_json);

  m.def(
      "robustness",
      [](const std::string& formula, const std::map<std::string, std::vector<double>>& channels, double dt) {
        auto tr = trace_of(channels);
        tr.dt = dt;
        return stl::robustness(stl::parse(formula), tr);
      },
      py::arg("formula"), py::arg("channels"), py::arg("dt") = 1.0);
  m.def(
      "negate", [](const std::string& formula) { return stl::to_string(stl::negate(stl::parse(formula))); },
      py::arg("formula"));

  m.def(
      "simulate_open",
      [](const std::string& plant, const PlantParams& params, const std::vector<double>& x0, int horizon,
         const std::vector<std::vector<double>>& u) {
        auto p = builtin_plant(plant, params);
        return simulate_open(*p, x0, horizon, u).channels;
      },
      py::arg("plant"), py::arg("params"), py::arg("x0"), py::arg("horizon"), py::arg("u"));

  m.def(
      "run_report",
      [](const std::string& config, std::optional<std::uint64_t> seed, std::optional<std::string> strategy,
         std::optional<std::string> budget, std::optional<int> cap, std::optional<bool> grid) {
        auto cfg = overridden(config, seed, strategy, budget, cap, grid);
        std::string out;
        {
          py::gil_scoped_release nogil;
          auto s = app::build(cfg);
          auto rep = run(app::make_problem(cfg, s), app::make_options(cfg));
          out = app::make_report(cfg, s, rep).report.dump();
        }
        return out;
      },
      py::arg("config"), py::arg("seed") = py::none(), py::arg("strategy") = py::none(),
      py::arg("budget") = py::none(), py::arg("cap") = py::none(), py::arg("grid") = py::none());

  m.def(
      "run_to_dir",
      [](const std::string& config, const std::filesystem::path& out, std::optional<std::uint64_t> seed) {
        auto cfg = overridden(config, seed, {}, {}, {}, {});
        cfg.output_dir = out.string();
        py::gil_scoped_release nogil;
        auto s = app::build(cfg);
        auto rep = run(app::make_problem(cfg, s), app::make_options(cfg));
        return app::write_run(cfg, s, rep, out, 0.0);
      },
      py::arg("config"), py::arg("out"), py::arg("seed") = py::none());

  m.def(
      "replay",
      [](const std::filesystem::path& report, const std::string& vuln_id) {
        auto r = app::replay(report, vuln_id);
        py::dict d;
        d["passed"] = r.passed();
        d["robustness"] = r.robustness;
        d["paths_ok"] = r.paths_ok;
        d["witness_ok"] = r.witness_ok;
        d["hash_ok"] = r.hash_ok;
        d["realized"] = r.realized;
        return d;
      },
      py::arg("report"), py::arg("vuln_id"));
}
