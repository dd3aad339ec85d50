#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>

#include "app.hpp"

namespace rampo::app {
namespace {

namespace fs = std::filesystem;

Json rational_json(const Rational& q) {
  return {{"decimal", to_decimal_string(q)}, {"num", q.get_num().get_str()}, {"den", q.get_den().get_str()}};
}

Json trajectory_json(const CyberTrajectory& t) { return t.path_ids; }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                          "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};

const char* path_color(int id) { return kPalette[static_cast<std::size_t>(id - 1) % std::size(kPalette)]; }

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw InternalError("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

Json path_table_json(const PathTable& table) {
  Json box = Json::object();
  for (const auto& b : table.box()) box[b.name] = {to_decimal_string(b.lo), to_decimal_string(b.hi)};
  Json paths = Json::array();
  for (const auto& e : table.entries()) {
    Json cells = Json::array();
    for (const auto& cell : e.constraint.cells) {
      Json atoms = Json::array();
      for (const auto& a : cell) atoms.push_back(a.to_string());
      cells.push_back(atoms);
    }
    Json decisions = Json::array();
    for (const auto& d : e.decisions) decisions.push_back({{"if", d.if_id}, {"taken", d.taken}});
    Json outputs = Json::object();
    for (const auto& [var, expr] : e.function.outputs) outputs[var] = expr.to_string();
    paths.push_back({{"path_id", e.constraint.path_id},
                     {"constraint", e.constraint.to_string()},
                     {"cells", cells},
                     {"decisions", decisions},
                     {"outputs", outputs}});
  }
  Json pruned = Json::array();
  for (const auto& cell : table.pruned()) {
    Json atoms = Json::array();
    for (const auto& a : cell) atoms.push_back(a.to_string());
    pruned.push_back(atoms);
  }
  return {{"inputs", table.input_vars()}, {"controls", table.control_vars()}, {"box", box},
          {"path_count", table.k()},      {"paths", paths},                   {"pruned", pruned}};
}

Json range_table_json(const RangeTable& ranges) {
  Json rows = Json::array();
  auto row = [](Json id, const ControlRange& r) {
    return Json{{"path_id", id},
                {"control_var", r.control_var},
                {"lo", rational_json(r.lo)},
                {"hi", rational_json(r.hi)},
                {"lo_attained", r.lo_attained},
                {"hi_attained", r.hi_attained}};
  };
  for (const auto& pr : ranges.ranges) {
    for (const auto& r : pr.controls) rows.push_back(row(pr.path_id, r));
  }
  Json global = Json::array();
  for (const auto& r : ranges.global) global.push_back(row(nullptr, r));
  return {{"rows", rows}, {"global", global}};
}

std::string svg_plot(const Trace& tr, const std::vector<std::string>& states, const PathTable& table,
                     const std::string& title) {
  const double left = 70, right = 20, top = 40, panel_h = 150, gap = 30, width = 640;
  const double plot_w = width - left - right;
  const int steps = static_cast<int>(tr.length());
  const double legend_top = top + static_cast<double>(states.size()) * (panel_h + gap);
  const double height = legend_top + 22.0 * table.k() + 20;
  auto x_of = [&](double t) { return left + plot_w * (t + 0.5) / steps; };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt("%.0f", width) + "\" height=\"" +
       fmt("%.0f", height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + fmt("%.1f", left) + "\" y=\"22\" font-size=\"14\">" + xml_escape(title) + "</text>\n";
  for (std::size_t k = 0; k < states.size(); ++k) {
    const auto& ys = tr.channel(states[k]);
    double lo = ys[0], hi = ys[0];
    for (double v : ys) lo = std::min(lo, v), hi = std::max(hi, v);
    if (hi - lo < 1e-12) lo -= 1, hi += 1;
    const double pad = 0.08 * (hi - lo);
    lo -= pad, hi += pad;
    const double y0 = top + static_cast<double>(k) * (panel_h + gap);
    auto y_of = [&](double v) { return y0 + panel_h * (hi - v) / (hi - lo); };
    for (int t = 0; t < steps; ++t) {
      if (static_cast<std::size_t>(t) >= tr.paths.size()) break;
      const int p = tr.paths[static_cast<std::size_t>(t)];
      s += "<rect x=\"" + fmt("%.2f", left + plot_w * t / steps) + "\" y=\"" + fmt("%.2f", y0) + "\" width=\"" +
           fmt("%.2f", plot_w / steps) + "\" height=\"" + fmt("%.2f", panel_h) + "\" fill=\"" + path_color(p) +
           "\" fill-opacity=\"0.18\"><title>t=" + std::to_string(t) + " path " + std::to_string(p) +
           "</title></rect>\n";
    }
    s += "<rect x=\"" + fmt("%.2f", left) + "\" y=\"" + fmt("%.2f", y0) + "\" width=\"" + fmt("%.2f", plot_w) +
         "\" height=\"" + fmt("%.2f", panel_h) + "\" fill=\"none\" stroke=\"#333\"/>\n";
    s += "<text x=\"" + fmt("%.2f", left - 6) + "\" y=\"" + fmt("%.2f", y0 + 10) + "\" text-anchor=\"end\">" +
         fmt("%.4g", hi) + "</text>\n";
    s += "<text x=\"" + fmt("%.2f", left - 6) + "\" y=\"" + fmt("%.2f", y0 + panel_h) + "\" text-anchor=\"end\">" +
         fmt("%.4g", lo) + "</text>\n";
    s += "<text x=\"" + fmt("%.2f", left - 6) + "\" y=\"" + fmt("%.2f", y0 + panel_h / 2) +
         "\" text-anchor=\"end\" font-weight=\"bold\">" + xml_escape(states[k]) + "</text>\n";
    std::string pts;
    for (int t = 0; t < steps; ++t) {
      pts += (t ? " " : "") + fmt("%.2f", x_of(t)) + "," + fmt("%.2f", y_of(ys[static_cast<std::size_t>(t)]));
    }
    s += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"#222\" stroke-width=\"1.5\"/>\n";
    for (int t = 0; t < steps; ++t) {
      s += "<circle cx=\"" + fmt("%.2f", x_of(t)) + "\" cy=\"" + fmt("%.2f", y_of(ys[static_cast<std::size_t>(t)])) +
           "\" r=\"2.5\" fill=\"#222\"/>\n";
    }
    for (int t = 0; t < steps; ++t) {
      s += "<text x=\"" + fmt("%.2f", x_of(t)) + "\" y=\"" + fmt("%.2f", y0 + panel_h + 13) +
           "\" text-anchor=\"middle\">" + std::to_string(t) + "</text>\n";
    }
  }
  for (const auto& e : table.entries()) {
    const int p = e.constraint.path_id;
    const double y = legend_top + 22.0 * (p - 1);
    s += "<rect x=\"" + fmt("%.2f", left) + "\" y=\"" + fmt("%.2f", y) + "\" width=\"14\" height=\"14\" fill=\"" +
         path_color(p) + "\" fill-opacity=\"0.5\"/>\n";
    s += "<text x=\"" + fmt("%.2f", left + 20) + "\" y=\"" + fmt("%.2f", y + 11) + "\">path " + std::to_string(p) +
         ": " + xml_escape(e.constraint.to_string()) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

ReportBundle make_report(const RunConfig& cfg, const Setup& s, const Report& rep) {
  ReportBundle b;
  Json vulns = Json::array();
  const auto& states = s.plant->state_names();
  for (std::size_t i = 0; i < rep.vulns.size(); ++i) {
    const auto& v = rep.vulns[i];
    const std::string id = "v" + std::to_string(i + 1);
    std::string csv = trace_to_csv(v.witness);
    const std::string sha = sha256_hex(csv);
    Json x0 = Json::object();
    for (std::size_t k = 0; k < states.size(); ++k) x0[states[k]] = v.witness.at(states[k], 0);
    Json attack = nullptr;
    if (!v.attack.empty()) attack = v.attack;
    vulns.push_back({{"id", id},
                     {"trajectory", trajectory_json(v.trajectory)},
                     {"robustness", v.robustness},
                     {"x0", x0},
                     {"decision", v.decision},
                     {"attack", attack},
                     {"witness", "witnesses/" + sha + ".csv"},
                     {"witness_sha256", sha},
                     {"plot", "plots/" + id + ".svg"}});
    b.witness_csv.push_back(std::move(csv));
    b.plots.push_back(svg_plot(v.witness, states, *s.table, id + " " + v.trajectory.to_string()));
  }
  Json explored = Json::array();
  for (const auto& e : rep.explored) {
    explored.push_back({{"trajectory", trajectory_json(e.trajectory)}, {"reason", e.reason}, {"budget", e.budget}});
  }
  Json overlaps = Json::array();
  for (auto [p, q] : rep.overlaps) overlaps.push_back({p, q});
  const auto& c = rep.counters;
  Json& r = b.report;
  r["tool"] = "rampo";
  r["format"] = 1;
  r["config"] = config_json(cfg, true);
  r["controller"] = {{"source_sha256", sha256_hex(cfg.controller.text)}, {"table", path_table_json(*s.table)}};
  r["ranges"] = range_table_json(s.ranges);
  r["overlaps"] = overlaps;
  r["status"] = rep.status;
  r["counters"] = {{"falsifier_calls", c.falsifier_calls}, {"abstract_calls", c.abstract_calls},
                   {"concrete_calls", c.concrete_calls},   {"exclusion_calls", c.exclusion_calls},
                   {"refinements", c.refinements},         {"clamped_steps", c.clamped_steps},
                   {"out_of_range_steps", c.out_of_range_steps}, {"simulations", c.simulations}};
  r["vulns"] = vulns;
  r["explored"] = explored;
  r["caveats"] = rep.caveats;
  return b;
}

fs::path write_run(const RunConfig& cfg, const Setup& s, const Report& rep, const fs::path& out, double wall_seconds) {
  auto b = make_report(cfg, s, rep);
  for (std::size_t i = 0; i < b.witness_csv.size(); ++i) {
    const auto& v = b.report["vulns"][i];
    write_file(out / v["witness"].get<std::string>(), b.witness_csv[i]);
    write_file(out / v["plot"].get<std::string>(), b.plots[i]);
  }
  const std::string text = b.report.dump(2) + "\n";
  const fs::path report = out / "report.json";
  write_file(report, text);

  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  Json meta = {{"report_sha256", sha256_hex(text)}, {"written_at", stamp}, {"wall_seconds", wall_seconds}};
  write_file(out / "report.meta.json", meta.dump(2) + "\n");
  return report;
}

ReplayOutcome replay(const fs::path& report_file, const std::string& vuln_id) {
  Json report;
  try {
    report = Json::parse(read_file(report_file));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + report_file.string() + "' is not a valid report: " + e.what());
  }
  if (!report.contains("vulns") || !report.contains("config")) throw ConfigError("report lacks vulns or config");
  const Json* vuln = nullptr;
  for (const auto& v : report["vulns"]) {
    if (v.value("id", "") == vuln_id) vuln = &v;
  }
  if (!vuln) throw ConfigError("no vulnerability '" + vuln_id + "' in report");

  const fs::path dir = report_file.parent_path();
  RunConfig cfg = parse_config(report["config"], dir);
  Setup s = build(cfg);

  const fs::path witness_file = dir / (*vuln)["witness"].get<std::string>();
  if (!fs::exists(witness_file)) throw ConfigError("witness '" + witness_file.string() + "' is missing");
  const std::string text = read_file(witness_file);
  Trace witness;
  try {
    witness = trace_from_csv(text, s.plant->dt());
  } catch (const Error& e) {
    throw ConfigError("witness '" + witness_file.string() + "' is corrupt: " + e.what());
  }
  if (witness.horizon != cfg.horizon) throw ConfigError("witness horizon does not match the report");

  ReplayOutcome out;
  out.hash_ok = sha256_hex(text) == (*vuln)["witness_sha256"].get<std::string>();
  std::vector<double> x0;
  for (const auto& name : s.plant->state_names()) {
    if (!witness.has(name)) throw ConfigError("witness lacks state column '" + name + "'");
    x0.push_back(witness.at(name, 0));
  }
  std::vector<std::vector<double>> s_seq;
  if (cfg.attack) {
    for (int t = 0; t <= cfg.horizon; ++t) {
      std::vector<double> row;
      for (int i = 1; i <= s.plant->output_dim(); ++i) {
        const auto ch = attack_channel(i);
        row.push_back(witness.has(ch) ? witness.at(ch, t) : 0.0);
      }
      s_seq.push_back(std::move(row));
    }
  }
  const auto expected = (*vuln)["trajectory"].get<std::vector<int>>();
  try {
    auto cl = make_closed_loop(s.plant, s.ir, s.table, cfg.attack);
    Trace tr = simulate_closed(cl, x0, cfg.horizon, s_seq);
    out.witness_ok = tr == witness;
    out.robustness = stl::robustness(s.safety, tr);
    out.realized = tr.paths;
    out.paths_ok = tr.paths == expected;
  } catch (const AttackBoundViolated&) {
    out.robustness = INFINITY;
  } catch (const NonFiniteState&) {
    out.robustness = INFINITY;
  }
  return out;
}

}  // namespace rampo::app
