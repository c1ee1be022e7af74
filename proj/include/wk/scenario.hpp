#pragma once

// Scenario configuration and output. A scenario is a JSON document naming a
// chart, a Lagrangian, initial data, integrator settings, output paths and an
// optional parameter sweep. Parsing is strict: unknown keys and wrong types
// raise ConfigError with the JSON path of the offending field.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <json.hpp>

#include "wk/charts.hpp"
#include "wk/dixon.hpp"
#include "wk/dynamics.hpp"
#include "wk/errors.hpp"
#include "wk/geometry.hpp"
#include "wk/lagrangians.hpp"
#include "wk/suites.hpp"
#include "wk/variational.hpp"

namespace wk::scenario {

using json = nlohmann::ordered_json;

struct ChartSpec {
  std::string metric = "minkowski";
  std::map<std::string, double> params;
  Signature<4> signature = default_signature<4>();
  std::string derivative_mode = "analytic";
};

struct LagrangianSpec {
  std::string kind = "kawaguchi";
  double A = 0.0;   // kawaguchi
  double c = 0.1;   // test2
};

// generator "jet": explicit (x, u, u1, u2) with gauge "natural" or "project".
// generator "helix": flat helix of radius r and frequency omega (Minkowski).
// generator "frame_helix": helix jet at x on the frame built from u, e1, e2.
// generator "orbit_helix": frame_helix on the circular Schwarzschild orbit of
// radius orbit_radius, with e1 radial and e2 azimuthal.
struct InitialSpec {
  std::string generator = "jet";
  Vec<4> x = Vec<4>::Zero();
  Vec<4> u = Vec<4>(1, 0, 0, 0);
  Vec<4> u1 = Vec<4>::Zero();
  Vec<4> u2 = Vec<4>::Zero();
  Vec<4> e1 = Vec<4>(0, 1, 0, 0);
  Vec<4> e2 = Vec<4>(0, 0, 1, 0);
  std::string gauge = "natural";
  double s0 = 0.0;
  double r = 0.0;
  double omega = 0.0;
  double phase = 0.0;
  double orbit_radius = 10.0;
};

struct OutputSpec {
  std::string dir = "out";
  std::string trajectory = "trajectory.csv";
  std::string diagnostics = "diagnostics.json";
  std::string summary = "summary.csv";
  std::string plot = "plot.dat";
  std::string format = "csv";  // csv | json (JSON lines)
  bool plot_data = false;
};

struct SweepSpec {
  std::string parameter;  // A | c | omega | r
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 1;

  std::vector<double> values() const {
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i)
      v[i] = count == 1 ? min : min + (max - min) * static_cast<double>(i) / static_cast<double>(count - 1);
    return v;
  }
};

struct ScenarioConfig {
  std::string name;
  std::string description;
  ChartSpec chart;
  LagrangianSpec lagrangian;
  InitialSpec initial;
  IntegratorConfig integrator;
  OutputSpec output;
  std::optional<SweepSpec> sweep;
};

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline std::string type_name(const json& j) { return j.type_name(); }

// Reads the fields of one JSON object and rejects whatever was not read.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object, got " + type_name(j_));
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    if (!j_.contains(key)) fail(at(key), "missing required field");
    used_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) fail(at(key), "expected a number, got " + type_name(v));
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(at(key), "must be finite");
    return d;
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  std::string string(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) fail(at(key), "expected a string, got " + type_name(v));
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : fallback;
  }

  std::string choice(const std::string& key, const std::string& fallback, const std::vector<std::string>& allowed) {
    const std::string s = string(key, fallback);
    if (std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      fail(at(key), "'" + s + "' is not one of: " + list);
    }
    return s;
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) fail(at(key), "expected true or false, got " + type_name(v));
    return v.get<bool>();
  }

  std::size_t count(const std::string& key, std::size_t fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      fail(at(key), "expected a non-negative integer, got " + type_name(v));
    return v.get<std::size_t>();
  }

  Vec<4> vec4(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array() || v.size() != 4) fail(at(key), "expected an array of 4 numbers");
    Vec<4> out;
    for (std::size_t i = 0; i < 4; ++i) {
      if (!v[i].is_number()) fail(at(key) + "/" + std::to_string(i), "expected a number");
      out[i] = v[i].get<double>();
    }
    return out;
  }
  Vec<4> vec4(const std::string& key, const Vec<4>& fallback) { return has(key) ? vec4(key) : fallback; }

  ObjectReader object(const std::string& key) { return ObjectReader(raw(key), at(key)); }

  std::string at(const std::string& key) const { return path_ + "/" + key; }
  const std::string& path() const { return path_; }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!used_.count(k)) fail(at(k), "unknown key");
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw ConfigError((path.empty() ? std::string("/") : path) + ": " + what);
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

inline ChartSpec parse_chart(ObjectReader r) {
  ChartSpec c;
  c.metric = r.choice("metric", "minkowski", {"minkowski", "schwarzschild", "desitter"});
  if (r.has("params")) {
    auto p = r.object("params");
    if (c.metric == "schwarzschild") c.params["M"] = p.number("M");
    if (c.metric == "desitter") c.params["H"] = p.number("H");
    p.finish();
  } else if (c.metric != "minkowski") {
    ObjectReader::fail(r.at("params"), "missing required field");
  }
  if (r.has("signature")) {
    const json& s = r.raw("signature");
    if (!s.is_array() || s.size() != 4) ObjectReader::fail(r.at("signature"), "expected an array of 4 entries");
    for (std::size_t i = 0; i < 4; ++i) {
      if (!s[i].is_number_integer() || std::abs(s[i].get<int>()) != 1)
        ObjectReader::fail(r.at("signature") + "/" + std::to_string(i), "entries must be +1 or -1");
      c.signature[i] = s[i].get<int>();
    }
  }
  c.derivative_mode = r.choice("derivative_mode", "analytic", {"analytic", "numeric"});
  r.finish();
  return c;
}

inline LagrangianSpec parse_lagrangian(ObjectReader r) {
  LagrangianSpec l;
  l.kind = r.choice("lagrangian", "kawaguchi", {"kawaguchi", "test2"});
  if (l.kind == "kawaguchi")
    l.A = r.number("A");
  else
    l.c = r.number("c");
  r.finish();
  return l;
}

inline InitialSpec parse_initial(ObjectReader r) {
  InitialSpec s;
  s.generator = r.choice("generator", "jet", {"jet", "helix", "frame_helix", "orbit_helix"});
  s.s0 = r.number("s0", 0.0);
  if (s.generator == "jet") {
    s.x = r.vec4("x");
    s.u = r.vec4("u");
    s.u1 = r.vec4("u1", Vec<4>::Zero());
    s.u2 = r.vec4("u2", Vec<4>::Zero());
    s.gauge = r.choice("gauge", "natural", {"natural", "project"});
  } else {
    s.r = r.number("r");
    s.omega = r.number("omega");
    if (s.generator == "helix") s.phase = r.number("phase", 0.0);
    if (s.generator == "frame_helix") {
      s.x = r.vec4("x");
      s.u = r.vec4("u");
      s.e1 = r.vec4("e1");
      s.e2 = r.vec4("e2");
    }
    if (s.generator == "orbit_helix") s.orbit_radius = r.number("orbit_radius");
  }
  r.finish();
  return s;
}

inline IntegratorConfig parse_integrator(ObjectReader r) {
  IntegratorConfig c;
  c.step = r.number("step", c.step);
  c.horizon = r.number("horizon", c.horizon);
  c.method = r.choice("method", "rk4", {"rk4", "rk45"}) == "rk4" ? StepMethod::Rk4 : StepMethod::Rk45;
  c.atol = r.number("atol", c.atol);
  c.rtol = r.number("rtol", c.rtol);
  c.gauge_projection = r.boolean("gauge_projection", c.gauge_projection);
  c.drift_abort = r.number("drift_abort", c.drift_abort);
  c.sample_every = r.count("sample_every", c.sample_every);
  r.finish();
  try {
    c.validate();
  } catch (const ConfigError& e) {
    ObjectReader::fail(r.path(), e.what());
  }
  return c;
}

inline OutputSpec parse_output(ObjectReader r) {
  OutputSpec o;
  o.dir = r.string("dir", o.dir);
  o.trajectory = r.string("trajectory", o.trajectory);
  o.diagnostics = r.string("diagnostics", o.diagnostics);
  o.summary = r.string("summary", o.summary);
  o.plot = r.string("plot", o.plot);
  o.format = r.choice("format", o.format, {"csv", "json"});
  o.plot_data = r.boolean("plot_data", o.plot_data);
  r.finish();
  return o;
}

inline SweepSpec parse_sweep(ObjectReader r) {
  SweepSpec s;
  s.parameter = r.choice("parameter", "", {"A", "c", "omega", "r"});
  s.min = r.number("min");
  s.max = r.number("max");
  s.count = r.count("count", 1);
  if (s.count == 0) ObjectReader::fail(r.at("count"), "must be at least 1");
  if (s.max < s.min) ObjectReader::fail(r.at("max"), "must not be below min");
  r.finish();
  return s;
}

inline void check_consistency(const ScenarioConfig& c) {
  const auto& g = c.initial.generator;
  if (g == "helix" && c.chart.metric != "minkowski")
    ObjectReader::fail("/initial/generator", "helix data is defined in Minkowski coordinates only");
  if (g == "orbit_helix" && c.chart.metric != "schwarzschild")
    ObjectReader::fail("/initial/generator", "orbit_helix needs the schwarzschild chart");
  if (c.sweep) {
    const auto& p = c.sweep->parameter;
    if (p == "A" && c.lagrangian.kind != "kawaguchi")
      ObjectReader::fail("/sweep/parameter", "A applies to the kawaguchi Lagrangian only");
    if (p == "c" && c.lagrangian.kind != "test2")
      ObjectReader::fail("/sweep/parameter", "c applies to the test2 Lagrangian only");
    if ((p == "omega" || p == "r") && g == "jet")
      ObjectReader::fail("/sweep/parameter", p + " needs a helix generator for the initial data");
  }
}

inline json vec_json(const Vec<4>& v) { return json::array({v[0], v[1], v[2], v[3]}); }

}  // namespace detail

inline ScenarioConfig parse_scenario(const json& j) {
  detail::ObjectReader r(j, "");
  ScenarioConfig c;
  c.name = r.string("name", "");
  c.description = r.string("description", "");
  c.chart = detail::parse_chart(r.object("chart"));
  c.lagrangian = detail::parse_lagrangian(r.object("lagrangian"));
  c.initial = detail::parse_initial(r.object("initial"));
  if (r.has("integrator")) c.integrator = detail::parse_integrator(r.object("integrator"));
  if (r.has("output")) c.output = detail::parse_output(r.object("output"));
  if (r.has("sweep")) c.sweep = detail::parse_sweep(r.object("sweep"));
  r.finish();
  detail::check_consistency(c);
  return c;
}

// Syntax errors carry line and column; field errors carry the JSON path.
inline json read_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    if (const auto p = what.find("syntax error"); p != std::string::npos) what = what.substr(p);
    throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
  }
}

inline ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  const json j = read_json_text(ss.str(), path.string());
  try {
    return parse_scenario(j);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

// Full normalized document, defaults included.
inline json to_json(const ScenarioConfig& c) {
  json j;
  if (!c.name.empty()) j["name"] = c.name;
  if (!c.description.empty()) j["description"] = c.description;

  json chart{{"metric", c.chart.metric}};
  if (c.chart.metric != "minkowski") {
    json p = json::object();
    for (const auto& [k, v] : c.chart.params) p[k] = v;
    chart["params"] = p;
  }
  chart["signature"] = json::array();
  for (int s : c.chart.signature) chart["signature"].push_back(s);
  chart["derivative_mode"] = c.chart.derivative_mode;
  j["chart"] = chart;

  json lag{{"lagrangian", c.lagrangian.kind}};
  if (c.lagrangian.kind == "kawaguchi")
    lag["A"] = c.lagrangian.A;
  else
    lag["c"] = c.lagrangian.c;
  j["lagrangian"] = lag;

  const auto& s = c.initial;
  json init{{"generator", s.generator}, {"s0", s.s0}};
  if (s.generator == "jet") {
    init["x"] = detail::vec_json(s.x);
    init["u"] = detail::vec_json(s.u);
    init["u1"] = detail::vec_json(s.u1);
    init["u2"] = detail::vec_json(s.u2);
    init["gauge"] = s.gauge;
  } else {
    init["r"] = s.r;
    init["omega"] = s.omega;
    if (s.generator == "helix") init["phase"] = s.phase;
    if (s.generator == "frame_helix") {
      init["x"] = detail::vec_json(s.x);
      init["u"] = detail::vec_json(s.u);
      init["e1"] = detail::vec_json(s.e1);
      init["e2"] = detail::vec_json(s.e2);
    }
    if (s.generator == "orbit_helix") init["orbit_radius"] = s.orbit_radius;
  }
  j["initial"] = init;

  const auto& g = c.integrator;
  j["integrator"] = {{"step", g.step},
                     {"horizon", g.horizon},
                     {"method", g.method == StepMethod::Rk4 ? "rk4" : "rk45"},
                     {"atol", g.atol},
                     {"rtol", g.rtol},
                     {"gauge_projection", g.gauge_projection},
                     {"drift_abort", g.drift_abort},
                     {"sample_every", g.sample_every}};

  const auto& o = c.output;
  j["output"] = {{"dir", o.dir},       {"trajectory", o.trajectory}, {"diagnostics", o.diagnostics},
                 {"summary", o.summary}, {"plot", o.plot},             {"format", o.format},
                 {"plot_data", o.plot_data}};

  if (c.sweep)
    j["sweep"] = {{"parameter", c.sweep->parameter},
                  {"min", c.sweep->min},
                  {"max", c.sweep->max},
                  {"count", c.sweep->count}};
  return j;
}

// ---------------------------------------------------------------------------
// Construction

inline SpacetimeChart<4> make_chart(const ChartSpec& s) {
  SpacetimeChart<4> c = s.metric == "schwarzschild" ? charts::schwarzschild(s.params.at("M"), s.signature)
                        : s.metric == "desitter"    ? charts::de_sitter(s.params.at("H"), s.signature)
                                                    : charts::minkowski<4>(s.signature);
  return s.derivative_mode == "numeric" ? c.with_numeric_derivatives() : c;
}

inline AnyLagrangian make_lagrangian(const LagrangianSpec& s) {
  if (s.kind == "kawaguchi") return KawaguchiLagrangian{s.A};
  return QuarticCurvatureLagrangian{s.c};
}

inline CovariantJet<4> make_initial(const ScenarioConfig& cfg, const SpacetimeChart<4>& chart) {
  const auto& s = cfg.initial;
  CovariantJet<4> jet;
  if (s.generator == "jet") {
    jet.x = s.x;
    jet.u = s.u;
    jet.u1 = s.u1;
    jet.u2 = s.u2;
    if (s.gauge == "project") project_natural(chart, jet);
  } else if (s.generator == "helix") {
    if (cfg.chart.signature != default_signature<4>())
      throw ConfigError("/initial/generator: helix data assumes signature (+,-,-,-)");
    jet = riewe_helix<4>(s.r, s.omega, 1, 2, s.phase).jet(0.0);
    jet.u3.reset();
  } else if (s.generator == "frame_helix") {
    jet = helix_jet_in_frame<4>(chart.at(s.x), s.u, s.e1, s.e2, s.r, s.omega);
  } else {
    const double M = cfg.chart.params.at("M");
    const Vec<4> x(0.0, s.orbit_radius, 0.5 * std::numbers::pi, 0.0);
    jet = helix_jet_in_frame<4>(chart.at(x), charts::schwarzschild_circular_velocity(M, s.orbit_radius),
                                Vec<4>(0, 1, 0, 0), Vec<4>(0, 0, 0, 1), s.r, s.omega);
  }
  jet.param = s.s0;
  return jet;
}

inline ScenarioConfig with_parameter(ScenarioConfig cfg, const std::string& name, double value) {
  if (name == "A") cfg.lagrangian.A = value;
  else if (name == "c") cfg.lagrangian.c = value;
  else if (name == "omega") cfg.initial.omega = value;
  else if (name == "r") cfg.initial.r = value;
  else throw ConfigError("unknown sweep parameter '" + name + "'");
  return cfg;
}

inline Trajectory<4> run(const ScenarioConfig& cfg) {
  const auto chart = make_chart(cfg.chart);
  const auto initial = make_initial(cfg, chart);
  return std::visit([&](const auto& lag) { return integrate(chart, initial, lag, cfg.integrator); },
                    make_lagrangian(cfg.lagrangian));
}

// ---------------------------------------------------------------------------
// Summaries and writers

struct RunSummary {
  std::string termination = "completed";
  std::size_t steps = 0;
  std::size_t samples = 0;
  double s_final = 0.0;
  double final_k2 = 0.0;
  double k2_drift = 0.0;  // max |k2(s) - k2(s0)|
  double max_E_residual = 0.0;
  double max_gamma_drift = 0.0;
  double max_beta_drift = 0.0;
};

inline RunSummary summarize(const Trajectory<4>& t) {
  RunSummary r;
  r.termination = termination_name(t.termination);
  r.steps = t.steps;
  r.samples = t.samples.size();
  r.max_gamma_drift = t.max_gamma_drift;
  r.max_beta_drift = t.max_beta_drift;
  if (t.samples.empty()) return r;
  const double k0 = t.samples.front().diag.k2;
  for (const auto& s : t.samples) {
    r.k2_drift = std::max(r.k2_drift, std::abs(s.diag.k2 - k0));
    r.max_E_residual = std::max(r.max_E_residual, s.diag.E_residual);
  }
  r.s_final = t.samples.back().s;
  r.final_k2 = t.samples.back().diag.k2;
  return r;
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline const std::vector<std::string>& trajectory_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c{"s"};
    for (const char* v : {"x", "u", "u1_", "u2_"})
      for (int i = 0; i < 4; ++i) c.push_back(v + std::to_string(i));
    for (const char* v : {"gamma", "beta", "alpha", "k2", "E_residual"}) c.emplace_back(v);
    for (int i = 0; i < 4; ++i) c.push_back("P" + std::to_string(i));
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) c.push_back("S" + std::to_string(i) + std::to_string(j));
    return c;
  }();
  return cols;
}

inline std::vector<double> sample_row(const Sample<4>& s) {
  std::vector<double> row{s.s};
  for (const Vec<4>* v : {&s.jet.x, &s.jet.u, &s.jet.u1, &s.jet.u2})
    for (int i = 0; i < 4; ++i) row.push_back((*v)[i]);
  row.insert(row.end(), {s.inv.gamma, s.inv.beta, s.inv.alpha, s.diag.k2, s.diag.E_residual});
  for (int i = 0; i < 4; ++i) row.push_back(s.dixon.P[i]);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) row.push_back(s.dixon.S(i, j));
  return row;
}

inline void write_csv(std::ostream& os, const Trajectory<4>& t) {
  const auto& cols = trajectory_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& s : t.samples) {
    const auto row = sample_row(s);
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << fmt(row[i]);
    os << '\n';
  }
}

inline void write_json_lines(std::ostream& os, const Trajectory<4>& t) {
  const auto& cols = trajectory_columns();
  for (const auto& s : t.samples) {
    const auto row = sample_row(s);
    json j;
    for (std::size_t i = 0; i < cols.size(); ++i) j[cols[i]] = row[i];
    os << j.dump() << '\n';
  }
}

// s, spatial coordinates and k2, whitespace separated.
inline void write_plot_data(std::ostream& os, const Trajectory<4>& t) {
  os << "# s x1 x2 x3 k2\n";
  for (const auto& s : t.samples)
    os << fmt(s.s) << ' ' << fmt(s.jet.x[1]) << ' ' << fmt(s.jet.x[2]) << ' ' << fmt(s.jet.x[3]) << ' '
       << fmt(s.diag.k2) << '\n';
}

inline json summary_json(const RunSummary& r) {
  return {{"termination", r.termination},   {"truncated", r.termination != "completed"},
          {"steps", r.steps},               {"samples", r.samples},
          {"s_final", r.s_final},           {"final_k2", r.final_k2},
          {"k2_drift", r.k2_drift},         {"max_E_residual", r.max_E_residual},
          {"max_gamma_drift", r.max_gamma_drift}, {"max_beta_drift", r.max_beta_drift}};
}

// Sup over samples of |x - x_h| and |u - u_h| against the closed-form helix.
inline double helix_sup_error(const ScenarioConfig& cfg, const Trajectory<4>& t) {
  const auto h = riewe_helix<4>(cfg.initial.r, cfg.initial.omega, 1, 2, cfg.initial.phase);
  double worst = 0.0;
  for (const auto& s : t.samples) {
    const double tau = s.s - cfg.initial.s0;
    worst = std::max(worst, (s.jet.x - h.derivative(0, tau)).cwiseAbs().maxCoeff());
    worst = std::max(worst, (s.jet.u - h.derivative(1, tau)).cwiseAbs().maxCoeff());
  }
  return worst;
}

inline json diagnostics_json(const ScenarioConfig& cfg, const Trajectory<4>& t) {
  json j;
  if (!cfg.name.empty()) j["scenario"] = cfg.name;
  j.update(summary_json(summarize(t)));
  if (!t.message.empty()) j["message"] = t.message;
  if (cfg.initial.generator == "helix") j["closed_form_sup_error"] = helix_sup_error(cfg, t);
  try {
    const auto res = dixon_first_residual(make_chart(cfg.chart), t);
    if (res.cases > 0) {
      j["dixon_first_residual"] = res.max_residual;
      j["dixon_first_cases"] = res.cases;
    }
  } catch (const Error&) {
    // too few or unevenly spaced samples; nothing to report
  }
  return j;
}

struct WrittenFiles {
  std::vector<std::filesystem::path> paths;
};

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError(p.string() + ": cannot open for writing");
  return f;
}

inline WrittenFiles write_run(const ScenarioConfig& cfg, const Trajectory<4>& t) {
  namespace fs = std::filesystem;
  const fs::path dir = cfg.output.dir;
  fs::create_directories(dir);
  WrittenFiles w;
  fs::path traj = dir / cfg.output.trajectory;
  if (cfg.output.format == "json" && traj.extension() == ".csv") traj.replace_extension(".jsonl");
  {
    auto f = open_out(traj);
    if (cfg.output.format == "json")
      write_json_lines(f, t);
    else
      write_csv(f, t);
  }
  w.paths.push_back(traj);
  {
    auto f = open_out(dir / cfg.output.diagnostics);
    f << diagnostics_json(cfg, t).dump(2) << '\n';
  }
  w.paths.push_back(dir / cfg.output.diagnostics);
  if (cfg.output.plot_data) {
    auto f = open_out(dir / cfg.output.plot);
    write_plot_data(f, t);
    w.paths.push_back(dir / cfg.output.plot);
  }
  return w;
}

// ---------------------------------------------------------------------------
// Sweeps. Each value runs end-to-end on one worker; rows come back in input
// order whatever the thread count.

struct SweepRow {
  double value = 0.0;
  RunSummary summary;
  std::string error;  // set when the run could not start
};

inline SweepRow run_one(const ScenarioConfig& base, const std::string& param, double value) {
  SweepRow row;
  row.value = value;
  try {
    row.summary = summarize(run(with_parameter(base, param, value)));
  } catch (const std::exception& e) {
    row.summary.termination = "error";
    row.error = e.what();
  }
  return row;
}

inline std::vector<SweepRow> run_sweep(const ScenarioConfig& cfg, std::size_t jobs) {
  if (!cfg.sweep) throw ConfigError("/sweep: missing sweep specification");
  const auto values = cfg.sweep->values();
  std::vector<SweepRow> rows(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < values.size();)
      rows[i] = run_one(cfg, cfg.sweep->parameter, values[i]);
  };
  const std::size_t n = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(values.size(), 1));
  std::vector<std::jthread> pool;
  for (std::size_t k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  return rows;
}

inline void write_sweep_csv(std::ostream& os, const std::string& param, const std::vector<SweepRow>& rows) {
  os << param << ",status,final_k2,k2_drift,E_residual,s_final\n";
  for (const auto& r : rows)
    os << fmt(r.value) << ',' << r.summary.termination << ',' << fmt(r.summary.final_k2) << ','
       << fmt(r.summary.k2_drift) << ',' << fmt(r.summary.max_E_residual) << ',' << fmt(r.summary.s_final) << '\n';
}

// ---------------------------------------------------------------------------

inline json report_json(const suites::CheckReport& r) {
  json j{{"check_name", r.check_name},
         {"n_cases", r.n_cases},
         {"max_residual", r.max_residual},
         {"tolerance", r.tolerance},
         {"pass", r.pass},
         {"seconds", r.seconds}};
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

}  // namespace wk::scenario
