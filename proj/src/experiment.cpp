/*
   Copyright 2026 The tiltedflow Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include "tiltedflow/experiment.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "tiltedflow/dual.hpp"

namespace tiltedflow {

const char* const kCodeVersion = "tiltedflow 0.1.0";

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
  fail(ErrorCode::ConfigError, "config field '" + field + "': " + what);
}

std::string rational_text(const Rational& r) { return r.str(); }

Rational parse_rational(const json& j, const std::string& field) {
  if (j.is_number_integer()) return Rational(i128(j.get<int64_t>()));
  if (!j.is_string()) config_error(field, "expected an integer or a \"p/q\" string");
  std::string s = j.get<std::string>();
  try {
    auto slash = s.find('/');
    if (slash == std::string::npos) return Rational(i128(std::stoll(s)));
    return Rational(i128(std::stoll(s.substr(0, slash))), i128(std::stoll(s.substr(slash + 1))));
  } catch (const std::logic_error&) {
    config_error(field, "cannot parse rational '" + s + "'");
  }
}

json point_json(const RPoint& p) { return json::array({rational_text(p.x), rational_text(p.y)}); }

RPoint parse_point(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2) config_error(field, "expected a pair");
  return RPoint{parse_rational(j[0], field), parse_rational(j[1], field)};
}

json dir_json(const Direction& d) { return json::array({d.p, d.q}); }

Direction parse_dir(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2) config_error(field, "expected [p, q]");
  try {
    return Direction::make(j[0].get<int64_t>(), j[1].get<int64_t>());
  } catch (const Error& e) {
    config_error(field, e.what());
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    config_error(key, "wrong type");
  }
}

json dist_json(const DistributionSpec& d) {
  switch (d.family) {
    case Family::TwoAtom: return {{"family", "two_atom"}, {"delta", d.delta}, {"b", d.b}, {"p", d.p}};
    case Family::BernoulliLike: return {{"family", "bernoulli_like"}, {"c", d.c}, {"p", d.p}};
    case Family::ShiftedExponential: return {{"family", "shifted_exponential"}, {"delta", d.delta}, {"rate", d.rate}};
    case Family::Pareto: return {{"family", "pareto"}, {"shape", d.shape}};
    case Family::Uniform: return {{"family", "uniform"}, {"lo", d.lo}, {"hi", d.hi}};
    case Family::Constant: return {{"family", "constant"}, {"c", d.c}};
  }
  return {};
}

DistributionSpec parse_dist(const json& j) {
  std::string f = get_or<std::string>(j, "family", "");
  if (f == "two_atom")
    return DistributionSpec::two_atom(get_or(j, "delta", 0.0), get_or(j, "b", 0.0), get_or(j, "p", 0.0));
  if (f == "bernoulli_like") return DistributionSpec::bernoulli_like(get_or(j, "c", 1.0), get_or(j, "p", 0.0));
  if (f == "shifted_exponential")
    return DistributionSpec::shifted_exponential(get_or(j, "delta", 0.0), get_or(j, "rate", 1.0));
  if (f == "pareto") return DistributionSpec::pareto(get_or(j, "shape", 2.0));
  if (f == "uniform") return DistributionSpec::uniform(get_or(j, "lo", 0.0), get_or(j, "hi", 1.0));
  if (f == "constant") return DistributionSpec::constant(get_or(j, "c", 1.0));
  config_error("dist.family", "unknown family '" + f + "'");
}

json schedule_json(const HeightSchedule& s) {
  switch (s.kind) {
    case HeightSchedule::Kind::Power: return {{"kind", "power"}, {"c", s.c}, {"beta", s.beta}};
    case HeightSchedule::Kind::Linear: return {{"kind", "linear"}, {"c", s.c}};
    case HeightSchedule::Kind::LogScaled: return {{"kind", "log_scaled"}, {"c", s.c}};
    case HeightSchedule::Kind::Custom: {
      json t = json::object();
      for (const auto& [n, h] : s.table) t[std::to_string(n)] = h;
      return {{"kind", "custom"}, {"table", t}};
    }
    case HeightSchedule::Kind::Alternating:
      return {{"kind", "alternating"}, {"even", schedule_json(*s.even)}, {"odd", schedule_json(*s.odd)}};
  }
  return {};
}

HeightSchedule parse_schedule(const json& j) {
  std::string k = get_or<std::string>(j, "kind", "");
  if (k == "power") return HeightSchedule::power(get_or(j, "c", 1.0), get_or(j, "beta", 1.0));
  if (k == "linear") return HeightSchedule::linear(get_or(j, "c", 1.0));
  if (k == "log_scaled") return HeightSchedule::log_scaled(get_or(j, "c", 1.0));
  if (k == "custom") {
    std::map<int64_t, double> t;
    for (const auto& [key, v] : j.at("table").items()) t[std::stoll(key)] = v.get<double>();
    return HeightSchedule::custom(t);
  }
  if (k == "alternating") return HeightSchedule::alternating(parse_schedule(j.at("even")), parse_schedule(j.at("odd")));
  config_error("schedule.kind", "unknown schedule '" + k + "'");
}

json curve_json(const ICurve& c) {
  if (c.kind == ICurve::Kind::Quadratic) return {{"kind", "quadratic"}, {"c", c.c}, {"nu", c.nu}, {"floor", c.floor}};
  json pts = json::array();
  for (const auto& [x, y] : c.points) pts.push_back({x, y});
  return {{"kind", "piecewise_linear"}, {"points", pts}};
}

ICurve parse_curve(const json& j) {
  std::string k = get_or<std::string>(j, "kind", "");
  if (k == "quadratic") return ICurve::quadratic(get_or(j, "c", 1.0), get_or(j, "nu", 2.0), get_or(j, "floor", 1.0));
  if (k == "piecewise_linear") {
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : j.at("points")) pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    return ICurve::piecewise_linear(pts);
  }
  config_error("algebra.profile.kind", "unknown curve '" + k + "'");
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["kind"] = c.kind;
  j["dist"] = dist_json(c.dist);
  j["schedule"] = schedule_json(c.schedule);
  j["template"] = {{"dir", dir_json(c.tmpl.dir)},
                   {"a", point_json(c.tmpl.a)},
                   {"b", point_json(c.tmpl.b)},
                   {"offset", point_json(c.tmpl.offset)}};
  j["n_grid"] = c.n_grid;
  j["lambda_grid"] = c.lambda_grid;
  j["reps"] = c.reps;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["out"] = c.out;
  j["rate_kind"] = c.rate_kind;
  const GluingConfig& g = c.glue.config;
  json tri = json::array();
  for (const auto& p : c.glue.triangle) tri.push_back(point_json(p));
  j["glue"] = {{"kind", c.glue.kind},       {"n", g.n},
               {"N", g.N},                  {"zeta0", g.zeta0},
               {"zeta_c", g.zeta_c},        {"zeta_beta", g.zeta_beta},
               {"hprime_c", g.hprime_c},    {"hprime_beta", g.hprime_beta},
               {"zetap_beta", g.zetap_beta}, {"h_second", g.h_second},
               {"tilt", dir_json(c.glue.tilt)}, {"k", rational_text(c.glue.k)},
               {"triangle", tri}};
  j["eta"] = {{"n", c.eta.n}, {"grid_bound", c.eta.grid_bound}, {"half_width", c.eta.half_width}};
  j["algebra"] = {{"profile", curve_json(c.algebra.profile)},
                  {"theta", c.algebra.theta},
                  {"half_width", c.algebra.half_width},
                  {"lambdas", c.algebra.lambdas},
                  {"pairs", c.algebra.pairs}};
  return j;
}

ExperimentConfig from_json(const json& j) {
  ExperimentConfig c;
  if (!j.is_object()) fail(ErrorCode::ConfigError, "config must be a JSON object");
  static const std::vector<std::string> known{"kind",    "dist", "schedule",  "template", "n_grid", "lambda_grid",
                                              "reps",    "seed", "threads",   "out",      "rate_kind", "glue",
                                              "eta",     "algebra"};
  for (const auto& [key, v] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end()) config_error(key, "unknown field");
  c.kind = get_or<std::string>(j, "kind", c.kind);
  if (j.contains("dist")) c.dist = parse_dist(j["dist"]);
  if (j.contains("schedule")) c.schedule = parse_schedule(j["schedule"]);
  if (j.contains("template")) {
    const json& t = j["template"];
    c.tmpl.dir = parse_dir(t.at("dir"), "template.dir");
    if (t.contains("a") || t.contains("b")) {
      c.tmpl.a = parse_point(t.at("a"), "template.a");
      c.tmpl.b = parse_point(t.at("b"), "template.b");
    } else {
      c.tmpl = SegmentTemplate::unit(c.tmpl.dir);
    }
    if (t.contains("offset")) c.tmpl.offset = parse_point(t["offset"], "template.offset");
  }
  c.n_grid = get_or(j, "n_grid", c.n_grid);
  c.lambda_grid = get_or(j, "lambda_grid", c.lambda_grid);
  c.reps = get_or(j, "reps", c.reps);
  c.seed = get_or(j, "seed", c.seed);
  c.threads = get_or(j, "threads", c.threads);
  c.out = get_or(j, "out", c.out);
  c.rate_kind = get_or(j, "rate_kind", c.rate_kind);
  if (j.contains("glue")) {
    const json& g = j["glue"];
    GluingConfig& gc = c.glue.config;
    c.glue.kind = get_or(g, "kind", c.glue.kind);
    gc.n = get_or(g, "n", gc.n);
    gc.N = get_or(g, "N", gc.N);
    gc.zeta0 = get_or(g, "zeta0", gc.zeta0);
    gc.zeta_c = get_or(g, "zeta_c", gc.zeta_c);
    gc.zeta_beta = get_or(g, "zeta_beta", gc.zeta_beta);
    gc.hprime_c = get_or(g, "hprime_c", gc.hprime_c);
    gc.hprime_beta = get_or(g, "hprime_beta", gc.hprime_beta);
    gc.zetap_beta = get_or(g, "zetap_beta", gc.zetap_beta);
    gc.h_second = get_or(g, "h_second", gc.h_second);
    if (g.contains("tilt")) c.glue.tilt = parse_dir(g["tilt"], "glue.tilt");
    if (g.contains("k")) c.glue.k = parse_rational(g["k"], "glue.k");
    if (g.contains("triangle"))
      for (const auto& p : g["triangle"]) c.glue.triangle.push_back(parse_point(p, "glue.triangle"));
  }
  if (j.contains("eta")) {
    const json& e = j["eta"];
    c.eta.n = get_or(e, "n", c.eta.n);
    c.eta.grid_bound = get_or(e, "grid_bound", c.eta.grid_bound);
    c.eta.half_width = get_or(e, "half_width", c.eta.half_width);
  }
  if (j.contains("algebra")) {
    const json& a = j["algebra"];
    if (a.contains("profile")) c.algebra.profile = parse_curve(a["profile"]);
    c.algebra.theta = get_or(a, "theta", c.algebra.theta);
    c.algebra.half_width = get_or(a, "half_width", c.algebra.half_width);
    c.algebra.lambdas = get_or(a, "lambdas", c.algebra.lambdas);
    c.algebra.pairs = get_or(a, "pairs", c.algebra.pairs);
  }
  c.validate();
  return c;
}

std::string hypotheses_missing(const HypothesisReport& r, const std::vector<std::string>& needed) {
  std::string out;
  auto add = [&](const std::string& name, bool ok) {
    if (!ok) out += (out.empty() ? "" : ", ") + name;
  };
  for (const auto& h : needed) {
    if (h == "F1") add("(F1)", r.f1);
    if (h == "F2") add("(F2)", r.f2);
    if (h == "H1") add("(H1)", r.h1 == Truth::Yes);
    if (h == "H2") add("(H2)", r.h2 == Truth::Yes);
  }
  return out;
}

// Row helpers: every row carries its provenance.
struct Collector {
  const ExperimentConfig& cfg;
  std::string hash;
  RunResult res;

  json row(int64_t replicate) const {
    return json{{"kind", cfg.kind}, {"seed", cfg.seed}, {"replicate", replicate}, {"config_hash", hash}};
  }
  void push(const json& j) { res.rows.push_back(j.dump()); }
  void check(bool ok, const std::string& what) {
    ++res.checks;
    if (!ok) {
      ++res.failures;
      if (res.failure_messages.size() < 50) res.failure_messages.push_back(what);
    }
  }
};

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

SimOptions sim_options(const ExperimentConfig& cfg) {
  SimOptions o;
  o.seed = cfg.seed;
  o.threads = cfg.threads;
  return o;
}

void run_geometry(Collector& col) {
  const auto& cfg = col.cfg;
  std::ostringstream csv;
  csv << "n,h,vertices,edges,top,bottom,left,right,min_cut_edges,bound_ok\n";
  for (int64_t n : cfg.n_grid) {
    double h = cfg.schedule(n);
    CylinderSpec spec = cfg.tmpl.at(n, h);
    Cylinder cyl(spec);
    int64_t top = 0, bottom = 0, left = 0, right = 0;
    for (const auto& v : cyl.vertices()) {
      top += (v.labels & kTop) ? 1 : 0;
      bottom += (v.labels & kBottom) ? 1 : 0;
      left += (v.labels & kLeft) ? 1 : 0;
      right += (v.labels & kRight) ? 1 : 0;
    }
    int64_t cut_edges = min_cut_edge_count(cyl);
    double nl = spec.length();
    double m = manhattan_factor(spec.dir.theta());
    bool ok = std::fabs(double(cut_edges) / nl - m) <= 2.0 / nl + 1e-12;
    col.check(ok, "cut-cardinality bound fails at n=" + std::to_string(n));
    AngleWindow w = angle_window(spec);
    json r = col.row(-1);
    r.update({{"n", n}, {"h", h}, {"vertices", cyl.vertex_count()}, {"edges", cyl.edge_count()},
              {"top", top}, {"bottom", bottom}, {"left", left}, {"right", right},
              {"min_cut_edges", cut_edges}, {"bound_ok", ok}, {"window", {w.lo, w.hi}}});
    col.push(r);
    csv << n << "," << fmt(h) << "," << cyl.vertex_count() << "," << cyl.edge_count() << "," << top << ","
        << bottom << "," << left << "," << right << "," << cut_edges << "," << (ok ? 1 : 0) << "\n";
  }
  col.res.csv = csv.str();
}

void run_flow(Collector& col) {
  const auto& cfg = col.cfg;
  std::ostringstream csv;
  csv << "n,replicate,tau,phi,dual_phi,ok\n";
  for (int64_t n : cfg.n_grid) {
    Cylinder cyl(cfg.tmpl.at(n, cfg.schedule(n)));
    Arcs tau_arcs = boundary_arcs(cyl, tau_condition(cyl));
    Arcs tb = top_bottom_arcs(cyl);
    DualSolver dual(cyl, tb);
    struct Out {
      Capacity tau = 0, phi = 0, dual = 0;
      std::string problem;
    };
    std::vector<Out> outs(static_cast<size_t>(cfg.reps));
    parallel_for(cfg.reps, cfg.threads, [&](int64_t r) {
      auto caps = sample_cylinder(cfg.dist, cfg.seed, uint64_t(r), cyl);
      Out& o = outs[size_t(r)];
      FlowNetwork tn = cylinder_network(cyl, caps, tau_arcs);
      FlowResult t = max_flow(tn);
      FlowNetwork pn = cylinder_network(cyl, caps, tb);
      FlowResult p = max_flow(pn);
      o.tau = t.value;
      o.phi = p.value;
      o.dual = dual.value(caps);
      o.problem = check_flow_result(tn, t);
      if (o.problem.empty()) o.problem = check_flow_result(pn, p);
      if (o.problem.empty() && o.dual != o.phi) o.problem = "dual value differs from phi";
    });
    for (int64_t r = 0; r < cfg.reps; ++r) {
      const Out& o = outs[size_t(r)];
      bool ok = o.problem.empty();
      col.check(ok, "n=" + std::to_string(n) + " replicate " + std::to_string(r) + ": " + o.problem);
      json row = col.row(r);
      row.update({{"n", n}, {"tau_fixed", o.tau}, {"phi_fixed", o.phi}, {"dual_phi_fixed", o.dual}, {"ok", ok}});
      col.push(row);
      csv << n << "," << r << "," << o.tau << "," << o.phi << "," << o.dual << "," << (ok ? 1 : 0) << "\n";
    }
  }
  col.res.csv = csv.str();
}

void run_dual_check(Collector& col) {
  const auto& cfg = col.cfg;
  std::ostringstream csv;
  csv << "n,replicate,phi,min_phi_kappa,family_size,equal\n";
  for (int64_t n : cfg.n_grid) {
    Cylinder cyl(cfg.tmpl.at(n, cfg.schedule(n)));
    AdmissibleFamily fam = enumerate_kappa(cyl);
    DualSolver dual(cyl, top_bottom_arcs(cyl));
    std::vector<DualityReport> reps(static_cast<size_t>(cfg.reps));
    std::vector<Capacity> dual_values(static_cast<size_t>(cfg.reps));
    parallel_for(cfg.reps, cfg.threads, [&](int64_t r) {
      auto caps = sample_cylinder(cfg.dist, cfg.seed, uint64_t(r), cyl);
      reps[size_t(r)] = verify_duality_lemma(cyl, caps, fam);
      dual_values[size_t(r)] = dual.value(caps);
    });
    for (int64_t r = 0; r < cfg.reps; ++r) {
      const DualityReport& d = reps[size_t(r)];
      bool dual_ok = dual_values[size_t(r)] == d.phi;
      col.check(d.equal, "duality lemma fails at n=" + std::to_string(n) + " replicate " + std::to_string(r));
      col.check(dual_ok, "dual engine differs from phi at n=" + std::to_string(n) + " replicate " + std::to_string(r));
      json row = col.row(r);
      row.update({{"n", n}, {"phi_fixed", d.phi}, {"min_phi_kappa_fixed", d.min_phi_kappa},
                  {"family_size", d.family_size}, {"argmin_k", d.argmin_k}, {"argmin_theta", d.argmin_theta},
                  {"equal", d.equal}, {"dual_equal", dual_ok}});
      col.push(row);
      csv << n << "," << r << "," << d.phi << "," << d.min_phi_kappa << "," << d.family_size << ","
          << (d.equal ? 1 : 0) << "\n";
    }
  }
  col.res.csv = csv.str();
}

GluingSetup glue_setup(const ExperimentConfig& cfg) {
  const GlueSettings& g = cfg.glue;
  if (g.kind == "phi") return build_phi_gluing(g.config, cfg.tmpl.at(g.config.N, cfg.schedule(g.config.N)), g.tilt);
  if (g.kind == "slab") {
    CylinderSpec small = cfg.tmpl.at(g.config.n, cfg.schedule(g.config.n));
    return build_slab_gluing(g.config, small, g.k, g.tilt);
  }
  if (g.kind == "triangle") {
    if (g.triangle.size() != 3) config_error("glue.triangle", "needs three points a, b, c");
    return build_triangle_gluing(g.config, g.triangle[0], g.triangle[1], g.triangle[2]);
  }
  config_error("glue.kind", "expected phi, triangle or slab");
}

void run_glue_check(Collector& col) {
  const auto& cfg = col.cfg;
  GluingSetup setup = glue_setup(cfg);
  std::vector<GluingReport> reps(static_cast<size_t>(cfg.reps));
  parallel_for(cfg.reps, cfg.threads,
               [&](int64_t r) { reps[size_t(r)] = verify_gluing(setup, cfg.dist, cfg.seed, uint64_t(r)); });
  std::ostringstream csv;
  csv << "replicate,lhs,middle,rhs,slack,inequality_ok,structural_ok\n";
  for (int64_t r = 0; r < cfg.reps; ++r) {
    const GluingReport& g = reps[size_t(r)];
    col.check(g.inequality_ok, "gluing inequality fails at replicate " + std::to_string(r));
    col.check(g.structural_ok, "cutset containment fails at replicate " + std::to_string(r));
    json row = col.row(r);
    row.update({{"glue_kind", g.kind}, {"lhs_fixed", g.lhs}, {"middle_fixed", g.middle},
                {"pieces_sum_fixed", g.pieces_sum}, {"connector_fixed", g.connector_value}, {"rhs_fixed", g.rhs},
                {"slack_fixed", g.slack}, {"inequality_ok", g.inequality_ok}, {"structural_ok", g.structural_ok},
                {"pieces", g.pieces}, {"connector_edges", g.connector_edges},
                {"connector_parts", g.connector_parts}});
    col.push(row);
    csv << r << "," << g.lhs << "," << g.middle << "," << g.rhs << "," << g.slack << "," << (g.inequality_ok ? 1 : 0)
        << "," << (g.structural_ok ? 1 : 0) << "\n";
  }
  col.res.csv = csv.str();
}

void run_nu(Collector& col) {
  const auto& cfg = col.cfg;
  NuEstimate est = estimate_nu(cfg.tmpl, cfg.dist, cfg.schedule, cfg.n_grid, cfg.reps, sim_options(cfg));
  std::ostringstream csv;
  csv << "theta_p,theta_q,n,h,reps,mean,stderr\n";
  for (const auto& p : est.points) {
    json row = col.row(-1);
    row.update({{"n", p.n}, {"h", p.h}, {"reps", p.reps}, {"mean", p.mean}, {"stderr", p.stderr_}});
    col.push(row);
    csv << est.dir.p << "," << est.dir.q << "," << p.n << "," << fmt(p.h) << "," << p.reps << "," << fmt(p.mean)
        << "," << fmt(p.stderr_) << "\n";
  }
  for (const auto& s : est.subadditivity) {
    col.check(s.ok, "E[tau(2n)] exceeds 2 E[tau(n)] + 2 stderr at n=" + std::to_string(s.n));
    json row = col.row(-1);
    row.update({{"subadditivity_n", s.n}, {"tau_n", s.tau_n}, {"tau_2n", s.tau_2n},
                {"joint_stderr", s.joint_stderr}, {"ok", s.ok}});
    col.push(row);
  }
  json row = col.row(-1);
  row.update({{"nu_hat", est.nu_hat}, {"nu_stderr", est.nu_stderr}});
  col.push(row);
  col.res.csv = csv.str();
}

void run_eta(Collector& col) {
  const auto& cfg = col.cfg;
  double hw = cfg.eta.half_width;
  if (hw < 0.0) hw = std::atan(cfg.schedule.ratio_limits(cfg.tmpl.length()).second);
  auto grid = tilt_grid(cfg.tmpl.dir, hw, cfg.eta.grid_bound);
  EtaEstimate est = estimate_eta(cfg.tmpl, cfg.dist, cfg.schedule, cfg.eta.n, cfg.reps, grid, sim_options(cfg));
  std::ostringstream csv;
  csv << "theta_p,theta_q,n,nu,stderr,cos,ratio\n";
  for (const auto& t : est.grid) {
    json row = col.row(-1);
    row.update({{"dir", dir_json(t.dir)}, {"n", t.n}, {"nu", t.nu}, {"stderr", t.stderr_}, {"cos", t.cos_factor},
                {"ratio", t.ratio()}});
    col.push(row);
    csv << t.dir.p << "," << t.dir.q << "," << t.n << "," << fmt(t.nu) << "," << fmt(t.stderr_) << ","
        << fmt(t.cos_factor) << "," << fmt(t.ratio()) << "\n";
  }
  bool ok = est.within(3.0);
  col.check(ok, "eta_hat differs from the grid formula by more than 3 combined stderr");
  json row = col.row(-1);
  row.update({{"eta_hat", est.eta_hat}, {"eta_stderr", est.eta_stderr}, {"eta_formula", est.eta_formula},
              {"formula_stderr", est.formula_stderr}, {"argmin", dir_json(est.argmin)},
              {"combined_stderr", est.combined_stderr()}, {"within_3_stderr", ok}, {"half_width", hw}});
  col.push(row);
  col.res.csv = csv.str();
}

void run_rate(Collector& col) {
  const auto& cfg = col.cfg;
  FlowKind kind = cfg.rate_kind == "phi" ? FlowKind::Phi : FlowKind::Tau;
  RateTable tab = estimate_rate(kind, cfg.tmpl, cfg.dist, cfg.schedule, cfg.lambda_grid, cfg.n_grid, cfg.reps,
                                sim_options(cfg));
  std::map<int64_t, int64_t> min_edges;
  for (int64_t n : cfg.n_grid) {
    Cylinder cyl(cfg.tmpl.at(n, cfg.schedule(n)));
    std::vector<Capacity> unit(cyl.edge_count(), 1);
    Arcs arcs = kind == FlowKind::Tau ? boundary_arcs(cyl, tau_condition(cyl)) : top_bottom_arcs(cyl);
    min_edges[n] = DualSolver(cyl, arcs).value(unit);
  }
  const double delta = cfg.dist.ess_inf();
  const double l = cfg.tmpl.length();
  std::ostringstream csv;
  csv << "theta_p,theta_q,n,lambda,hits,reps,rate,censored\n";
  for (const auto& r : tab.rows) {
    bool impossible = r.lambda * double(r.n) * l < delta * double(min_edges[r.n]);
    if (impossible) col.check(r.hits == 0, "hits below the deterministic floor at n=" + std::to_string(r.n));
    json row = col.row(-1);
    row.update({{"dir", dir_json(r.dir)}, {"n", r.n}, {"lambda", r.lambda}, {"hits", r.hits}, {"reps", r.reps},
                {"rate", r.rate}, {"censored", r.censored}, {"slack", r.slack}, {"impossible", impossible},
                {"min_cut_edges", min_edges[r.n]}});
    col.push(row);
    csv << r.dir.p << "," << r.dir.q << "," << r.n << "," << fmt(r.lambda) << "," << r.hits << "," << r.reps << ","
        << fmt(r.rate) << "," << (r.censored ? 1 : 0) << "\n";
  }
  for (const auto& [r, ratio] : tab.surface_ratios) {
    json row = col.row(-1);
    row.update({{"surface_ratio_n", r.n}, {"lambda", r.lambda}, {"ratio", ratio}});
    col.push(row);
  }
  if (tab.fully_censored()) {
    json row = col.row(-1);
    row["note"] = "fully censored table";
    col.push(row);
  }
  col.res.csv = csv.str();
}

void run_algebra(Collector& col) {
  const auto& cfg = col.cfg;
  const AlgebraSettings& a = cfg.algebra;
  RateAlgebraContext ctx = make_context(a.theta, a.half_width, a.profile);
  const double dth = ctx.delta_theta_h();
  const double eta = ctx.eta();
  std::vector<double> lambdas = a.lambdas;
  if (lambdas.empty())
    for (int i = 0; i <= 64; ++i) lambdas.push_back(1.25 * eta * double(i) / 64.0);
  std::ostringstream csv;
  csv << "lambda,K_tilde,K\n";
  auto record = [&](const std::string& name, bool ok, const json& detail) {
    col.check(ok, name);
    json row = col.row(-1);
    row.update({{"check", name}, {"ok", ok}, {"detail", detail}});
    col.push(row);
  };
  std::vector<double> kt;
  for (double lam : lambdas) {
    kt.push_back(K_tilde(ctx, lam));
    double k = K(ctx, lam);
    csv << fmt(lam) << "," << fmt(kt.back()) << "," << fmt(k) << "\n";
  }
  bool nonincreasing = true, strict = true, infinite_ok = true, right_cont = true;
  for (size_t i = 0; i < lambdas.size(); ++i) {
    double lam = lambdas[i];
    if (i > 0 && kt[i] > kt[i - 1] + 1e-9 * (1.0 + std::fabs(kt[i - 1]))) nonincreasing = false;
    if (lam < dth && !std::isinf(kt[i])) infinite_ok = false;
    if (lam > dth && std::isinf(kt[i])) infinite_ok = false;
    if (lam > dth && lam <= eta && std::isfinite(kt[i])) {
      double eps = 1e-3 * (lam - dth);
      if (!(K_tilde(ctx, lam - eps) > kt[i])) strict = false;
    }
    if (std::isfinite(kt[i])) {
      double step = K_tilde(ctx, lam + std::ldexp(1.0, -30));
      if (!(std::fabs(step - kt[i]) <= 1e-6 * (1.0 + kt[i]))) right_cont = false;
    }
  }
  record("K_tilde non-increasing", nonincreasing, json::object());
  record("K_tilde strictly decreasing on [delta_theta_h, eta]", strict, {{"delta_theta_h", dth}, {"eta", eta}});
  record("K_tilde infinite exactly below delta_theta_h", infinite_ok, {{"delta_theta_h", dth}});
  record("K_tilde right-continuous", right_cont, json::object());
  record("K(eta) = 0", std::fabs(K(ctx, eta)) <= 1e-9, {{"eta", eta}});
  record("K infinite above eta", std::isinf(K(ctx, eta * 1.01 + 1e-9)), json::object());
  for (double axis : {0.0, kPi / 2}) {
    RateAlgebraContext c2 = make_context(axis, a.half_width, a.profile);
    double worst = 0.0;
    for (double lam : lambdas) {
      double k = K(c2, lam), j = J(c2.curve(axis), lam);
      if (std::isinf(k) != std::isinf(j)) worst = kInf;
      else if (std::isfinite(k)) worst = std::max(worst, std::fabs(k - j));
    }
    record("K = J at theta=" + fmt(axis), worst <= 1e-9, {{"max_abs_diff", worst}});
  }
  for (double lam : {0.5 * (dth + eta), eta}) {
    SubadditivityReport s = check_Lambda_subadditive(a.profile, lam, a.pairs, cfg.seed);
    record("Lambda subadditive at lambda=" + fmt(lam), s.failures == 0,
           {{"pairs", s.pairs}, {"failures", s.failures}, {"worst_gap", s.worst_gap}});
  }
  col.res.csv = csv.str();
}

std::string hex(const unsigned char* d, size_t n) {
  std::ostringstream os;
  for (size_t i = 0; i < n; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(d[i]);
  return os.str();
}

void write_file(const std::filesystem::path& p, const std::string& data) {
  std::ofstream f(p, std::ios::binary);
  if (!f) fail(ErrorCode::IoError, "cannot write " + p.string());
  f << data;
  if (!f) fail(ErrorCode::IoError, "write failed for " + p.string());
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) fail(ErrorCode::IoError, "cannot read " + p.string());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

}  // namespace

void ExperimentConfig::validate() const {
  static const std::vector<std::string> kinds{"geometry", "flow", "dual-check", "glue-check",
                                              "nu",       "eta",  "rate",       "algebra-check"};
  if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) config_error("kind", "unknown kind '" + kind + "'");
  try {
    dist.validate();
  } catch (const Error& e) {
    config_error("dist", e.what());
  }
  if (reps <= 0) config_error("reps", "must be positive");
  if (threads <= 0) config_error("threads", "must be positive");
  for (int64_t n : n_grid)
    if (n <= 0) config_error("n_grid", "entries must be positive");
  if (rate_kind != "tau" && rate_kind != "phi") config_error("rate_kind", "expected tau or phi");
  const bool needs_n = kind == "geometry" || kind == "flow" || kind == "dual-check" || kind == "nu" || kind == "rate";
  if (needs_n && n_grid.empty()) config_error("n_grid", "must not be empty");
  if (kind == "rate" && lambda_grid.empty()) config_error("lambda_grid", "must not be empty");
  if (kind == "glue-check") {
    try {
      glue.config.validate();
    } catch (const Error& e) {
      config_error("glue", e.what());
    }
  }
  const double l = tmpl.length();
  if (l <= 0.0) config_error("template", "segment A is degenerate");
  HypothesisReport hyp = validate_hypotheses(dist, schedule, l);
  std::vector<std::string> needed;
  if (kind == "nu") needed = {"F2", "H1"};
  if (kind == "eta") needed = {"F1", "F2", "H1", "H2"};
  std::string missing = hypotheses_missing(hyp, needed);
  if (!missing.empty()) config_error("dist/schedule", "hypotheses " + missing + " fail for kind " + kind);
}

std::string config_to_json(const ExperimentConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

ExperimentConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ConfigError, std::string("config is not valid JSON: ") + e.what());
  }
  try {
    return from_json(j);
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigError, std::string("config has a malformed field: ") + e.what());
  }
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorCode::IoError, "sha-256 failed");
  return hex(md, len);
}

RunResult execute(const ExperimentConfig& cfg) {
  cfg.validate();
  // The hash ignores the thread budget and output path, which do not affect results.
  ExperimentConfig key = cfg;
  key.threads = 1;
  key.out.clear();
  Collector col{cfg, sha256_hex(config_to_json(key)), {}};
  col.res.config_hash = col.hash;
  if (cfg.kind == "geometry") run_geometry(col);
  else if (cfg.kind == "flow") run_flow(col);
  else if (cfg.kind == "dual-check") run_dual_check(col);
  else if (cfg.kind == "glue-check") run_glue_check(col);
  else if (cfg.kind == "nu") run_nu(col);
  else if (cfg.kind == "eta") run_eta(col);
  else if (cfg.kind == "rate") run_rate(col);
  else run_algebra(col);
  return col.res;
}

Manifest write_outputs(const ExperimentConfig& cfg, const RunResult& res, const std::string& dir, double seconds) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + dir + ": " + ec.message());
  std::string jsonl;
  for (const auto& r : res.rows) jsonl += r + "\n";
  std::vector<std::pair<std::string, std::string>> files{
      {"results.jsonl", jsonl}, {"summary.csv", res.csv}, {"config.json", config_to_json(cfg)}};
  Manifest m;
  m.config_hash = res.config_hash;
  m.code_version = kCodeVersion;
  m.seconds = seconds;
  m.checks = res.checks;
  m.failures = res.failures;
  const fs::path manifest = fs::path(dir) / "manifest.json";
  write_file(manifest, json{{"config_hash", m.config_hash}, {"partial", true}}.dump(2) + "\n");
  for (const auto& [name, data] : files) {
    write_file(fs::path(dir) / name, data);
    if (name != "config.json") m.digests.emplace_back(name, sha256_hex(data));
  }
  json digests = json::object();
  for (const auto& [name, d] : m.digests) digests[name] = d;
  json man{{"config_hash", m.config_hash},
           {"code_version", m.code_version},
           {"kind", cfg.kind},
           {"seed", cfg.seed},
           {"replicates", {{"first", 0}, {"count", cfg.reps}}},
           {"threads", cfg.threads},
           {"fixed_scale", kFixedScale},
           {"seconds", seconds},
           {"partial", false},
           {"checks", m.checks},
           {"failures", m.failures},
           {"failure_messages", res.failure_messages},
           {"digests", digests}};
  write_file(manifest, man.dump(2) + "\n");
  return m;
}

std::string report(const std::string& dir) {
  namespace fs = std::filesystem;
  fs::path mp = fs::path(dir) / "manifest.json";
  if (!fs::exists(mp)) fail(ErrorCode::MissingManifest, "no manifest.json in " + dir);
  json man = json::parse(read_file(mp));
  if (man.value("partial", false)) fail(ErrorCode::MissingManifest, "results in " + dir + " are partial");
  std::string kind = man.value("kind", "");
  std::ostringstream os;
  os << "kind: " << kind << "  seed: " << man.value("seed", 0) << "  checks: " << man.value("checks", 0)
     << "  failures: " << man.value("failures", 0) << "\n";
  std::istringstream rows(read_file(fs::path(dir) / "results.jsonl"));
  std::string line;
  std::ostringstream csv;
  os << std::setprecision(6);
  while (std::getline(rows, line)) {
    if (line.empty()) continue;
    json r = json::parse(line);
    if (kind == "nu" && r.contains("mean")) {
      os << "  n=" << r["n"] << "  nu_hat=" << r["mean"].get<double>() << " +/- "
         << 1.96 * r["stderr"].get<double>() << "\n";
    } else if (kind == "nu" && r.contains("nu_hat")) {
      os << "  nu_hat(largest n) = " << r["nu_hat"].get<double>() << "\n";
    } else if (kind == "rate" && r.contains("hits")) {
      bool cens = r["censored"].get<bool>();
      os << "  n=" << r["n"] << "  lambda=" << r["lambda"].get<double>() << "  rate " << (cens ? ">= " : "= ")
         << r["rate"].get<double>() << "  (" << r["hits"] << "/" << r["reps"] << ")\n";
    } else if (kind == "eta" && r.contains("eta_hat")) {
      double diff = std::fabs(r["eta_hat"].get<double>() - r["eta_formula"].get<double>());
      double k = diff / r["combined_stderr"].get<double>();
      os << "  eta_hat=" << r["eta_hat"].get<double>() << "  formula=" << r["eta_formula"].get<double>() << "  -> "
         << (k <= 3.0 ? "eta_hat within " : "eta_hat NOT within ") << "3 stderr of formula (" << k << " stderr)\n";
    } else if (kind == "algebra-check" && r.contains("check")) {
      os << "  " << (r["ok"].get<bool>() ? "ok    " : "FAILED") << "  " << r["check"].get<std::string>() << "\n";
    }
  }
  write_file(fs::path(dir) / "report.txt", os.str());
  return os.str();
}

}  // namespace tiltedflow
