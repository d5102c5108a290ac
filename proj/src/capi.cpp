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

#include "tiltedflow/tiltedflow.h"

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <sstream>
#include <string>
#include <unordered_map>

#include <json.hpp>

#include "tiltedflow/dual.hpp"
#include "tiltedflow/experiment.hpp"

using nlohmann::json;
using namespace tiltedflow;

struct tf_cylinder {
  Cylinder cyl;
};

struct tf_field {
  CapacityField field;
  std::string header;
};

namespace {

thread_local std::string g_last_error;

tf_status to_status(ErrorCode c) {
  return c == ErrorCode::Ok ? TF_OK : static_cast<tf_status>(static_cast<int>(c));
}

template <typename F>
tf_status guard(F&& fn) {
  try {
    fn();
    g_last_error.clear();
    return TF_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const json::exception& e) {
    g_last_error = std::string("malformed JSON: ") + e.what();
    return TF_CONFIG_ERROR;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return TF_TOO_LARGE;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return TF_INTERNAL_ERROR;
  }
}

void require(bool ok, const char* what) {
  if (!ok) fail(ErrorCode::InvalidArgument, what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

Rational rational_pair(const json& j) {
  if (j.is_number_integer()) return Rational(j.get<int64_t>());
  if (!j.is_array() || j.size() != 2) fail(ErrorCode::InvalidArgument, "expected a [num, den] pair");
  return Rational(i128(j[0].get<int64_t>()), i128(j[1].get<int64_t>()));
}

CylinderSpec parse_spec(const json& j) {
  CylinderSpec s;
  const json& d = j.at("direction");
  s.dir = Direction::make(d.at(0).get<int64_t>(), d.at(1).get<int64_t>());
  s.a = RPoint{rational_pair(j.at("a").at(0)), rational_pair(j.at("a").at(1))};
  s.b = RPoint{rational_pair(j.at("b").at(0)), rational_pair(j.at("b").at(1))};
  s.n = j.at("n").get<int64_t>();
  s.h = rational_pair(j.at("h"));
  s.validate();
  return s;
}

json labels_json(uint8_t labels) {
  json out = json::array();
  if (labels & kTop) out.push_back("top");
  if (labels & kBottom) out.push_back("bottom");
  if (labels & kLeft) out.push_back("left");
  if (labels & kRight) out.push_back("right");
  return out;
}

ExperimentConfig load_config(const char* config_json, const tf_run_options* opts) {
  require(config_json != nullptr, "config_json is NULL");
  json j;
  try {
    j = json::parse(config_json);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ConfigError, std::string("config is not valid JSON: ") + e.what());
  }
  if (opts && opts->overrides_json) j.merge_patch(json::parse(opts->overrides_json));
  ExperimentConfig cfg = config_from_json(j.dump());
  if (opts) {
    if (opts->has_seed) cfg.seed = opts->seed;
    if (opts->threads > 0) cfg.threads = opts->threads;
    if (opts->out_dir) cfg.out = opts->out_dir;
  }
  cfg.validate();
  return cfg;
}

}  // namespace

extern "C" {

const char* tf_version(void) { return kCodeVersion; }

const char* tf_status_name(tf_status status) {
  if (status == TF_OK) return "Ok";
  if (status == TF_INTERNAL_ERROR) return "InternalError";
  return error_code_name(static_cast<ErrorCode>(static_cast<int>(status)));
}

const char* tf_last_error(void) { return g_last_error.c_str(); }

void tf_string_free(char* s) { std::free(s); }

tf_status tf_cylinder_create(const char* spec_json, tf_cylinder** out) {
  return guard([&] {
    require(spec_json && out, "NULL argument");
    *out = nullptr;
    CylinderSpec spec = parse_spec(json::parse(spec_json));
    *out = new tf_cylinder{Cylinder(spec)};
  });
}

void tf_cylinder_destroy(tf_cylinder* cyl) { delete cyl; }

tf_status tf_cylinder_counts(const tf_cylinder* cyl, int64_t* vertices, int64_t* edges) {
  return guard([&] {
    require(cyl != nullptr, "cylinder is NULL");
    if (vertices) *vertices = int64_t(cyl->cyl.vertex_count());
    if (edges) *edges = int64_t(cyl->cyl.edge_count());
  });
}

tf_status tf_cylinder_dump(const tf_cylinder* cyl, char** jsonl) {
  return guard([&] {
    require(cyl && jsonl, "NULL argument");
    const Cylinder& c = cyl->cyl;
    const CylinderSpec& s = c.spec();
    std::ostringstream os;
    AngleWindow w = angle_window(s);
    os << json{{"type", "cylinder"},
               {"direction", {s.dir.p, s.dir.q}},
               {"a", {s.a.x.str(), s.a.y.str()}},
               {"b", {s.b.x.str(), s.b.y.str()}},
               {"n", s.n},
               {"h", s.h.str()},
               {"vertices", c.vertex_count()},
               {"edges", c.edge_count()},
               {"window", {w.lo, w.hi}}}
              .dump()
       << "\n";
    const auto& vs = c.vertices();
    for (size_t i = 0; i < vs.size(); ++i)
      os << json{{"type", "vertex"}, {"id", i}, {"x", vs[i].x}, {"y", vs[i].y}, {"labels", labels_json(vs[i].labels)}}
                .dump()
         << "\n";
    const auto& es = c.edges();
    for (size_t i = 0; i < es.size(); ++i)
      os << json{{"type", "edge"}, {"id", i}, {"u", es[i].u}, {"v", es[i].v}, {"dir", es[i].dir}, {"key", es[i].key}}
                .dump()
         << "\n";
    *jsonl = dup_string(os.str());
  });
}

tf_status tf_field_sample(const tf_cylinder* cyl, const char* config_json, uint64_t seed, uint64_t replicate,
                          tf_field** out) {
  return guard([&] {
    require(cyl && config_json && out, "NULL argument");
    *out = nullptr;
    ExperimentConfig cfg = config_from_json(config_json);
    std::vector<uint64_t> keys;
    keys.reserve(cyl->cyl.edge_count());
    for (const auto& e : cyl->cyl.edges()) keys.push_back(e.key);
    auto f = std::make_unique<tf_field>();
    f->field = sample(cfg.dist, seed, replicate, keys);
    f->header = json{{"seed", seed},
                     {"replicate", replicate},
                     {"dist", cfg.dist.name()},
                     {"count", keys.size()},
                     {"fixed_scale", kFixedScale}}
                    .dump();
    *out = f.release();
  });
}

tf_status tf_field_write(const tf_field* field, const char* path) {
  return guard([&] {
    require(field && path, "NULL argument");
    write_field(path, field->field, field->header);
  });
}

tf_status tf_field_read(const char* path, tf_field** out) {
  return guard([&] {
    require(path && out, "NULL argument");
    *out = nullptr;
    auto f = std::make_unique<tf_field>();
    f->field = read_field(path, &f->header);
    *out = f.release();
  });
}

void tf_field_destroy(tf_field* field) { delete field; }

int64_t tf_field_size(const tf_field* field) { return field ? int64_t(field->field.keys.size()) : 0; }

tf_status tf_flow_solve(const tf_cylinder* cyl, const tf_field* field, const char* mode, char** result_json) {
  return guard([&] {
    require(cyl && field && mode && result_json, "NULL argument");
    const Cylinder& c = cyl->cyl;
    std::unordered_map<uint64_t, Capacity> by_key;
    for (size_t i = 0; i < field->field.keys.size(); ++i) by_key[field->field.keys[i]] = field->field.values[i];
    std::vector<Capacity> caps;
    caps.reserve(c.edge_count());
    for (const auto& e : c.edges()) {
      auto it = by_key.find(e.key);
      if (it == by_key.end()) fail(ErrorCode::InvalidNetwork, "field has no value for edge key " + std::to_string(e.key));
      caps.push_back(it->second);
    }
    std::string m = mode;
    if (m != "tau" && m != "phi") fail(ErrorCode::InvalidArgument, "mode must be tau or phi");
    FlowResult r = m == "tau" ? tau(c, caps) : phi(c, caps);
    json keys = json::array();
    for (int32_t id : r.cut.edges) keys.push_back(c.edges()[size_t(id)].key);
    *result_json = dup_string(json{{"mode", m},
                                   {"value_fixed", r.value},
                                   {"fixed_scale", kFixedScale},
                                   {"value", dequantize(r.value)},
                                   {"cut_edges", r.cut.edges},
                                   {"cut_keys", keys}}
                                  .dump());
  });
}

tf_status tf_dual_check(const tf_cylinder* cyl, const char* dist_json, uint64_t seed, int64_t reps, int threads,
                        char** jsonl, int64_t* failures) {
  return guard([&] {
    require(cyl && dist_json && jsonl, "NULL argument");
    require(reps > 0 && threads > 0, "reps and threads must be positive");
    json cfg = json::parse(dist_json);
    if (!cfg.contains("dist")) cfg = json{{"dist", cfg}};
    DistributionSpec dist = config_from_json(cfg.dump()).dist;
    const Cylinder& c = cyl->cyl;
    AdmissibleFamily fam = enumerate_kappa(c);
    std::vector<DualityReport> out(static_cast<size_t>(reps));
    std::vector<Capacity> dual_values(static_cast<size_t>(reps));
    DualSolver dual(c, top_bottom_arcs(c));
    parallel_for(reps, threads, [&](int64_t r) {
      auto caps = sample_cylinder(dist, seed, uint64_t(r), c);
      out[size_t(r)] = verify_duality_lemma(c, caps, fam);
      dual_values[size_t(r)] = dual.value(caps);
    });
    std::ostringstream os;
    int64_t bad = 0;
    for (int64_t r = 0; r < reps; ++r) {
      const DualityReport& d = out[size_t(r)];
      bool dual_ok = dual_values[size_t(r)] == d.phi;
      if (!d.equal || !dual_ok) ++bad;
      os << json{{"seed", seed},
                 {"replicate", r},
                 {"phi_fixed", d.phi},
                 {"min_phi_kappa_fixed", d.min_phi_kappa},
                 {"dual_phi_fixed", dual_values[size_t(r)]},
                 {"family_size", d.family_size},
                 {"argmin_k", d.argmin_k},
                 {"argmin_theta", d.argmin_theta},
                 {"equal", d.equal},
                 {"dual_equal", dual_ok}}
                .dump()
         << "\n";
    }
    if (failures) *failures = bad;
    *jsonl = dup_string(os.str());
  });
}

tf_status tf_run(const char* config_json, const tf_run_options* opts, tf_run_summary* summary) {
  if (summary) *summary = tf_run_summary{0, 0, 0.0, nullptr, nullptr};
  return guard([&] {
    require(summary != nullptr, "summary is NULL");
    ExperimentConfig cfg = load_config(config_json, opts);
    auto start = std::chrono::steady_clock::now();
    RunResult res = execute(cfg);
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!opts || opts->write_outputs) write_outputs(cfg, res, cfg.out, seconds);
    std::string messages;
    for (const auto& m : res.failure_messages) messages += m + "\n";
    summary->checks = res.checks;
    summary->failures = res.failures;
    summary->seconds = seconds;
    summary->config_hash = dup_string(res.config_hash);
    summary->messages = dup_string(messages);
  });
}

tf_status tf_run_rows(const char* config_json, const tf_run_options* opts, char** jsonl, int64_t* failures) {
  return guard([&] {
    require(jsonl != nullptr, "jsonl is NULL");
    RunResult res = execute(load_config(config_json, opts));
    std::string out;
    for (const auto& r : res.rows) out += r + "\n";
    if (failures) *failures = res.failures;
    *jsonl = dup_string(out);
  });
}

tf_status tf_report(const char* dir, char** text) {
  return guard([&] {
    require(dir && text, "NULL argument");
    *text = dup_string(report(dir));
  });
}

tf_status tf_config_canonical(const char* config_json, char** out) {
  return guard([&] {
    require(config_json && out, "NULL argument");
    *out = dup_string(config_to_json(config_from_json(config_json)));
  });
}

}  // extern "C"
