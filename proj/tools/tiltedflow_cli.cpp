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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tiltedflow/tiltedflow.h"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitError = 1;
constexpr int kExitAssertion = 2;

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CliError("cannot read " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

// Argument that is either inline JSON or a path to a JSON file.
std::string json_arg(const std::string& arg) {
  auto first = arg.find_first_not_of(" \t\n");
  if (first != std::string::npos && (arg[first] == '{' || arg[first] == '[')) return arg;
  return read_text(arg);
}

void check(tf_status st) {
  if (st != TF_OK) throw CliError(std::string(tf_status_name(st)) + ": " + tf_last_error());
}

struct CString {
  char* p = nullptr;
  ~CString() { tf_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

using CylPtr = std::unique_ptr<tf_cylinder, decltype(&tf_cylinder_destroy)>;
using FieldPtr = std::unique_ptr<tf_field, decltype(&tf_field_destroy)>;

CylPtr make_cylinder(const std::string& spec_json) {
  tf_cylinder* c = nullptr;
  check(tf_cylinder_create(spec_json.c_str(), &c));
  return CylPtr(c, &tf_cylinder_destroy);
}

struct RunArgs {
  std::string config;
  std::optional<uint64_t> seed;
  int threads = 0;
  std::string out;
};

void add_run_options(CLI::App* cmd, RunArgs& a) {
  cmd->add_option("--config", a.config, "experiment config (JSON)")->required();
  cmd->add_option("--seed", a.seed, "override the config seed");
  cmd->add_option("--threads", a.threads, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", a.out, "output directory");
}

tf_run_options run_options(const RunArgs& a, const std::string& overrides, bool write) {
  tf_run_options o{};
  o.overrides_json = overrides.c_str();
  o.has_seed = a.seed.has_value();
  o.seed = a.seed.value_or(0);
  o.threads = a.threads;
  o.out_dir = a.out.empty() ? nullptr : a.out.c_str();
  o.write_outputs = write ? 1 : 0;
  return o;
}

int do_run(const RunArgs& a, const std::string& kind, bool write, const std::string& extra = "{}") {
  nlohmann::json patch = nlohmann::json::parse(extra);
  patch["kind"] = kind;
  std::string overrides = patch.dump();
  std::string config = read_text(a.config);
  tf_run_options o = run_options(a, overrides, write);
  tf_run_summary s{};
  tf_status st = tf_run(config.c_str(), &o, &s);
  CString hash{s.config_hash}, messages{s.messages};
  check(st);
  std::cout << kind << ": " << s.checks << " checks, " << s.failures << " failures, config " << hash.str().substr(0, 12)
            << ", " << s.seconds << " s\n";
  if (s.failures > 0) {
    std::cerr << messages.str();
    return kExitAssertion;
  }
  return kExitPass;
}

int do_report(const std::string& dir) {
  CString text;
  check(tf_report(dir.c_str(), &text.p));
  std::cout << text.str();
  return kExitPass;
}

int geometry_dump(const std::string& spec_path) {
  CylPtr cyl = make_cylinder(read_text(spec_path));
  CString out;
  check(tf_cylinder_dump(cyl.get(), &out.p));
  std::cout << out.str();
  return kExitPass;
}

// The config template at the first n of n_grid with h = n.
std::string template_spec(const nlohmann::json& cfg) {
  CString canonical;
  check(tf_config_canonical(cfg.dump().c_str(), &canonical.p));
  nlohmann::json c = nlohmann::json::parse(canonical.str());
  auto pair = [](const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return nlohmann::json::array({std::stoll(s), 1});
    return nlohmann::json::array({std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1))});
  };
  const auto& t = c["template"];
  int64_t n = c["n_grid"].empty() ? 1 : c["n_grid"][0].get<int64_t>();
  nlohmann::json h = nlohmann::json::array({n, 1});
  return nlohmann::json{{"direction", t["dir"]},
                        {"a", {pair(t["a"][0]), pair(t["a"][1])}},
                        {"b", {pair(t["b"][0]), pair(t["b"][1])}},
                        {"n", n},
                        {"h", h}}
      .dump();
}

int env_sample(const std::string& config_path, const std::string& spec_path, const std::string& out,
               std::optional<uint64_t> seed, uint64_t replicate) {
  std::string config = read_text(config_path);
  nlohmann::json cfg = nlohmann::json::parse(config);
  uint64_t s = seed.value_or(cfg.value("seed", uint64_t(1)));
  std::string spec = spec_path.empty() ? template_spec(cfg) : read_text(spec_path);
  CylPtr cyl = make_cylinder(spec);
  tf_field* f = nullptr;
  check(tf_field_sample(cyl.get(), cfg.dump().c_str(), s, replicate, &f));
  FieldPtr field(f, &tf_field_destroy);
  check(tf_field_write(field.get(), out.c_str()));
  std::cout << nlohmann::json{{"out", out}, {"edges", tf_field_size(field.get())}, {"seed", s}, {"replicate", replicate}}
                   .dump()
            << "\n";
  return kExitPass;
}

// Net file: {"spec": {...} or "spec_file": path, "field": path, "mode": "tau"|"phi"}.
int flow_solve(const std::string& net_path) {
  nlohmann::json net = nlohmann::json::parse(read_text(net_path));
  std::string spec = net.contains("spec") ? net["spec"].dump() : read_text(net.at("spec_file").get<std::string>());
  CylPtr cyl = make_cylinder(spec);
  tf_field* f = nullptr;
  check(tf_field_read(net.at("field").get<std::string>().c_str(), &f));
  FieldPtr field(f, &tf_field_destroy);
  CString out;
  check(tf_flow_solve(cyl.get(), field.get(), net.value("mode", std::string("phi")).c_str(), &out.p));
  std::cout << out.str() << "\n";
  return kExitPass;
}

int dual_check(const std::string& spec_path, const std::string& dist, int64_t reps, uint64_t seed, int threads) {
  CylPtr cyl = make_cylinder(read_text(spec_path));
  CString out;
  int64_t failures = 0;
  check(tf_dual_check(cyl.get(), json_arg(dist).c_str(), seed, reps, threads, &out.p, &failures));
  std::cout << out.str();
  return failures == 0 ? kExitPass : kExitAssertion;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tiltedflow: max-flow experiments on tilted lattice cylinders"};
  app.set_version_flag("--version", tf_version());
  app.require_subcommand(1);

  struct KindCmd {
    std::string kind;
    std::string alias;
  };
  const std::vector<KindCmd> kinds{{"geometry", ""},   {"flow", ""}, {"dual-check", "dual"},
                                   {"glue-check", "glue"}, {"nu", ""},   {"eta", ""},
                                   {"rate", ""},       {"algebra-check", "algebra"}};

  int exit_code = kExitPass;
  RunArgs run_args;
  std::string report_dir;
  std::string spec_path, env_spec, env_out, net_path, dist_arg = "{\"family\":\"two_atom\",\"delta\":1,\"b\":3,\"p\":0.5}";
  std::string glue_kind;
  std::optional<uint64_t> env_seed;
  uint64_t replicate = 0, dual_seed = 1;
  int64_t dual_reps = 100;
  int dual_threads = 1;
  std::function<int()> action;

  for (const auto& k : kinds) {
    CLI::App* cmd = app.add_subcommand(k.kind, "experiment kind " + k.kind);
    if (!k.alias.empty()) cmd->alias(k.alias);
    cmd->require_subcommand(1);
    const std::string kind = k.kind;
    CLI::App* run = cmd->add_subcommand("run", "run and write results, CSV summary and manifest");
    add_run_options(run, run_args);
    run->callback([&, kind] { action = [&, kind] { return do_run(run_args, kind, true); }; });
    CLI::App* chk = cmd->add_subcommand("check", "run and report assertion failures");
    add_run_options(chk, run_args);
    if (kind == "dual-check") {
      chk->add_option("--spec", spec_path, "cylinder spec (JSON); checks one cylinder");
      chk->add_option("--dist", dist_arg, "distribution (inline JSON or file)");
      chk->add_option("--reps", dual_reps, "replicates")->check(CLI::PositiveNumber);
      chk->get_option("--config")->required(false);
      chk->callback([&] {
        action = [&] {
          if (!spec_path.empty())
            return dual_check(spec_path, dist_arg, dual_reps, run_args.seed.value_or(dual_seed),
                              run_args.threads > 0 ? run_args.threads : dual_threads);
          if (run_args.config.empty()) throw CliError("dual check needs --spec or --config");
          return do_run(run_args, "dual-check", false);
        };
      });
    } else if (kind == "glue-check") {
      chk->add_option("--kind", glue_kind, "gluing construction")->check(CLI::IsMember({"phi", "triangle", "slab"}));
      chk->callback([&] {
        action = [&] {
          std::string extra = glue_kind.empty() ? "{}" : nlohmann::json{{"glue", {{"kind", glue_kind}}}}.dump();
          return do_run(run_args, "glue-check", false, extra);
        };
      });
    } else {
      chk->callback([&, kind] { action = [&, kind] { return do_run(run_args, kind, false); }; });
    }
    CLI::App* rep = cmd->add_subcommand("report", "summarize a result directory");
    rep->add_option("--out,--dir", report_dir, "result directory")->required();
    rep->add_option("--config", run_args.config, "ignored; accepted for symmetry");
    rep->callback([&] { action = [&] { return do_report(report_dir); }; });

    if (kind == "geometry") {
      CLI::App* dump = cmd->add_subcommand("dump", "vertices, edges and labels as JSON lines");
      dump->add_option("--spec", spec_path, "cylinder spec (JSON)")->required();
      dump->callback([&] { action = [&] { return geometry_dump(spec_path); }; });
    }
    if (kind == "flow") {
      CLI::App* solve = cmd->add_subcommand("solve", "max flow of a stored field");
      solve->add_option("--net", net_path, "net file (JSON)")->required();
      solve->callback([&] { action = [&] { return flow_solve(net_path); }; });
    }
  }

  CLI::App* env = app.add_subcommand("env", "capacity fields");
  env->require_subcommand(1);
  CLI::App* smp = env->add_subcommand("sample", "sample a capacity field to a binary file");
  smp->add_option("--config", run_args.config, "experiment config (JSON)")->required();
  smp->add_option("--spec", env_spec, "cylinder spec; default: template at the first n");
  smp->add_option("--out", env_out, "field file")->required();
  smp->add_option("--seed", env_seed, "override the config seed");
  smp->add_option("--replicate", replicate, "replicate index");
  smp->callback([&] { action = [&] { return env_sample(run_args.config, env_spec, env_out, env_seed, replicate); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }
  try {
    exit_code = action ? action() : kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return exit_code;
}
