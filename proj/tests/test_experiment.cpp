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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tiltedflow/experiment.hpp"

using namespace tiltedflow;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

fs::path fresh_dir(const std::string& name) {
  fs::path d = fs::temp_directory_path() / ("tiltedflow_" + name);
  fs::remove_all(d);
  return d;
}

ExperimentConfig parse(const std::string& text) { return config_from_json(text); }

}  // namespace

TEST(Sha256, KnownAnswer) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Config, RoundTripIsByteIdentical) {
  const char* configs[] = {
      R"({"kind":"geometry","n_grid":[4,8]})",
      R"({"kind":"nu","dist":{"family":"shifted_exponential","delta":0.5,"rate":2},"n_grid":[4],"reps":3})",
      R"({"kind":"rate","dist":{"family":"two_atom","delta":1,"b":3,"p":0.5},"lambda_grid":[0.5,1.5],"rate_kind":"phi"})",
      R"({"kind":"eta","schedule":{"kind":"power","c":2,"beta":0.5},"eta":{"n":8,"grid_bound":2}})",
      R"({"kind":"glue-check","glue":{"kind":"triangle","tilt":[1,1],"triangle":[["0","0"],["2","0"],["1","1"]]}})",
      R"({"kind":"algebra-check","algebra":{"profile":{"kind":"piecewise_linear","points":[[0.5,2],[1,0.5],[2,0]]},"theta":0.3}})",
      R"({"kind":"flow","template":{"dir":[2,1],"a":["1/3","0"],"b":["4/3","-2"],"offset":["0","0"]}})",
      R"({"kind":"nu","schedule":{"kind":"alternating","even":{"kind":"linear","c":1},"odd":{"kind":"log_scaled","c":1}}})",
  };
  for (const char* text : configs) {
    std::string once = config_to_json(parse(text));
    EXPECT_EQ(config_to_json(parse(once)), once) << text;
  }
}

TEST(Config, HypothesisFailureNamesFieldAndCondition) {
  try {
    parse(R"({"kind":"nu","dist":{"family":"pareto","shape":1}})").validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
    std::string msg = e.what();
    EXPECT_NE(msg.find("(F2)"), std::string::npos) << msg;
    EXPECT_NE(msg.find("dist"), std::string::npos) << msg;
  }
}

TEST(Config, RejectsUnknownField) {
  try {
    parse(R"({"kind":"nu","replicates":3})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
    EXPECT_NE(std::string(e.what()).find("replicates"), std::string::npos);
  }
}

TEST(Execute, ThreadCountDoesNotChangeOutputs) {
  for (const char* kind : {"flow", "nu", "rate", "dual-check"}) {
    nlohmann::json j{{"kind", kind}, {"n_grid", {4, 8}}, {"reps", 6}, {"seed", 5}, {"lambda_grid", {1.2, 2.0}}};
    ExperimentConfig one = parse(j.dump());
    j["threads"] = 4;
    ExperimentConfig four = parse(j.dump());
    RunResult a = execute(one), b = execute(four);
    EXPECT_EQ(a.rows, b.rows) << kind;
    EXPECT_EQ(a.csv, b.csv) << kind;
    EXPECT_EQ(a.config_hash, b.config_hash) << kind;
    EXPECT_EQ(a.failures, 0) << kind;
  }
}

TEST(Execute, SeedChangesRows) {
  RunResult a = execute(parse(R"({"kind":"flow","n_grid":[4],"reps":4,"seed":1})"));
  RunResult b = execute(parse(R"({"kind":"flow","n_grid":[4],"reps":4,"seed":2})"));
  EXPECT_NE(a.rows, b.rows);
  EXPECT_NE(a.config_hash, b.config_hash);
}

TEST(Outputs, ManifestDigestsMatchFiles) {
  ExperimentConfig cfg = parse(R"({"kind":"nu","n_grid":[4],"reps":4})");
  RunResult res = execute(cfg);
  fs::path dir = fresh_dir("outputs");
  Manifest m = write_outputs(cfg, res, dir.string(), 0.5);
  EXPECT_FALSE(m.partial);
  EXPECT_EQ(m.config_hash, res.config_hash);
  auto j = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(j["partial"], false);
  EXPECT_EQ(j["code_version"], kCodeVersion);
  ASSERT_FALSE(m.digests.empty());
  for (const auto& [name, digest] : m.digests) EXPECT_EQ(sha256_hex(slurp(dir / name)), digest) << name;
  EXPECT_EQ(config_to_json(parse(slurp(dir / "config.json"))), slurp(dir / "config.json"));
  fs::remove_all(dir);
}

TEST(Report, MissingManifest) {
  fs::path dir = fresh_dir("empty");
  fs::create_directories(dir);
  try {
    report(dir.string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingManifest);
  }
  fs::remove_all(dir);
}

TEST(Report, CensoredRowsRenderAsLowerBounds) {
  ExperimentConfig cfg =
      parse(R"({"kind":"rate","n_grid":[4],"reps":20,"lambda_grid":[0.5],"template":{"dir":[0,1]}})");
  RunResult res = execute(cfg);
  fs::path dir = fresh_dir("report");
  write_outputs(cfg, res, dir.string(), 0.1);
  std::string text = report(dir.string());
  EXPECT_NE(text.find("rate >= "), std::string::npos) << text;
  EXPECT_NE(text.find("(0/20)"), std::string::npos) << text;
  fs::remove_all(dir);
}
