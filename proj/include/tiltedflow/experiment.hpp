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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tiltedflow/gluing.hpp"
#include "tiltedflow/rates.hpp"

namespace tiltedflow {

extern const char* const kCodeVersion;

struct GlueSettings {
  std::string kind = "phi";  // phi | triangle | slab
  GluingConfig config;
  Direction tilt;
  Rational k = Rational(1, 2);  // slab boundary condition
  std::vector<RPoint> triangle;  // a, b, c
};

struct EtaSettings {
  int64_t n = 32;
  int64_t grid_bound = 4;
  double half_width = -1.0;  // negative: atan of the schedule's limsup ratio
};

struct AlgebraSettings {
  ICurve profile = ICurve::quadratic(1.0, 2.0, 1.0);
  double theta = 0.0;
  double half_width = 0.7853981633974483;
  std::vector<double> lambdas;
  int64_t pairs = 1000;
};

struct ExperimentConfig {
  std::string kind = "geometry";  // geometry flow dual-check glue-check nu eta rate algebra-check
  DistributionSpec dist = DistributionSpec::two_atom(1.0, 3.0, 0.5);
  HeightSchedule schedule = HeightSchedule::linear(1.0);
  SegmentTemplate tmpl = SegmentTemplate::unit(Direction::make(1, 0));
  std::vector<int64_t> n_grid{8};
  std::vector<double> lambda_grid;
  int64_t reps = 10;
  uint64_t seed = 1;
  int threads = 1;
  std::string out = "out";
  std::string rate_kind = "tau";
  GlueSettings glue;
  EtaSettings eta;
  AlgebraSettings algebra;

  void validate() const;
};

// Canonical JSON text (sorted keys, two-space indent); parse(dump(c)) == c.
std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const std::string& text);
std::string sha256_hex(const std::string& data);

struct RunResult {
  std::vector<std::string> rows;  // JSON lines
  std::string csv;
  int64_t checks = 0;
  int64_t failures = 0;
  std::vector<std::string> failure_messages;
  std::string config_hash;
};

// Evaluates the configured experiment; pure in (config, seed).
RunResult execute(const ExperimentConfig& cfg);

struct Manifest {
  std::string config_hash;
  std::string code_version;
  std::vector<std::pair<std::string, std::string>> digests;  // file name, sha-256
  double seconds = 0.0;
  bool partial = false;
  int64_t checks = 0;
  int64_t failures = 0;
};

// Writes results.jsonl, summary.csv, config.json and manifest.json to dir.
Manifest write_outputs(const ExperimentConfig& cfg, const RunResult& res, const std::string& dir, double seconds);
// Human-readable summary of a result directory; MissingManifest without one.
std::string report(const std::string& dir);

}  // namespace tiltedflow
