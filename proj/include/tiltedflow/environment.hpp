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

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "tiltedflow/flow.hpp"

namespace tiltedflow {

constexpr int kFixedBits = 20;
constexpr Capacity kFixedScale = Capacity(1) << kFixedBits;
constexpr Capacity kFixedMax = Capacity(1) << 43;

// Round half up to the fixed-point grid; OverflowRisk above 2^43.
Capacity quantize(double x);
inline double dequantize(Capacity c) { return double(c) / double(kFixedScale); }

// Philox4x32 with 10 rounds.
std::array<uint32_t, 4> philox4x32(std::array<uint32_t, 4> ctr, std::array<uint32_t, 2> key);
// Uniform in (0,1) addressed by (seed, replicate, edge key, stream).
double uniform01(uint64_t seed, uint64_t replicate, uint64_t edge_key, uint32_t stream = 0);

enum class Family { TwoAtom, BernoulliLike, ShiftedExponential, Pareto, Uniform, Constant };

struct DistributionSpec {
  Family family = Family::Constant;
  // TwoAtom: t = b w.p. p, delta otherwise. BernoulliLike: t = c w.p. p, 0
  // otherwise. ShiftedExponential: delta + Exp(rate). Pareto: P(t > x) = x^-shape
  // for x >= 1. Uniform on [lo, hi]. Constant c.
  double delta = 0.0;
  double b = 0.0;
  double p = 0.0;
  double c = 1.0;
  double rate = 1.0;
  double shape = 2.0;
  double lo = 0.0;
  double hi = 1.0;

  static DistributionSpec two_atom(double delta, double b, double p);
  static DistributionSpec bernoulli_like(double c, double p);
  static DistributionSpec shifted_exponential(double delta, double rate);
  static DistributionSpec pareto(double shape);
  static DistributionSpec uniform(double lo, double hi);
  static DistributionSpec constant(double c);

  void validate() const;
  double sample(double u) const;  // inverse-CDF style map from (0,1)
  double cdf(double x) const;
  double ess_inf() const;         // delta = inf{x : F(x) > 0}
  double atom_at_inf() const;     // P(t = delta)
  double mass_at_zero() const;    // F(0)
  std::string name() const;
};

enum class Truth { No = 0, Yes = 1, Unknown = 2 };
const char* truth_name(Truth t);

struct HeightSchedule {
  enum class Kind { Power, Linear, LogScaled, Custom, Alternating };
  Kind kind = Kind::Linear;
  double c = 1.0;
  double beta = 1.0;
  std::map<int64_t, double> table;
  std::shared_ptr<HeightSchedule> even;
  std::shared_ptr<HeightSchedule> odd;

  static HeightSchedule power(double c, double beta);
  static HeightSchedule linear(double c);
  static HeightSchedule log_scaled(double c);
  static HeightSchedule custom(std::map<int64_t, double> table);
  static HeightSchedule alternating(const HeightSchedule& even, const HeightSchedule& odd);

  double operator()(int64_t n) const;
  // lim of 2 h(n) / (n l) along the schedule; +inf allowed. For Alternating
  // these are the two subsequence limits (liminf, limsup).
  std::pair<double, double> ratio_limits(double l) const;
  Truth h1() const;
  Truth h2() const;
  Truth h3() const;
  std::string name() const;
};

struct HypothesisReport {
  bool f1 = false, f2 = false, f3 = false, f4 = false, f5 = false;
  Truth h1 = Truth::Unknown, h2 = Truth::Unknown, h3 = Truth::Unknown, h4 = Truth::Unknown;
  double tan_alpha = 0.0;  // valid when h4 == Yes; +inf allowed
  Truth fh1 = Truth::Unknown, fh2 = Truth::Unknown;
  std::map<std::string, bool> theorems;
  std::vector<std::string> notes;
};

HypothesisReport validate_hypotheses(const DistributionSpec& dist, const HeightSchedule& schedule, double l);

struct CapacityField {
  uint64_t seed = 0;
  uint64_t replicate = 0;
  DistributionSpec dist;
  std::vector<uint64_t> keys;
  std::vector<Capacity> values;
};

// Capacity of one lattice edge; a pure function of its arguments.
Capacity sample_edge(const DistributionSpec& dist, uint64_t seed, uint64_t replicate, uint64_t edge_key);
CapacityField sample(const DistributionSpec& dist, uint64_t seed, uint64_t replicate,
                     const std::vector<uint64_t>& edge_keys);
std::vector<Capacity> sample_cylinder(const DistributionSpec& dist, uint64_t seed, uint64_t replicate,
                                      const Cylinder& cyl);

void write_field(const std::string& path, const CapacityField& field, const std::string& header_json);
CapacityField read_field(const std::string& path, std::string* header_json = nullptr);

}  // namespace tiltedflow
