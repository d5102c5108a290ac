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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <random>

#include "tiltedflow/environment.hpp"

using namespace tiltedflow;

TEST(Philox, KnownAnswerVectors) {
  // Reference vectors published with the Random123 library.
  auto a = philox4x32({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(a, (std::array<uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  auto b = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(b, (std::array<uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  auto c = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(c, (std::array<uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Quantize, RoundsHalfUpAndGuardsOverflow) {
  EXPECT_EQ(quantize(1.0), kFixedScale);
  EXPECT_EQ(quantize(0.5 / double(kFixedScale)), 1);
  EXPECT_EQ(quantize(0.49 / double(kFixedScale)), 0);
  EXPECT_EQ(quantize(3.0), 3 * kFixedScale);
  try {
    quantize(std::ldexp(1.0, 24));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OverflowRisk);
  }
}

TEST(Sample, ConstantGivesExactScale) {
  std::vector<uint64_t> keys(1000);
  std::iota(keys.begin(), keys.end(), 0);
  CapacityField f = sample(DistributionSpec::constant(1.0), 5, 0, keys);
  for (Capacity v : f.values) EXPECT_EQ(v, kFixedScale);
}

TEST(Sample, TwoAtomValuesAndFrequency) {
  DistributionSpec d = DistributionSpec::two_atom(1.0, 3.0, 0.5);
  const int64_t n = 1000000;
  int64_t hits = 0;
  for (int64_t k = 0; k < n; ++k) {
    Capacity v = sample_edge(d, 77, 3, uint64_t(k));
    ASSERT_TRUE(v == kFixedScale || v == 3 * kFixedScale);
    hits += v == 3 * kFixedScale;
  }
  double phat = double(hits) / double(n);
  double sigma = std::sqrt(0.25 / double(n));
  EXPECT_LE(std::fabs(phat - 0.5), 3 * sigma);
}

TEST(Sample, PureInSeedReplicateAndKey) {
  DistributionSpec d = DistributionSpec::shifted_exponential(0.5, 2.0);
  std::vector<uint64_t> keys(500);
  std::iota(keys.begin(), keys.end(), 1000);
  CapacityField f = sample(d, 9, 4, keys);
  std::vector<uint64_t> perm = keys;
  std::mt19937_64 rng(1);
  std::shuffle(perm.begin(), perm.end(), rng);
  CapacityField g = sample(d, 9, 4, perm);
  for (size_t i = 0; i < perm.size(); ++i) EXPECT_EQ(g.values[i], f.values[size_t(perm[i] - 1000)]);
  CapacityField other = sample(d, 9, 5, keys);
  EXPECT_NE(other.values, f.values);
}

namespace {

// Kolmogorov distance between the empirical and the specified CDF, evaluated
// at sample points from both sides.
double ks_distance(const DistributionSpec& d, std::vector<double> xs, bool discrete) {
  std::sort(xs.begin(), xs.end());
  const double n = double(xs.size());
  double worst = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i + 1 < xs.size() && xs[i + 1] == xs[i]) continue;  // last index of a tie block
    double fn = double(i + 1) / n;
    worst = std::max(worst, std::fabs(fn - d.cdf(xs[i])));
    if (!discrete) {
      size_t first = i;
      while (first > 0 && xs[first - 1] == xs[i]) --first;
      worst = std::max(worst, std::fabs(double(first) / n - d.cdf(xs[i])));
    }
  }
  return worst;
}

}  // namespace

TEST(Sample, EmpiricalCdfWithinDkwBand) {
  const int64_t n = 100000;
  const double alpha = 1e-3;
  const double band = std::sqrt(std::log(2.0 / alpha) / (2.0 * double(n)));
  struct Case {
    DistributionSpec d;
    bool discrete;
  };
  std::vector<Case> cases{{DistributionSpec::two_atom(1.0, 3.0, 0.3), true},
                          {DistributionSpec::bernoulli_like(2.0, 0.7), true},
                          {DistributionSpec::shifted_exponential(1.0, 1.5), false},
                          {DistributionSpec::pareto(2.5), false},
                          {DistributionSpec::uniform(0.5, 2.0), false},
                          {DistributionSpec::constant(1.25), true}};
  for (const auto& c : cases) {
    std::vector<double> xs;
    xs.reserve(size_t(n));
    for (int64_t k = 0; k < n; ++k) xs.push_back(dequantize(sample_edge(c.d, 2024, 0, uint64_t(k))));
    // Quantization moves continuous draws by at most half a fixed-point unit.
    double slack = c.discrete ? 0.0 : 1e-5;
    EXPECT_LE(ks_distance(c.d, xs, c.discrete), band + slack) << c.d.name();
  }
}

TEST(Sample, EssentialInfimumAndAtom) {
  for (const auto& d : {DistributionSpec::two_atom(1.0, 3.0, 0.5), DistributionSpec::shifted_exponential(0.75, 1.0),
                        DistributionSpec::uniform(0.25, 1.0), DistributionSpec::bernoulli_like(1.0, 0.8)}) {
    const Capacity floor = quantize(d.ess_inf());
    Capacity lo = std::numeric_limits<Capacity>::max();
    int64_t at_floor = 0;
    const int64_t n = 100000;
    for (int64_t k = 0; k < n; ++k) {
      Capacity v = sample_edge(d, 31, 0, uint64_t(k));
      lo = std::min(lo, v);
      at_floor += v == floor;
    }
    EXPECT_GE(lo, floor) << d.name();
    if (d.atom_at_inf() > 0.0) {
      double expect = d.atom_at_inf() * double(n);
      EXPECT_LE(std::fabs(double(at_floor) - expect), 5.0 * std::sqrt(expect)) << d.name();
    } else {
      // Continuous at the floor: hitting the quantized floor needs a draw within half a unit.
      EXPECT_LE(at_floor, 5) << d.name();
    }
  }
}

TEST(Hypotheses, ParetoTruthTable) {
  auto two = validate_hypotheses(DistributionSpec::pareto(2.0), HeightSchedule::linear(1.0), 1.0);
  EXPECT_TRUE(two.f2);
  EXPECT_FALSE(two.f3);
  EXPECT_FALSE(two.f4);
  auto one = validate_hypotheses(DistributionSpec::pareto(1.0), HeightSchedule::linear(1.0), 1.0);
  EXPECT_FALSE(one.f2);
  EXPECT_FALSE(one.theorems.at("tau_lln"));
  EXPECT_FALSE(one.theorems.at("phi_lln"));
}

TEST(Hypotheses, BernoulliWithLinearSchedule) {
  const double l = 3.0;
  auto r = validate_hypotheses(DistributionSpec::bernoulli_like(1.0, 0.8), HeightSchedule::power(1.0, 1.0), l);
  EXPECT_TRUE(r.f1);
  EXPECT_EQ(r.h1, Truth::Yes);
  EXPECT_EQ(r.h2, Truth::Yes);
  EXPECT_EQ(r.h4, Truth::Yes);
  EXPECT_NEAR(r.tan_alpha, 2.0 / l, 1e-12);
  EXPECT_EQ(r.fh1, Truth::Yes);
  EXPECT_EQ(r.fh2, Truth::Yes);
  auto low = validate_hypotheses(DistributionSpec::bernoulli_like(1.0, 0.3), HeightSchedule::linear(1.0), l);
  EXPECT_FALSE(low.f1);
  EXPECT_FALSE(low.theorems.at("nu_positive"));
}

TEST(Hypotheses, ScheduleLimits) {
  auto ls = HeightSchedule::log_scaled(1.0);
  EXPECT_EQ(ls.h1(), Truth::Yes);
  EXPECT_EQ(ls.h2(), Truth::Yes);
  EXPECT_EQ(ls.h3(), Truth::Yes);
  auto sq = HeightSchedule::power(1.0, 0.5);
  EXPECT_EQ(sq.h1(), Truth::Yes);
  EXPECT_EQ(sq.h3(), Truth::No);
  auto lin = HeightSchedule::linear(2.0);
  EXPECT_EQ(lin.h3(), Truth::No);
  EXPECT_NEAR(lin(8), 16.0, 1e-12);
  auto alt = HeightSchedule::alternating(HeightSchedule::linear(1.0), HeightSchedule::power(1.0, 2.0));
  EXPECT_NEAR(alt(4), 4.0, 1e-12);
  EXPECT_NEAR(alt(5), 25.0, 1e-12);
  auto r = validate_hypotheses(DistributionSpec::two_atom(1, 3, 0.5), alt, 1.0);
  EXPECT_EQ(r.h4, Truth::No);
  EXPECT_EQ(r.fh1, Truth::Unknown);
}

TEST(Field, BinaryRoundTrip) {
  std::vector<uint64_t> keys{3, 17, 99, 1ull << 62};
  CapacityField f = sample(DistributionSpec::uniform(0.0, 4.0), 8, 2, keys);
  auto path = std::filesystem::temp_directory_path() / "tiltedflow_field_test.bin";
  write_field(path.string(), f, "{\"seed\":8}");
  std::string header;
  CapacityField g = read_field(path.string(), &header);
  std::filesystem::remove(path);
  EXPECT_EQ(header, "{\"seed\":8}");
  EXPECT_EQ(g.keys, f.keys);
  EXPECT_EQ(g.values, f.values);
}

TEST(Field, RejectsForeignFile) {
  auto path = std::filesystem::temp_directory_path() / "tiltedflow_not_a_field.bin";
  {
    std::FILE* fp = std::fopen(path.string().c_str(), "wb");
    std::fputs("hello world, not a field", fp);
    std::fclose(fp);
  }
  try {
    read_field(path.string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
  std::filesystem::remove(path);
}
