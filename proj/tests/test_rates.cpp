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

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "tiltedflow/rates.hpp"

using namespace tiltedflow;

namespace {

constexpr double kPi = std::numbers::pi;

double oracle_gamma(double t, double theta) {
  return (std::fabs(std::cos(t)) + std::fabs(std::sin(t))) / std::cos(t - theta);
}

// Minimum of Gamma over [lo, hi]: dense grid, then golden-section search in the best cell pair.
double oracle_gamma_min(double theta, double lo, double hi) {
  const int steps = 200000;
  double h = (hi - lo) / steps;
  int best = 0;
  for (int i = 1; i <= steps; ++i)
    if (oracle_gamma(lo + h * i, theta) < oracle_gamma(lo + h * best, theta)) best = i;
  double a = std::max(lo, lo + h * (best - 1)), b = std::min(hi, lo + h * (best + 1));
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 200; ++it) {
    double x1 = b - r * (b - a), x2 = a + r * (b - a);
    if (oracle_gamma(x1, theta) <= oracle_gamma(x2, theta)) b = x2;
    else a = x1;
  }
  return std::min({oracle_gamma(a, theta), oracle_gamma(lo + h * best, theta)});
}

double psi_quadratic(double c, double nu, double floor, double x) {
  if (x <= floor) return INFINITY;
  if (x >= nu) return 0.0;
  return c * (nu - x) * (nu - x) / (x - floor);
}

}  // namespace

TEST(Gamma, AxisWindowGivesDelta) {
  for (double hw : {0.1, 0.5, 1.2}) {
    EXPECT_NEAR(delta_theta_h(0.7, 0.0, Window{-hw, hw}), 0.7, 1e-15);
    EXPECT_NEAR(gamma_infimum(0.0, Window{-hw, hw}).second, 0.0, 1e-15);
  }
}

TEST(Gamma, TiltedWindowMatchesDenseGrid) {
  const double theta = kPi / 8;
  for (double hw : {0.1, 0.3, 0.5, 1.0, 1.5}) {
    double lib = gamma_infimum(theta, Window{theta - hw, theta + hw}).first;
    EXPECT_NEAR(lib, oracle_gamma_min(theta, theta - hw, theta + hw), 1e-9) << hw;
  }
  EXPECT_EQ(Gamma(kPi / 2 + 0.3, 0.3), INFINITY);
}

TEST(ICurve, ShapeViolations) {
  auto expect_shape = [](auto fn) {
    try {
      fn();
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ShapeViolation);
    }
  };
  expect_shape([] { ICurve::quadratic(-1.0, 1.0, 0.2); });
  expect_shape([] { ICurve::quadratic(1.0, 0.2, 0.5); });
  expect_shape([] { ICurve::piecewise_linear({{0.2, 1.0}, {0.5, 2.0}, {1.0, 0.0}}); });  // increasing
  expect_shape([] { ICurve::piecewise_linear({{0.2, 1.0}, {0.5, 0.9}, {1.0, 0.0}}); });  // concave
  expect_shape([] { ICurve::piecewise_linear({{0.2, 1.0}, {1.0, 0.1}}); });              // nonzero at nu
  EXPECT_NO_THROW(ICurve::piecewise_linear({{0.2, 2.0}, {0.5, 0.5}, {1.0, 0.0}}));
}

TEST(ICurve, OneSidedLimits) {
  ICurve q = ICurve::quadratic(2.0, 1.0, 0.25);
  EXPECT_EQ(q.right_limit(0.25), INFINITY);
  EXPECT_NEAR(q.right_limit(0.5), psi_quadratic(2.0, 1.0, 0.25, 0.5), 1e-6);
  EXPECT_NEAR(q.left_limit(1.0), 0.0, 1e-9);
  ICurve p = ICurve::piecewise_linear({{0.3, 1.5}, {0.6, 0.3}, {0.9, 0.0}});
  EXPECT_NEAR(p.right_limit(0.3), 1.5, 1e-6);
  EXPECT_NEAR(p.right_limit(0.45), 0.9, 1e-6);
}

TEST(RateAlgebra, KTildeMatchesPerspectiveOracle) {
  const double c = 1.5, nu = 1.0, floor = 0.3;
  ICurve prof = ICurve::quadratic(c, nu, floor);
  for (double theta : {0.0, kPi / 8, kPi / 5, kPi / 4}) {
    for (double hw : {0.2, 0.6}) {
      RateAlgebraContext ctx = make_context(theta, hw, prof);
      double gmin = oracle_gamma_min(theta, theta - hw, theta + hw);
      EXPECT_NEAR(ctx.eta(), nu * gmin, 1e-9);
      EXPECT_NEAR(ctx.delta_theta_h(), floor * gmin, 1e-9);
      for (double frac : {0.35, 0.5, 0.7, 0.9, 0.99}) {
        double lambda = frac * nu * gmin;
        double want = gmin * psi_quadratic(c, nu, floor, lambda / gmin);
        double got = K_tilde(ctx, lambda);
        if (std::isinf(want)) {
          EXPECT_TRUE(std::isinf(got)) << theta << " " << lambda;
        } else {
          EXPECT_NEAR(got, want, 1e-6 * (1.0 + want)) << theta << " " << hw << " " << lambda;
        }
      }
      EXPECT_NEAR(K_tilde(ctx, 1.1 * ctx.eta()), 0.0, 1e-9);
      EXPECT_EQ(K(ctx, 1.1 * ctx.eta()), INFINITY);
    }
  }
}

TEST(RateAlgebra, KEqualsJAtAxisAngle) {
  for (const ICurve& prof : {ICurve::quadratic(1.0, 1.2, 0.4), ICurve::piecewise_linear({{0.3, 2.0}, {0.8, 0.4}, {1.0, 0.0}})}) {
    RateAlgebraContext ctx = make_context(0.0, 0.5, prof);
    for (int i = 0; i <= 40; ++i) {
      double lambda = 1.5 * prof.nu * double(i) / 40.0;
      double k = K(ctx, lambda), j = J(prof, lambda);
      if (std::isinf(j)) {
        EXPECT_TRUE(std::isinf(k)) << lambda;
      } else {
        EXPECT_NEAR(k, j, 1e-6 * (1.0 + j)) << lambda;
      }
    }
  }
}

TEST(Lambda, HomogeneityAxisAndSubadditivity) {
  ICurve prof = ICurve::quadratic(1.0, 1.0, 0.2);
  const double lambda = 0.6;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.05, 2.0);
  for (int i = 0; i < 100; ++i) {
    double x = u(rng), y = u(rng);
    EXPECT_NEAR(Lambda(prof, lambda, 2 * x, 2 * y), 2 * Lambda(prof, lambda, x, y),
                1e-9 * (1.0 + Lambda(prof, lambda, x, y)));
  }
  EXPECT_NEAR(Lambda(prof, lambda, 1.0, 0.0), psi_quadratic(1.0, 1.0, 0.2, lambda), 1e-6);
  EXPECT_NEAR(Lambda(prof, lambda, 0.0, 3.0), 3.0 * psi_quadratic(1.0, 1.0, 0.2, lambda), 1e-6);
  for (double l : {0.4, 0.8}) {
    SubadditivityReport rep = check_Lambda_subadditive(prof, l, 1000, 17);
    EXPECT_EQ(rep.pairs, 1000);
    EXPECT_EQ(rep.failures, 0) << "worst gap " << rep.worst_gap;
  }
  try {
    Lambda(prof, lambda, 0.0, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroVector);
  }
}

TEST(TiltGrid, CompleteAndSorted) {
  Direction theta = Direction::make(1, 2);
  const double hw = 0.4;
  auto grid = tilt_grid(theta, hw, 4);
  std::set<std::pair<int64_t, int64_t>> got;
  double prev = -INFINITY;
  for (const auto& d : grid) {
    double off = std::remainder(d.theta() - theta.theta(), kPi);
    EXPECT_LE(std::fabs(off), hw + 1e-12);
    EXPECT_GE(off, prev);
    prev = off;
    got.insert({d.p, d.q});
  }
  size_t want = 0;
  for (int64_t p = -4; p <= 4; ++p)
    for (int64_t q = -4; q <= 4; ++q) {
      if ((p == 0 && q == 0) || std::gcd(std::llabs(p), std::llabs(q)) != 1) continue;
      Direction d = Direction::make(p, q);
      if (d.p != p || d.q != q) continue;  // count each line once
      if (std::fabs(std::remainder(d.theta() - theta.theta(), kPi)) <= hw + 1e-12) ++want;
    }
  EXPECT_EQ(got.size(), want);
  EXPECT_TRUE(got.count({1, 2}));
}

TEST(RateRow, CensoringAndRate) {
  RateRow r = rate_row(Direction::make(0, 1), 8, 8.0, 0.5, 0, 1000);
  EXPECT_TRUE(r.censored);
  EXPECT_NEAR(r.rate, std::log(1000.0) / 8.0, 1e-15);
  RateRow s = rate_row(Direction::make(0, 1), 8, 8.0, 0.5, 10, 1000);
  EXPECT_FALSE(s.censored);
  EXPECT_NEAR(s.rate, -std::log(0.01) / 8.0, 1e-15);
  EXPECT_GT(s.slack, 0.0);
}

TEST(ParallelFor, DeterministicSlotsAndErrors) {
  std::vector<uint64_t> one(1000), many(1000);
  auto fill = [](std::vector<uint64_t>& out) {
    return [&out](int64_t i) {
      std::mt19937_64 rng{uint64_t(i)};
      out[size_t(i)] = rng();
    };
  };
  parallel_for(1000, 1, fill(one));
  parallel_for(1000, 8, fill(many));
  EXPECT_EQ(one, many);
  EXPECT_THROW(parallel_for(100, 4,
                            [](int64_t i) {
                              if (i == 37) fail(ErrorCode::InvalidArgument, "boom");
                            }),
               Error);
}

TEST(Simulation, ConstantFieldGivesExactNu) {
  SegmentTemplate t = SegmentTemplate::unit(Direction::make(0, 1));
  SimOptions opt;
  NuEstimate est = estimate_nu(t, DistributionSpec::constant(1.0), HeightSchedule::linear(1.0), {4, 8}, 3, opt);
  ASSERT_EQ(est.points.size(), 2u);
  for (const auto& p : est.points) {
    EXPECT_NEAR(p.mean, double(p.n + 1) / double(p.n), 1e-12);
    EXPECT_NEAR(p.stderr_, 0.0, 1e-12);
  }
}

TEST(Simulation, ThreadCountDoesNotChangeSamples) {
  SegmentTemplate t = SegmentTemplate::unit(Direction::make(1, 2));
  DistributionSpec d = DistributionSpec::two_atom(1.0, 3.0, 0.5);
  CylinderSpec s = t.at(6, 6.0);
  SimOptions one, four;
  one.seed = four.seed = 12;
  four.threads = 4;
  EXPECT_EQ(sample_flows(FlowKind::Phi, s, 6.0 * t.length(), d, 16, one),
            sample_flows(FlowKind::Phi, s, 6.0 * t.length(), d, 16, four));
}

TEST(Simulation, RateBelowFloorHasNoHits) {
  SegmentTemplate t = SegmentTemplate::unit(Direction::make(0, 1));
  DistributionSpec d = DistributionSpec::two_atom(1.0, 3.0, 0.5);
  RateTable tab = estimate_rate(FlowKind::Tau, t, d, HeightSchedule::linear(1.0), {0.5, 0.9}, {4, 8}, 50, SimOptions{});
  for (const auto& r : tab.rows) {
    EXPECT_EQ(r.hits, 0);
    EXPECT_TRUE(r.censored);
  }
  EXPECT_TRUE(tab.fully_censored());
}
