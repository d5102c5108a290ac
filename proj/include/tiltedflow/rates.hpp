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

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "tiltedflow/environment.hpp"

namespace tiltedflow {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Simulation layer.

// Segment A = [a, b] in direction dir; the scaled cylinder uses n*A + offset.
struct SegmentTemplate {
  Direction dir;
  RPoint a{Rational(0), Rational(0)};
  RPoint b{Rational(0), Rational(0)};
  RPoint offset{Rational(0), Rational(0)};

  // A = [0, (q,-p)], the shortest lattice segment orthogonal to v(theta).
  static SegmentTemplate unit(const Direction& dir, const RPoint& offset = {Rational(0), Rational(0)});
  double length() const;  // l(A)
  CylinderSpec at(int64_t n, double h) const;
};

struct SimOptions {
  uint64_t seed = 1;
  int64_t first_replicate = 0;
  int threads = 1;
};

// Runs fn(i) for i in [0, count) on a worker pool; fn writes to slot i only.
void parallel_for(int64_t count, int threads, const std::function<void(int64_t)>& fn);

enum class FlowKind { Tau, Phi };

// Normalized values value/(n l(A)) of tau or phi for replicates
// first_replicate .. first_replicate + reps - 1.
std::vector<double> sample_flows(FlowKind kind, const CylinderSpec& spec, double nl, const DistributionSpec& dist,
                                 int64_t reps, const SimOptions& opt);

struct MeanEstimate {
  int64_t n = 0;
  double h = 0.0;
  int64_t reps = 0;
  double mean = 0.0;
  double stderr_ = 0.0;
};

MeanEstimate summarize(int64_t n, double h, const std::vector<double>& xs);

struct SubadditivityCheck {
  int64_t n = 0;
  double tau_n = 0.0;   // E[tau at n], unnormalized
  double tau_2n = 0.0;  // E[tau at 2n]
  double joint_stderr = 0.0;
  bool ok = false;      // tau_2n <= 2 tau_n + 2 joint_stderr
};

struct NuEstimate {
  Direction dir;
  double l = 1.0;
  std::vector<MeanEstimate> points;
  double nu_hat = 0.0;
  double nu_stderr = 0.0;
  std::vector<SubadditivityCheck> subadditivity;
};

NuEstimate estimate_nu(const SegmentTemplate& tmpl, const DistributionSpec& dist, const HeightSchedule& schedule,
                       const std::vector<int64_t>& n_grid, int64_t reps, const SimOptions& opt);

struct TiltEstimate {
  Direction dir;
  int64_t n = 0;       // scale used for this direction
  double nu = 0.0;
  double stderr_ = 0.0;
  double cos_factor = 1.0;  // cos(theta~ - theta)
  double ratio() const { return nu / cos_factor; }
};

struct EtaEstimate {
  double eta_hat = 0.0;
  double eta_stderr = 0.0;
  double eta_formula = 0.0;
  double formula_stderr = 0.0;
  Direction argmin;
  std::vector<TiltEstimate> grid;
  double combined_stderr() const;
  bool within(double k) const;
};

// Primitive directions with max(|p|,|q|) <= bound whose angle lies within
// half_width of theta (modulo pi), sorted by signed angle offset.
std::vector<Direction> tilt_grid(const Direction& theta, double half_width, int64_t bound);

EtaEstimate estimate_eta(const SegmentTemplate& tmpl, const DistributionSpec& dist, const HeightSchedule& schedule,
                         int64_t n, int64_t reps, const std::vector<Direction>& grid, const SimOptions& opt);

struct RateRow {
  Direction dir;
  int64_t n = 0;
  double lambda = 0.0;
  int64_t hits = 0;
  int64_t reps = 0;
  double rate = 0.0;    // -log(hits/reps)/(n l); the lower bound when censored
  bool censored = false;
  double slack = 0.0;   // one binomial standard error of rate (delta method)
};

struct RateTable {
  FlowKind kind = FlowKind::Tau;
  std::vector<RateRow> rows;
  // r(lambda, 2n) / r(lambda, n) where both are uncensored.
  std::vector<std::pair<RateRow, double>> surface_ratios;
  bool fully_censored() const;
};

// Lower-tail frequencies of value <= lambda n l(A).
RateTable estimate_rate(FlowKind kind, const SegmentTemplate& tmpl, const DistributionSpec& dist,
                        const HeightSchedule& schedule, const std::vector<double>& lambdas,
                        const std::vector<int64_t>& n_grid, int64_t reps, const SimOptions& opt);

RateRow rate_row(const Direction& dir, int64_t n, double nl, double lambda, int64_t hits, int64_t reps);

// Analytic layer over synthetic rate curves.

// Convex, non-increasing, +inf below floor, 0 from nu on.
struct ICurve {
  enum class Kind { Quadratic, PiecewiseLinear };
  Kind kind = Kind::Quadratic;
  double c = 1.0;       // Quadratic: c (nu - x)^2 / (x - floor) on (floor, nu)
  double nu = 1.0;
  double floor = 0.0;
  std::vector<std::pair<double, double>> points;  // PiecewiseLinear knots from floor to (nu, 0)

  static ICurve quadratic(double c, double nu, double floor);
  static ICurve piecewise_linear(std::vector<std::pair<double, double>> points);

  double operator()(double x) const;
  double right_limit(double x) const;
  double left_limit(double x) const;
  // x -> m * I(x / m).
  ICurve scaled(double m) const;
  // Throws ShapeViolation when a shape property fails on a grid.
  void validate() const;
};

// Limit of f at x from one side by geometric step shrinking; +inf above 1e12.
double one_sided_limit(const std::function<double(double)>& f, double x, bool from_right);

// |cos t| + |sin t|.
double manhattan_factor(double t);
// (|cos t~| + |sin t~|) / cos(t~ - theta); +inf when the cosine vanishes.
double Gamma(double theta_tilde, double theta);

struct Window {
  double lo = 0.0;
  double hi = 0.0;
};

// Infimum of Gamma over [lo, hi] and a minimizer, from the monotone branches.
std::pair<double, double> gamma_infimum(double theta, const Window& w);
double delta_theta_h(double delta, double theta, const Window& w);

// Synthetic family I_t~(x) = m(t~) psi(x / m(t~)), m = |cos| + |sin|.
struct RateAlgebraContext {
  double theta = 0.0;
  Window window;  // ad of the limit window, inside [theta - pi/2, theta + pi/2]
  ICurve profile;
  int grid_log2 = 10;

  ICurve curve(double theta_tilde) const;
  double delta() const { return profile.floor; }
  double nu(double theta_tilde) const;
  double eta() const;             // inf over the window of nu / cos
  double delta_theta_h() const;   // inf over the window of delta Gamma
  void validate() const;
};

RateAlgebraContext make_context(double theta, double half_width, const ICurve& profile);

double g_lambda(const RateAlgebraContext& ctx, double lambda, double theta_tilde);
double K_tilde(const RateAlgebraContext& ctx, double lambda);
double K(const RateAlgebraContext& ctx, double lambda);
// J(lambda) = I(lambda+) for lambda <= nu, +inf above.
double J(const ICurve& curve, double lambda);

double Lambda(const ICurve& profile, double lambda, double vx, double vy);

struct SubadditivityReport {
  int64_t pairs = 0;
  int64_t failures = 0;
  double worst_gap = 0.0;  // max of Lambda(u+v) - Lambda(u) - Lambda(v)
};

SubadditivityReport check_Lambda_subadditive(const ICurve& profile, double lambda, int64_t pairs, uint64_t seed);

}  // namespace tiltedflow
