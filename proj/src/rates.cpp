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

#include "tiltedflow/rates.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include "tiltedflow/dual.hpp"

namespace tiltedflow {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHuge = 1e12;

std::vector<Capacity> sample_raw(FlowKind kind, const CylinderSpec& spec, const DistributionSpec& dist,
                                 int64_t reps, const SimOptions& opt) {
  Cylinder cyl(spec);
  Arcs arcs = kind == FlowKind::Tau ? boundary_arcs(cyl, tau_condition(cyl)) : top_bottom_arcs(cyl);
  DualSolver solver(cyl, arcs);
  std::vector<Capacity> out(static_cast<size_t>(reps), 0);
  parallel_for(reps, opt.threads, [&](int64_t r) {
    auto caps = sample_cylinder(dist, opt.seed, uint64_t(opt.first_replicate + r), cyl);
    out[size_t(r)] = solver.value(caps);
  });
  return out;
}

// Signed angle of d relative to theta, reduced modulo pi to (-pi/2, pi/2].
double angle_offset(const Direction& d, const Direction& theta) {
  double x = d.theta() - theta.theta();
  while (x > kPi / 2) x -= kPi;
  while (x <= -kPi / 2) x += kPi;
  return x;
}

void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::HypothesisViolation, what + " does not hold");
}

}  // namespace

SegmentTemplate SegmentTemplate::unit(const Direction& dir, const RPoint& offset) {
  SegmentTemplate t;
  t.dir = dir;
  t.b = RPoint{Rational(dir.q), Rational(-dir.p)};
  t.offset = offset;
  return t;
}

double SegmentTemplate::length() const {
  return std::hypot((b.x - a.x).to_double(), (b.y - a.y).to_double());
}

CylinderSpec SegmentTemplate::at(int64_t n, double h) const {
  CylinderSpec s;
  s.dir = dir;
  s.n = n;
  Rational inv(1, n);
  s.a = RPoint{a.x + offset.x * inv, a.y + offset.y * inv};
  s.b = RPoint{b.x + offset.x * inv, b.y + offset.y * inv};
  s.h = Rational::approximate(h, 10000);
  s.validate();
  return s;
}

void parallel_for(int64_t count, int threads, const std::function<void(int64_t)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int64_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (;;) {
      int64_t i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  int k = int(std::min<int64_t>(threads, count));
  for (int t = 0; t < k; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::vector<double> sample_flows(FlowKind kind, const CylinderSpec& spec, double nl, const DistributionSpec& dist,
                                 int64_t reps, const SimOptions& opt) {
  auto raw = sample_raw(kind, spec, dist, reps, opt);
  std::vector<double> out;
  out.reserve(raw.size());
  for (Capacity v : raw) out.push_back(dequantize(v) / nl);
  return out;
}

MeanEstimate summarize(int64_t n, double h, const std::vector<double>& xs) {
  MeanEstimate m;
  m.n = n;
  m.h = h;
  m.reps = int64_t(xs.size());
  if (xs.empty()) return m;
  double sum = 0.0;
  for (double x : xs) sum += x;
  m.mean = sum / double(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.stderr_ = std::sqrt(ss / double(xs.size() - 1) / double(xs.size()));
  }
  return m;
}

NuEstimate estimate_nu(const SegmentTemplate& tmpl, const DistributionSpec& dist, const HeightSchedule& schedule,
                       const std::vector<int64_t>& n_grid, int64_t reps, const SimOptions& opt) {
  const double l = tmpl.length();
  HypothesisReport hyp = validate_hypotheses(dist, schedule, l);
  require(hyp.f2, "(F2)");
  require(hyp.h1 == Truth::Yes, "(H1)");
  if (n_grid.empty() || reps <= 0) fail(ErrorCode::ConfigError, "estimate_nu needs a nonempty n grid and reps > 0");
  NuEstimate est;
  est.dir = tmpl.dir;
  est.l = l;
  for (int64_t n : n_grid) {
    double h = schedule(n);
    double nl = double(n) * l;
    est.points.push_back(summarize(n, h, sample_flows(FlowKind::Tau, tmpl.at(n, h), nl, dist, reps, opt)));
  }
  est.nu_hat = est.points.back().mean;
  est.nu_stderr = est.points.back().stderr_;
  for (const auto& a : est.points) {
    for (const auto& b : est.points) {
      if (b.n != 2 * a.n) continue;
      SubadditivityCheck c;
      c.n = a.n;
      c.tau_n = a.mean * double(a.n) * l;
      c.tau_2n = b.mean * double(b.n) * l;
      double se_a = a.stderr_ * double(a.n) * l, se_b = b.stderr_ * double(b.n) * l;
      c.joint_stderr = std::sqrt(se_b * se_b + 4.0 * se_a * se_a);
      c.ok = c.tau_2n <= 2.0 * c.tau_n + 2.0 * c.joint_stderr;
      est.subadditivity.push_back(c);
    }
  }
  return est;
}

double EtaEstimate::combined_stderr() const {
  return std::sqrt(eta_stderr * eta_stderr + formula_stderr * formula_stderr);
}

bool EtaEstimate::within(double k) const { return std::fabs(eta_hat - eta_formula) <= k * combined_stderr(); }

std::vector<Direction> tilt_grid(const Direction& theta, double half_width, int64_t bound) {
  std::vector<std::pair<double, Direction>> found;
  for (int64_t p = -bound; p <= bound; ++p) {
    for (int64_t q = 0; q <= bound; ++q) {
      if (std::gcd(std::llabs(p), q) != 1) continue;
      if (q == 0 && p < 0) continue;
      Direction d = Direction::make(p, q);
      double off = angle_offset(d, theta);
      if (std::fabs(off) <= half_width + 1e-12) found.emplace_back(off, d);
    }
  }
  std::sort(found.begin(), found.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<Direction> out;
  for (const auto& f : found) out.push_back(f.second);
  return out;
}

EtaEstimate estimate_eta(const SegmentTemplate& tmpl, const DistributionSpec& dist, const HeightSchedule& schedule,
                         int64_t n, int64_t reps, const std::vector<Direction>& grid, const SimOptions& opt) {
  const double l = tmpl.length();
  HypothesisReport hyp = validate_hypotheses(dist, schedule, l);
  require(hyp.f1, "(F1)");
  require(hyp.f2, "(F2)");
  require(hyp.h1 == Truth::Yes, "(H1)");
  require(hyp.h2 == Truth::Yes, "(H2)");
  if (grid.empty()) fail(ErrorCode::ConfigError, "estimate_eta needs a nonempty angle grid");
  EtaEstimate est;
  const double h = schedule(n);
  const double nl = double(n) * l;
  MeanEstimate phi_est = summarize(n, h, sample_flows(FlowKind::Phi, tmpl.at(n, h), nl, dist, reps, opt));
  est.eta_hat = phi_est.mean;
  est.eta_stderr = phi_est.stderr_;
  est.eta_formula = kInf;
  for (const Direction& d : grid) {
    SegmentTemplate t = SegmentTemplate::unit(d, tmpl.offset);
    TiltEstimate te;
    te.dir = d;
    te.n = std::max<int64_t>(1, std::llround(nl / t.length()));
    te.cos_factor = std::cos(angle_offset(d, tmpl.dir));
    double nl_t = double(te.n) * t.length();
    MeanEstimate m = summarize(te.n, h, sample_flows(FlowKind::Tau, t.at(te.n, h), nl_t, dist, reps, opt));
    te.nu = m.mean;
    te.stderr_ = m.stderr_;
    if (te.ratio() < est.eta_formula) {
      est.eta_formula = te.ratio();
      est.formula_stderr = te.stderr_ / te.cos_factor;
      est.argmin = d;
    }
    est.grid.push_back(te);
  }
  return est;
}

RateRow rate_row(const Direction& dir, int64_t n, double nl, double lambda, int64_t hits, int64_t reps) {
  RateRow r;
  r.dir = dir;
  r.n = n;
  r.lambda = lambda;
  r.hits = hits;
  r.reps = reps;
  if (hits > 0) {
    double p = double(hits) / double(reps);
    r.rate = -std::log(p) / nl;
    r.slack = std::sqrt((1.0 - p) / double(hits)) / nl;
  } else {
    r.censored = true;
    r.rate = std::log(double(reps)) / nl;
  }
  return r;
}

bool RateTable::fully_censored() const {
  return std::all_of(rows.begin(), rows.end(), [](const RateRow& r) { return r.censored; });
}

RateTable estimate_rate(FlowKind kind, const SegmentTemplate& tmpl, const DistributionSpec& dist,
                        const HeightSchedule& schedule, const std::vector<double>& lambdas,
                        const std::vector<int64_t>& n_grid, int64_t reps, const SimOptions& opt) {
  const double l = tmpl.length();
  if (reps <= 0) fail(ErrorCode::ConfigError, "estimate_rate needs reps > 0");
  RateTable table;
  table.kind = kind;
  for (int64_t n : n_grid) {
    const double nl = double(n) * l;
    auto raw = sample_raw(kind, tmpl.at(n, schedule(n)), dist, reps, opt);
    for (double lambda : lambdas) {
      const double bound = lambda * nl * double(kFixedScale);
      int64_t hits = std::count_if(raw.begin(), raw.end(), [&](Capacity v) { return double(v) <= bound; });
      table.rows.push_back(rate_row(tmpl.dir, n, nl, lambda, hits, reps));
    }
  }
  for (const auto& a : table.rows) {
    if (a.censored) continue;
    for (const auto& b : table.rows)
      if (!b.censored && b.n == 2 * a.n && b.lambda == a.lambda && a.rate > 0.0)
        table.surface_ratios.emplace_back(a, b.rate / a.rate);
  }
  return table;
}

ICurve ICurve::quadratic(double c, double nu, double floor) {
  ICurve I;
  I.kind = Kind::Quadratic;
  I.c = c;
  I.nu = nu;
  I.floor = floor;
  I.validate();
  return I;
}

ICurve ICurve::piecewise_linear(std::vector<std::pair<double, double>> points) {
  ICurve I;
  I.kind = Kind::PiecewiseLinear;
  if (points.size() < 2) fail(ErrorCode::ShapeViolation, "piecewise-linear curve needs two knots");
  I.floor = points.front().first;
  I.nu = points.back().first;
  I.points = std::move(points);
  I.validate();
  return I;
}

double ICurve::operator()(double x) const {
  if (x < 0.0 || x < floor) return kInf;
  if (x >= nu) return 0.0;
  if (kind == Kind::Quadratic) {
    if (x == floor) return kInf;
    return c * (nu - x) * (nu - x) / (x - floor);
  }
  auto it = std::upper_bound(points.begin(), points.end(), x,
                             [](double v, const std::pair<double, double>& p) { return v < p.first; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  double t = (x - lo.first) / (hi.first - lo.first);
  return lo.second + t * (hi.second - lo.second);
}

double ICurve::right_limit(double x) const {
  return one_sided_limit([this](double y) { return (*this)(y); }, x, true);
}

double ICurve::left_limit(double x) const {
  return one_sided_limit([this](double y) { return (*this)(y); }, x, false);
}

ICurve ICurve::scaled(double m) const {
  if (!(m > 0.0)) fail(ErrorCode::InvalidArgument, "scale must be positive");
  ICurve I = *this;
  I.nu = nu * m;
  I.floor = floor * m;
  for (auto& p : I.points) p = {p.first * m, p.second * m};
  return I;
}

void ICurve::validate() const {
  if (!(floor >= 0.0) || !(nu > floor)) fail(ErrorCode::ShapeViolation, "need 0 <= floor < nu");
  if (kind == Kind::Quadratic) {
    if (!(c > 0.0)) fail(ErrorCode::ShapeViolation, "quadratic curve needs c > 0");
  } else {
    for (size_t i = 1; i < points.size(); ++i) {
      if (!(points[i].first > points[i - 1].first)) fail(ErrorCode::ShapeViolation, "knots must increase");
      if (points[i].second > points[i - 1].second) fail(ErrorCode::ShapeViolation, "curve must be non-increasing");
    }
    if (points.back().second != 0.0) fail(ErrorCode::ShapeViolation, "curve must vanish at nu");
    if (!std::isfinite(points.front().second)) fail(ErrorCode::ShapeViolation, "knot values must be finite");
    for (size_t i = 2; i < points.size(); ++i) {
      double s0 = (points[i - 1].second - points[i - 2].second) / (points[i - 1].first - points[i - 2].first);
      double s1 = (points[i].second - points[i - 1].second) / (points[i].first - points[i - 1].first);
      if (s1 < s0 - 1e-12) fail(ErrorCode::ShapeViolation, "curve must be convex");
    }
  }
  // Pointwise check on a grid over (floor, 2 nu].
  const int kSteps = 256;
  double prev = kInf;
  std::vector<double> xs, ys;
  for (int i = 1; i <= kSteps; ++i) {
    double x = floor + (2.0 * nu - floor) * double(i) / kSteps;
    double y = (*this)(x);
    if (y > prev + 1e-12) fail(ErrorCode::ShapeViolation, "curve increases on the grid");
    if (x >= nu && y != 0.0) fail(ErrorCode::ShapeViolation, "curve is nonzero above nu");
    prev = y;
    xs.push_back(x);
    ys.push_back(y);
  }
  for (size_t i = 1; i + 1 < xs.size(); ++i)
    if (ys[i] > 0.5 * (ys[i - 1] + ys[i + 1]) + 1e-9 * (1.0 + ys[i]))
      fail(ErrorCode::ShapeViolation, "curve is not convex on the grid");
  if (floor > 0.0 && std::isfinite((*this)(0.5 * floor)))
    fail(ErrorCode::ShapeViolation, "curve must be infinite below floor");
}

double one_sided_limit(const std::function<double(double)>& f, double x, bool from_right) {
  // Steps start well inside the local scale so that a far-away flat piece
  // cannot stop the sequence early.
  const double scale = std::max(1.0, std::fabs(x));
  double prev = 0.0;
  double v = 0.0;
  int settled = 0;
  for (int j = 20; j <= 50; ++j) {
    double eps = std::ldexp(scale, -j);
    v = f(from_right ? x + eps : x - eps);
    if (j > 20) {
      if (v > kHuge && prev > kHuge) return kInf;
      settled = std::fabs(v - prev) <= 1e-9 ? settled + 1 : 0;
      if (settled == 2) return v;
    }
    prev = v;
  }
  return v > kHuge ? kInf : v;
}

double manhattan_factor(double t) { return std::fabs(std::cos(t)) + std::fabs(std::sin(t)); }

double Gamma(double theta_tilde, double theta) {
  double c = std::cos(theta_tilde - theta);
  if (c <= 1e-15) return kInf;
  return manhattan_factor(theta_tilde) / c;
}

std::pair<double, double> gamma_infimum(double theta, const Window& w) {
  if (w.lo > w.hi) fail(ErrorCode::InvalidArgument, "empty angle window");
  // Gamma is monotone between consecutive multiples of pi/2, so the infimum
  // sits at a window endpoint or a breakpoint inside the window.
  std::vector<double> cands{w.lo, w.hi};
  for (int64_t k = int64_t(std::ceil(w.lo / (kPi / 2))); double(k) * kPi / 2 <= w.hi; ++k)
    cands.push_back(double(k) * kPi / 2);
  double best = kInf, arg = w.lo;
  for (double t : cands) {
    double g = Gamma(t, theta);
    if (g < best) {
      best = g;
      arg = t;
    }
  }
  return {best, arg};
}

double delta_theta_h(double delta, double theta, const Window& w) { return delta * gamma_infimum(theta, w).first; }

ICurve RateAlgebraContext::curve(double theta_tilde) const { return profile.scaled(manhattan_factor(theta_tilde)); }

double RateAlgebraContext::nu(double theta_tilde) const { return profile.nu * manhattan_factor(theta_tilde); }

double RateAlgebraContext::eta() const { return profile.nu * gamma_infimum(theta, window).first; }

double RateAlgebraContext::delta_theta_h() const { return tiltedflow::delta_theta_h(delta(), theta, window); }

void RateAlgebraContext::validate() const {
  if (window.lo > window.hi) fail(ErrorCode::InvalidArgument, "empty angle window");
  if (window.lo < theta - kPi / 2 - 1e-12 || window.hi > theta + kPi / 2 + 1e-12)
    fail(ErrorCode::InvalidArgument, "window must lie in [theta - pi/2, theta + pi/2]");
  profile.validate();
}

RateAlgebraContext make_context(double theta, double half_width, const ICurve& profile) {
  RateAlgebraContext ctx;
  ctx.theta = theta;
  ctx.window = Window{theta - half_width, theta + half_width};
  ctx.profile = profile;
  ctx.validate();
  return ctx;
}

double g_lambda(const RateAlgebraContext& ctx, double lambda, double theta_tilde) {
  double d = theta_tilde - ctx.theta;
  ICurve I = ctx.curve(theta_tilde);
  if (std::fabs(d) >= kPi / 2 - 1e-15) return I.right_limit(0.0) > 0.0 ? kInf : 0.0;
  double c = std::cos(d);
  return I.right_limit(lambda * c) / c;
}

double K_tilde(const RateAlgebraContext& ctx, double lambda) {
  const Window& w = ctx.window;
  std::vector<double> cands{w.lo, w.hi, ctx.theta, gamma_infimum(ctx.theta, w).second};
  for (int64_t k = int64_t(std::ceil(w.lo / (kPi / 2))); double(k) * kPi / 2 <= w.hi; ++k)
    cands.push_back(double(k) * kPi / 2);
  const int64_t steps = int64_t(1) << ctx.grid_log2;
  const double step = (w.hi - w.lo) / double(steps);
  for (int64_t i = 0; i <= steps; ++i) cands.push_back(w.lo + step * double(i));
  double best = kInf, arg = w.lo;
  for (double t : cands) {
    double g = g_lambda(ctx, lambda, t);
    if (g < best) {
      best = g;
      arg = t;
    }
  }
  if (!std::isfinite(best) || step == 0.0) return best;
  // Golden-section refinement in the grid cell pair around the best point.
  double a = std::max(w.lo, arg - step), b = std::min(w.hi, arg + step);
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = g_lambda(ctx, lambda, x1), f2 = g_lambda(ctx, lambda, x2);
  for (int it = 0; it < 80 && b - a > 1e-13; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = g_lambda(ctx, lambda, x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = g_lambda(ctx, lambda, x2);
    }
  }
  return std::min({best, f1, f2});
}

double K(const RateAlgebraContext& ctx, double lambda) {
  if (lambda > ctx.eta()) return kInf;
  return K_tilde(ctx, lambda);
}

double J(const ICurve& curve, double lambda) {
  if (lambda > curve.nu) return kInf;
  return curve.right_limit(lambda);
}

double Lambda(const ICurve& profile, double lambda, double vx, double vy) {
  if (vx == 0.0 && vy == 0.0) fail(ErrorCode::ZeroVector, "Lambda needs a nonzero vector");
  if (vx < 0.0 || vy < 0.0) fail(ErrorCode::InvalidArgument, "Lambda is defined on the positive quadrant");
  double t = std::atan2(vy, vx);
  double m = manhattan_factor(t);
  return std::hypot(vx, vy) * profile.scaled(m).right_limit(lambda * m);
}

SubadditivityReport check_Lambda_subadditive(const ICurve& profile, double lambda, int64_t pairs, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  SubadditivityReport rep;
  for (int64_t i = 0; i < pairs; ++i) {
    double ux = unif(rng), uy = unif(rng), vx = unif(rng), vy = unif(rng);
    double a = Lambda(profile, lambda, ux + vx, uy + vy);
    double b = Lambda(profile, lambda, ux, uy) + Lambda(profile, lambda, vx, vy);
    ++rep.pairs;
    if (std::isinf(b)) continue;
    double gap = a - b;
    rep.worst_gap = std::max(rep.worst_gap, gap);
    if (!(gap <= 1e-9 * (1.0 + std::fabs(b)))) ++rep.failures;
  }
  return rep;
}

}  // namespace tiltedflow
