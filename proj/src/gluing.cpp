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

#include "tiltedflow/gluing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace tiltedflow {

namespace {

constexpr int64_t kMaxDen = 10000;

Vec2 to_vec(const RPoint& p) { return {p.x.to_double(), p.y.to_double()}; }
Vec2 add(Vec2 a, Vec2 b) { return {a[0] + b[0], a[1] + b[1]}; }
Vec2 sub(Vec2 a, Vec2 b) { return {a[0] - b[0], a[1] - b[1]}; }
Vec2 scale(Vec2 a, double s) { return {a[0] * s, a[1] * s}; }
double norm(Vec2 a) { return std::hypot(a[0], a[1]); }

double dist_point(Vec2 z, Vec2 p) { return norm(sub(z, p)); }

double dist_segment(Vec2 z, const std::array<Vec2, 2>& s) {
  Vec2 d = sub(s[1], s[0]);
  double len2 = d[0] * d[0] + d[1] * d[1];
  if (len2 == 0.0) return dist_point(z, s[0]);
  double t = std::clamp(((z[0] - s[0][0]) * d[0] + (z[1] - s[0][1]) * d[1]) / len2, 0.0, 1.0);
  return dist_point(z, add(s[0], scale(d, t)));
}

// Real point at coordinates (xi, eta) of a cylinder frame.
Vec2 frame_point(const Cylinder& cyl, double xi, double eta) {
  const Direction& d = cyl.spec().dir;
  double n2 = double(d.norm2());
  Vec2 a = to_vec(cyl.a());
  return {a[0] + (xi * double(d.q) + eta * double(d.p)) / n2, a[1] + (-xi * double(d.p) + eta * double(d.q)) / n2};
}

RPoint floor_point(Vec2 z) {
  return RPoint{Rational(i128(std::floor(z[0]))), Rational(i128(std::floor(z[1])))};
}

void check_contained(const Cylinder& big, const Cylinder& piece) {
  for (const auto& v : piece.vertices())
    if (!big.contains_lattice(v.x, v.y))
      fail(ErrorCode::DoesNotFit, "small cylinder vertex (" + std::to_string(v.x) + "," + std::to_string(v.y) +
                                      ") lies outside the large cylinder");
}

// Primitive integer vector along the rational vector (dx, dy), and the
// rational factor mu with (dx, dy) = mu * primitive.
std::pair<std::array<int64_t, 2>, Rational> primitive_of(const Rational& dx, const Rational& dy) {
  if (dx.sign() == 0 && dy.sign() == 0) fail(ErrorCode::ZeroVector, "degenerate segment");
  i128 den = dx.den() / gcd128(dx.den(), dy.den()) * dy.den();
  i128 x = dx.num() * (den / dx.den());
  i128 y = dy.num() * (den / dy.den());
  i128 g = gcd128(x, y);
  std::array<int64_t, 2> prim{int64_t(x / g), int64_t(y / g)};
  return {prim, Rational(g, den)};
}

}  // namespace

double GluingConfig::zeta() const { return zeta_c * std::pow(double(n), zeta_beta); }
double GluingConfig::hprime() const { return hprime_c * std::pow(double(n), hprime_beta); }
double GluingConfig::zeta_prime(double h_small) const { return h_small * std::pow(double(n), zetap_beta); }

void GluingConfig::validate() const {
  if (n <= 0 || N <= 0) fail(ErrorCode::ConfigError, "scales n and N must be positive");
  if (!(zeta0 >= 4.0)) fail(ErrorCode::ConfigError, "connector radius zeta0 must be at least 4");
  if (!(hprime() > 0.0)) fail(ErrorCode::ConfigError, "h'(n) must be positive");
  if (!(hprime() < zeta())) fail(ErrorCode::ConfigError, "h'(n) must be smaller than zeta(n)");
  if (h_second < 0.0) fail(ErrorCode::ConfigError, "h''(N) must be nonnegative");
}

CylinderSpec segment_cylinder(const RPoint& start, const Rational& lam, int64_t dx, int64_t dy, const Rational& h) {
  if (lam.sign() <= 0) fail(ErrorCode::InvalidArgument, "segment length must be positive");
  Direction dir = Direction::make(-dy, dx);
  RPoint end{start.x + lam * Rational(dx), start.y + lam * Rational(dy)};
  CylinderSpec spec;
  spec.dir = dir;
  spec.n = 1;
  spec.h = h;
  if (dir.q == dx && -dir.p == dy) {
    spec.a = start;
    spec.b = end;
  } else {
    spec.a = end;
    spec.b = start;
  }
  return spec;
}

std::vector<int32_t> connector_edges(const Cylinder& cyl, const std::vector<Vec2>& points,
                                     const std::vector<std::array<Vec2, 2>>& segments, double r) {
  const auto& vs = cyl.vertices();
  std::vector<uint8_t> inside(vs.size(), 0);
  for (size_t i = 0; i < vs.size(); ++i) {
    Vec2 z{double(vs[i].x), double(vs[i].y)};
    for (const auto& p : points)
      if (dist_point(z, p) < r) inside[i] = 1;
    if (inside[i]) continue;
    for (const auto& s : segments)
      if (dist_segment(z, s) < r) inside[i] = 1;
  }
  std::vector<int32_t> out;
  for (size_t e = 0; e < cyl.edge_count(); ++e) {
    const auto& le = cyl.edges()[e];
    if (inside[size_t(le.u)] && inside[size_t(le.v)]) out.push_back(int32_t(e));
  }
  return out;
}

std::vector<CylinderSpec> build_small_cylinders(const GluingConfig& cfg, const CylinderSpec& big_spec,
                                                const Direction& tilt) {
  GluingSetup setup = build_phi_gluing(cfg, big_spec, tilt);
  std::vector<CylinderSpec> out;
  for (const auto& p : setup.pieces) out.push_back(p.spec());
  return out;
}

GluingSetup build_phi_gluing(const GluingConfig& cfg, const CylinderSpec& big_spec, const Direction& tilt) {
  cfg.validate();
  CylinderSpec spec = big_spec;
  spec.n = cfg.N;
  GluingSetup setup{Cylinder(spec)};
  setup.kind = "phi";
  setup.config = cfg;
  const Cylinder& big = setup.big;
  const Direction& dir = spec.dir;

  // kappa_N: chord of direction tilt through the middle of NA.
  int64_t rate_xi = tilt.q * dir.q + tilt.p * dir.p;
  int64_t rate_eta = tilt.q * dir.p - tilt.p * dir.q;
  if (rate_xi == 0) fail(ErrorCode::NotAdmissible, "tilt is orthogonal to theta");
  const int64_t sgn = rate_xi < 0 ? -1 : 1;
  rate_xi *= sgn;
  rate_eta *= sgn;
  Rational half_rise = big.lw() * Rational(rate_eta) / Rational(2 * rate_xi);
  Chord chord{Surd::rational(-half_rise, big.root()), Surd::rational(half_rise, big.root())};
  setup.big_kappa = make_boundary_condition(big, chord);
  setup.big_arcs = boundary_arcs(big, *setup.big_kappa);

  Vec2 x_n = frame_point(big, 0.0, -half_rise.to_double());
  Vec2 y_n = frame_point(big, big.lw().to_double(), half_rise.to_double());
  const double L = norm(sub(y_n, x_n));
  const double n = double(cfg.n);
  const double zeta = cfg.zeta();
  const int64_t M = int64_t(std::floor((L - 2.0 * zeta) / n));
  if (M < 2) fail(ErrorCode::ConfigError, "N is too small for two small cylinders");
  Vec2 vp = scale(tilt.v_perp(), double(sgn));
  Rational lam = Rational::approximate(n / std::sqrt(double(tilt.norm2())), kMaxDen);
  Rational hp = Rational::approximate(cfg.hprime(), kMaxDen);
  for (int64_t i = 0; i < M; ++i) {
    Vec2 t = add(x_n, scale(vp, zeta + double(i) * n));
    setup.junctions.push_back(t);
    Cylinder piece(segment_cylinder(floor_point(t), lam, sgn * tilt.q, -sgn * tilt.p, hp));
    check_contained(big, piece);
    setup.pieces.push_back(std::move(piece));
    setup.piece_kappa.emplace_back();
  }
  Vec2 chain_end = add(x_n, scale(vp, zeta + double(M) * n));
  setup.end_segments.push_back({x_n, setup.junctions.front()});
  setup.end_segments.push_back({chain_end, y_n});
  setup.count_a = M;
  return setup;
}

GluingSetup build_slab_gluing(const GluingConfig& cfg, const CylinderSpec& small_spec, const Rational& k,
                              const Direction& tilt) {
  cfg.validate();
  Cylinder small(small_spec);
  BoundaryCondition kappa = make_boundary_condition(small, k, tilt);
  Vec2 x_n = frame_point(small, 0.0, kappa.chord.c_eta.to_double());
  Vec2 y_n = frame_point(small, small.lw().to_double(), kappa.chord.d_eta.to_double());
  const double L = norm(sub(y_n, x_n));
  const double h_small = small_spec.h.to_double();
  const double zp = cfg.zeta_prime(h_small);
  const double N = double(cfg.N);
  const int64_t count = int64_t(std::floor((N - 2.0 * zp) / L));
  if (count < 2) fail(ErrorCode::ConfigError, "N is too small for two translated cylinders");

  Vec2 vp = tilt.v_perp();
  const int64_t sgn = (y_n[0] - x_n[0]) * vp[0] + (y_n[1] - x_n[1]) * vp[1] < 0 ? -1 : 1;
  vp = scale(vp, double(sgn));
  std::vector<CylinderSpec> specs;
  std::vector<Vec2> z;
  double reach = 0.0;
  const Vec2 vt = tilt.v();
  for (int64_t i = 0; i < count; ++i) {
    Vec2 zi = scale(vp, zp + double(i) * L);
    z.push_back(zi);
    Vec2 shift = sub(zi, x_n);
    Rational sx(i128(std::floor(shift[0]))), sy(i128(std::floor(shift[1])));
    Rational ns(small_spec.n);
    CylinderSpec s = small_spec;
    s.a = RPoint{s.a.x + sx / ns, s.a.y + sy / ns};
    s.b = RPoint{s.b.x + sx / ns, s.b.y + sy / ns};
    Cylinder probe(s);
    for (const auto& v : probe.vertices())
      reach = std::max(reach, std::fabs(double(v.x) * vt[0] + double(v.y) * vt[1]));
    specs.push_back(s);
  }
  Rational h2 = cfg.h_second > 0.0 ? Rational::approximate(cfg.h_second, kMaxDen)
                                   : Rational(i128(std::ceil(reach)) + 1);
  Rational lam = Rational::approximate(N / std::sqrt(double(tilt.norm2())), kMaxDen);
  GluingSetup setup{Cylinder(segment_cylinder(RPoint{Rational(0), Rational(0)}, lam, sgn * tilt.q, -sgn * tilt.p, h2))};
  setup.kind = "slab";
  setup.config = cfg;
  setup.big_arcs = boundary_arcs(setup.big, tau_condition(setup.big));
  for (const auto& s : specs) {
    Cylinder piece(s);
    check_contained(setup.big, piece);
    setup.piece_kappa.emplace_back(make_boundary_condition(piece, k, tilt));
    setup.pieces.push_back(std::move(piece));
  }
  setup.junctions = z;
  Vec2 chain_end = scale(vp, zp + double(count) * L);
  setup.end_segments.push_back({Vec2{0.0, 0.0}, z.front()});
  setup.end_segments.push_back({chain_end, scale(vp, lam.to_double() * std::sqrt(double(tilt.norm2())))});
  setup.count_a = count;
  return setup;
}

GluingSetup build_triangle_gluing(const GluingConfig& cfg, const RPoint& a, const RPoint& b, const RPoint& c) {
  cfg.validate();
  auto dot = [](const RPoint& o, const RPoint& p, const RPoint& q) {
    return (p.x - o.x) * (q.x - o.x) + (p.y - o.y) * (q.y - o.y);
  };
  if (dot(a, b, c).sign() <= 0 || dot(b, a, c).sign() <= 0)
    fail(ErrorCode::BadTriangle, "angles at a and b must be strictly less than pi/2");
  Rational cross = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
  if (cross.sign() == 0) fail(ErrorCode::BadTriangle, "degenerate triangle");

  const Rational Nr(cfg.N);
  auto scaled = [&](const RPoint& p) { return RPoint{p.x * Nr, p.y * Nr}; };
  auto [d_ab, mu_ab] = primitive_of(b.x - a.x, b.y - a.y);
  GluingSetup setup{Cylinder(segment_cylinder(scaled(a), mu_ab * Nr, d_ab[0], d_ab[1], Nr))};
  setup.kind = "triangle";
  setup.config = cfg;
  setup.big_arcs = boundary_arcs(setup.big, tau_condition(setup.big));

  const double n = double(cfg.n);
  const double zeta = cfg.zeta();
  Rational hp = Rational::approximate(cfg.hprime(), kMaxDen);
  auto chain = [&](const RPoint& from, const RPoint& to) {
    auto [d, mu] = primitive_of(to.x - from.x, to.y - from.y);
    (void)mu;
    Vec2 f = scale(to_vec(from), double(cfg.N));
    Vec2 t = scale(to_vec(to), double(cfg.N));
    double l = norm(sub(to_vec(to), to_vec(from)));
    Vec2 vp = scale(sub(t, f), 1.0 / norm(sub(t, f)));
    int64_t M = int64_t(std::floor((double(cfg.N) * l - 2.0 * zeta) / (n * l)));
    if (M < 2) fail(ErrorCode::ConfigError, "N is too small for two small cylinders per leg");
    Rational lam = Rational::approximate(n * l / std::hypot(double(d[0]), double(d[1])), kMaxDen);
    std::vector<Vec2> starts;
    for (int64_t i = 0; i < M; ++i) {
      Vec2 u = add(f, scale(vp, zeta + double(i) * n * l));
      starts.push_back(u);
      Cylinder piece(segment_cylinder(floor_point(u), lam, d[0], d[1], hp));
      check_contained(setup.big, piece);
      setup.pieces.push_back(std::move(piece));
      setup.piece_kappa.emplace_back();
    }
    setup.end_segments.push_back({f, starts.front()});
    setup.end_segments.push_back({add(f, scale(vp, zeta + double(M) * n * l)), t});
    for (size_t i = 1; i < starts.size(); ++i) setup.junctions.push_back(starts[i]);
    return M;
  };
  setup.count_a = chain(a, c);
  setup.count_b = chain(c, b);
  return setup;
}

GluingReport verify_gluing(const GluingSetup& setup, const std::vector<Capacity>& big_caps,
                           const std::vector<std::vector<Capacity>>& piece_caps) {
  const Cylinder& big = setup.big;
  if (piece_caps.size() != setup.pieces.size()) fail(ErrorCode::InvalidArgument, "one capacity vector per piece");
  GluingReport rep;
  rep.kind = setup.kind;
  if (setup.big_kappa) {
    rep.lhs = phi(big, big_caps).value;
    rep.middle = phi_kappa(big, big_caps, *setup.big_kappa).value;
  } else {
    rep.lhs = tau(big, big_caps).value;
    rep.middle = rep.lhs;
  }

  std::unordered_map<uint64_t, int32_t> by_key;
  by_key.reserve(big.edge_count() * 2);
  for (size_t e = 0; e < big.edge_count(); ++e) by_key.emplace(big.edges()[e].key, int32_t(e));
  std::vector<uint8_t> removed(big.edge_count(), 0);

  for (size_t i = 0; i < setup.pieces.size(); ++i) {
    const Cylinder& piece = setup.pieces[i];
    FlowResult r = setup.piece_kappa[i] ? phi_kappa(piece, piece_caps[i], *setup.piece_kappa[i])
                                        : tau(piece, piece_caps[i]);
    rep.pieces_sum += r.value;
    for (int32_t e : r.cut.edges) {
      auto it = by_key.find(piece.edges()[size_t(e)].key);
      if (it == by_key.end()) fail(ErrorCode::DoesNotFit, "piece cut edge outside the large cylinder");
      removed[size_t(it->second)] = 1;
    }
  }
  rep.pieces = int64_t(setup.pieces.size());

  const double r0 = setup.config.zeta0;
  auto balls = connector_edges(big, setup.junctions, {}, r0);
  auto segs = connector_edges(big, {}, setup.end_segments, r0);
  rep.connector_parts = {int64_t(balls.size()), int64_t(segs.size())};
  std::vector<int32_t> conn = balls;
  conn.insert(conn.end(), segs.begin(), segs.end());
  std::sort(conn.begin(), conn.end());
  conn.erase(std::unique(conn.begin(), conn.end()), conn.end());
  rep.connector_edges = int64_t(conn.size());
  for (int32_t e : conn) {
    rep.connector_value += big_caps[size_t(e)];
    removed[size_t(e)] = 1;
  }
  rep.rhs = rep.pieces_sum + rep.connector_value;
  rep.slack = rep.rhs - rep.lhs;
  rep.inequality_ok = rep.lhs <= rep.middle && rep.middle <= rep.rhs;

  std::vector<std::pair<int32_t, int32_t>> ends;
  ends.reserve(big.edge_count());
  for (const auto& e : big.edges()) ends.emplace_back(e.u, e.v);
  std::vector<int32_t> src, dst;
  for (const auto& av : setup.big_arcs.a1) src.push_back(av.vertex);
  for (const auto& av : setup.big_arcs.a2) dst.push_back(av.vertex);
  rep.structural_ok = separates(int32_t(big.vertex_count()), ends, removed, src, dst);
  return rep;
}

GluingReport verify_gluing(const GluingSetup& setup, const DistributionSpec& dist, uint64_t seed,
                           uint64_t replicate) {
  std::vector<std::vector<Capacity>> piece_caps;
  piece_caps.reserve(setup.pieces.size());
  for (const auto& p : setup.pieces) piece_caps.push_back(sample_cylinder(dist, seed, replicate, p));
  return verify_gluing(setup, sample_cylinder(dist, seed, replicate, setup.big), piece_caps);
}

}  // namespace tiltedflow
