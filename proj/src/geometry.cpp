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

#include "tiltedflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tiltedflow {

Direction Direction::make(int64_t p, int64_t q) {
  if (p == 0 && q == 0) fail(ErrorCode::InvalidArgument, "direction must be nonzero");
  if (std::gcd(std::llabs(p), std::llabs(q)) != 1)
    fail(ErrorCode::InvalidArgument, "direction (" + std::to_string(p) + "," + std::to_string(q) + ") is not primitive");
  if (q < 0 || (q == 0 && p < 0)) {
    p = -p;
    q = -q;
  }
  return Direction{p, q};
}

double Direction::theta() const { return std::atan2(double(q), double(p)); }

std::array<double, 2> Direction::v() const {
  double t = theta();
  return {std::cos(t), std::sin(t)};
}

std::array<double, 2> Direction::v_perp() const {
  double t = theta();
  return {std::sin(t), -std::cos(t)};
}

double CylinderSpec::length() const {
  double dx = (b.x - a.x).to_double() * double(n);
  double dy = (b.y - a.y).to_double() * double(n);
  return std::hypot(dx, dy);
}

void CylinderSpec::validate() const {
  Direction d = Direction::make(dir.p, dir.q);
  if (!(d == dir)) fail(ErrorCode::InvalidArgument, "direction is not normalized");
  if (n <= 0) fail(ErrorCode::InvalidArgument, "scale n must be positive");
  if (h.sign() <= 0) fail(ErrorCode::InvalidArgument, "height h must be positive");
  Rational dx = b.x - a.x;
  Rational dy = b.y - a.y;
  // (b - a) parallel to (q, -p) and pointing the same way.
  Rational cross = dx * Rational(-dir.p) - dy * Rational(dir.q);
  if (cross.sign() != 0) fail(ErrorCode::InvalidArgument, "segment A is not orthogonal to v(theta)");
  Rational dot = dx * Rational(dir.q) + dy * Rational(-dir.p);
  if (dot.sign() <= 0) fail(ErrorCode::InvalidArgument, "(b - a).v_perp(theta) must be positive");
}

uint64_t lattice_edge_key(int64_t x, int64_t y, int dir) {
  constexpr int64_t off = int64_t(1) << 30;
  uint64_t ux = uint64_t(x + off);
  uint64_t uy = uint64_t(y + off);
  return (ux << 32) | (uy << 1) | uint64_t(dir & 1);
}

Cylinder::Cylinder(const CylinderSpec& spec) : spec_(spec) {
  spec_.validate();
  Rational n(spec.n);
  a_ = RPoint{spec.a.x * n, spec.a.y * n};
  b_ = RPoint{spec.b.x * n, spec.b.y * n};
  root_ = spec.dir.norm2();
  lw_ = xi(b_.x, b_.y);
  h2n_ = spec.h * spec.h * Rational(root_);

  double hv = spec.h.to_double();
  auto v = spec.dir.v();
  double xs[4], ys[4];
  for (int s = 0; s < 2; ++s) {
    const RPoint& e = s == 0 ? a_ : b_;
    for (int t = 0; t < 2; ++t) {
      double sg = t == 0 ? -1.0 : 1.0;
      xs[s * 2 + t] = e.x.to_double() + sg * hv * v[0];
      ys[s * 2 + t] = e.y.to_double() + sg * hv * v[1];
    }
  }
  bx0_ = int64_t(std::floor(*std::min_element(xs, xs + 4))) - 1;
  by0_ = int64_t(std::floor(*std::min_element(ys, ys + 4))) - 1;
  int64_t bx1 = int64_t(std::ceil(*std::max_element(xs, xs + 4))) + 1;
  int64_t by1 = int64_t(std::ceil(*std::max_element(ys, ys + 4))) + 1;
  bw_ = bx1 - bx0_ + 1;
  bh_ = by1 - by0_ + 1;
  if (double(bw_) * double(bh_) > 4e8) fail(ErrorCode::TooLarge, "cylinder bounding box too large");
  index_.assign(size_t(bw_ * bh_), -1);

  for (int64_t y = by0_; y <= by1; ++y) {
    for (int64_t x = bx0_; x <= bx1; ++x) {
      if (!contains_lattice(x, y)) continue;
      index_[size_t((y - by0_) * bw_ + (x - bx0_))] = int32_t(vertices_.size());
      VertexInfo info;
      info.x = x;
      info.y = y;
      vertices_.push_back(info);
    }
  }
  if (vertices_.empty()) fail(ErrorCode::EmptyCylinder, "no lattice vertex inside the cylinder");

  incident_.assign(vertices_.size() * 4, -1);
  for (size_t i = 0; i < vertices_.size(); ++i) {
    const VertexInfo& vi = vertices_[i];
    for (int d = 0; d < 2; ++d) {
      int32_t j = vertex_index(vi.x + kDx[d], vi.y + kDy[d]);
      if (j < 0) continue;
      LatticeEdge e;
      e.u = int32_t(i);
      e.v = j;
      e.dir = uint8_t(d);
      e.key = lattice_edge_key(vi.x, vi.y, d);
      int32_t id = int32_t(edges_.size());
      edges_.push_back(e);
      incident_[i * 4 + size_t(d)] = id;
      incident_[size_t(j) * 4 + size_t(d + 2)] = id;
    }
  }
  for (auto& info : vertices_) classify(info);
}

int32_t Cylinder::vertex_index(int64_t x, int64_t y) const {
  if (x < bx0_ || y < by0_ || x >= bx0_ + bw_ || y >= by0_ + bh_) return -1;
  return index_[size_t((y - by0_) * bw_ + (x - bx0_))];
}

Rational Cylinder::eta(const Rational& x, const Rational& y) const {
  return (x - a_.x) * Rational(spec_.dir.p) + (y - a_.y) * Rational(spec_.dir.q);
}

Rational Cylinder::xi(const Rational& x, const Rational& y) const {
  return (x - a_.x) * Rational(spec_.dir.q) - (y - a_.y) * Rational(spec_.dir.p);
}

bool Cylinder::contains(const Rational& x, const Rational& y) const {
  Rational s = xi(x, y);
  if (s.sign() < 0 || s > lw_) return false;
  Rational t = eta(x, y);
  return t * t <= h2n_;
}

bool Cylinder::contains_lattice(int64_t x, int64_t y) const { return contains(Rational(x), Rational(y)); }

void Cylinder::classify(VertexInfo& info) const {
  Rational ex = eta(Rational(info.x), Rational(info.y));
  Rational xx = xi(Rational(info.x), Rational(info.y));
  const Surd top = top_eta();
  const Surd bottom = bottom_eta();
  const Surd zero = Surd::rational(Rational(0), root_);
  const Surd one = Surd::rational(Rational(1), root_);
  const Surd lw = Surd::rational(lw_, root_);
  bool has_left = false, has_right = false;

  for (int d = 0; d < 4; ++d) {
    if (incident_edge(vertex_index(info.x, info.y), d) >= 0) continue;
    int64_t dw = kDx[d] * spec_.dir.p + kDy[d] * spec_.dir.q;
    int64_t du = kDx[d] * spec_.dir.q - kDy[d] * spec_.dir.p;

    // Closed edge against the top/bottom segments.
    for (int tb = 0; tb < 2; ++tb) {
      const Surd& line = tb == 0 ? top : bottom;
      Surd s_star;
      if (dw == 0) {
        if (Surd::rational(ex, root_).compare(line) != 0) continue;
        s_star = zero;
      } else {
        s_star = (line - Surd::rational(ex, root_)) / Rational(dw);
        if (s_star < zero || s_star > one) continue;
      }
      Surd xi_p = Surd::rational(xx, root_) + s_star * Rational(du);
      if (xi_p < zero || xi_p > lw) continue;
      if (tb == 0) {
        if (!(info.labels & kTop)) {
          info.labels |= kTop;
          info.top_dir = int8_t(d);
          info.top_xi = xi_p;
        }
      } else if (!(info.labels & kBottom)) {
        info.labels |= kBottom;
        info.bottom_dir = int8_t(d);
        info.bottom_xi = xi_p;
      }
    }

    // Half-open edge [x, y[ against the lateral sides.
    for (int lr = 0; lr < 2; ++lr) {
      Rational side = lr == 0 ? Rational(0) : lw_;
      Rational s_star;
      if (du == 0) {
        if (xx != side) continue;
        s_star = Rational(0);
      } else {
        s_star = (side - xx) / Rational(du);
        if (s_star.sign() < 0 || s_star >= Rational(1)) continue;
      }
      Rational eta_p = ex + s_star * Rational(dw);
      if (eta_p * eta_p > h2n_) continue;
      if (lr == 0) {
        if (!has_left || eta_p > info.left_eta) {
          info.left_eta = eta_p;
          info.left_dir = int8_t(d);
        }
        has_left = true;
        info.labels |= kLeft;
      } else {
        if (!has_right || eta_p > info.right_eta) {
          info.right_eta = eta_p;
          info.right_dir = int8_t(d);
        }
        has_right = true;
        info.labels |= kRight;
      }
    }
  }
}

std::vector<int32_t> Cylinder::top_vertices() const {
  std::vector<int32_t> out;
  for (size_t i = 0; i < vertices_.size(); ++i)
    if (vertices_[i].labels & kTop) out.push_back(int32_t(i));
  return out;
}

std::vector<int32_t> Cylinder::bottom_vertices() const {
  std::vector<int32_t> out;
  for (size_t i = 0; i < vertices_.size(); ++i)
    if (vertices_[i].labels & kBottom) out.push_back(int32_t(i));
  return out;
}

BoundaryCondition make_boundary_condition(const Cylinder& cyl, const Chord& chord) {
  if (cyl.lw().sign() <= 0) fail(ErrorCode::DegenerateChord, "chord endpoints coincide");
  Surd top = cyl.top_eta();
  Surd bottom = cyl.bottom_eta();
  if (chord.c_eta > top || chord.c_eta < bottom || chord.d_eta > top || chord.d_eta < bottom)
    fail(ErrorCode::NotAdmissible, "chord endpoint outside the lateral sides");
  BoundaryCondition bc;
  bc.chord = chord;
  double hs = top.to_double();
  bc.k = (chord.c_eta.to_double() / hs + 1.0) / 2.0;
  bc.theta_tilde = cyl.spec().dir.theta() + std::atan((chord.d_eta - chord.c_eta).to_double() / cyl.lw().to_double());
  return bc;
}

BoundaryCondition make_boundary_condition(const Cylinder& cyl, const Rational& k, const Direction& tilt) {
  if (k.sign() < 0 || k > Rational(1)) fail(ErrorCode::NotAdmissible, "k must lie in [0,1]");
  const Direction& dir = cyl.spec().dir;
  // Chord direction is proportional to (q~, -p~); its xi and eta rates are
  // (q~ q + p~ p) and (q~ p - p~ q).
  int64_t rate_xi = tilt.q * dir.q + tilt.p * dir.p;
  int64_t rate_eta = tilt.q * dir.p - tilt.p * dir.q;
  if (rate_xi == 0) fail(ErrorCode::NotAdmissible, "tilt is orthogonal to theta");
  // The chord is a line, so tilt is taken modulo pi.
  if (rate_xi < 0) {
    rate_xi = -rate_xi;
    rate_eta = -rate_eta;
  }
  Chord chord;
  chord.c_eta = Surd(Rational(0), (Rational(2) * k - Rational(1)) * cyl.h(), cyl.root());
  chord.d_eta = chord.c_eta + Surd::rational(cyl.lw() * Rational(rate_eta) / Rational(rate_xi), cyl.root());
  return make_boundary_condition(cyl, chord);
}

BoundaryCondition tau_condition(const Cylinder& cyl) {
  Chord chord;
  chord.c_eta = Surd::rational(Rational(0), cyl.root());
  chord.d_eta = chord.c_eta;
  return make_boundary_condition(cyl, chord);
}

Arcs boundary_arcs(const Cylinder& cyl, const BoundaryCondition& bc, bool allow_empty) {
  Arcs arcs;
  const auto& vs = cyl.vertices();
  arcs.membership.assign(vs.size(), 0);
  const int64_t root = cyl.root();
  for (size_t i = 0; i < vs.size(); ++i) {
    const VertexInfo& v = vs[i];
    if (!v.is_boundary()) continue;
    ArcVertex av;
    av.vertex = int32_t(i);
    bool upper;
    if (v.labels & kTop) {
      upper = true;
      av.side = Side::Top;
      av.dir = v.top_dir;
    } else if (v.labels & kBottom) {
      upper = false;
      av.side = Side::Bottom;
      av.dir = v.bottom_dir;
    } else {
      bool left_up = (v.labels & kLeft) && Surd::rational(v.left_eta, root) > bc.chord.c_eta;
      bool right_up = (v.labels & kRight) && Surd::rational(v.right_eta, root) > bc.chord.d_eta;
      upper = left_up || right_up;
      bool use_left = upper ? left_up : bool(v.labels & kLeft);
      av.side = use_left ? Side::Left : Side::Right;
      av.dir = use_left ? v.left_dir : v.right_dir;
    }
    if (upper) {
      arcs.a1.push_back(av);
      arcs.membership[i] = 1;
    } else {
      arcs.a2.push_back(av);
      arcs.membership[i] = 2;
    }
  }
  if (!allow_empty && (arcs.a1.empty() || arcs.a2.empty())) fail(ErrorCode::EmptyArc, "boundary condition leaves an empty arc");
  return arcs;
}

Arcs top_bottom_arcs(const Cylinder& cyl) {
  Arcs arcs;
  const auto& vs = cyl.vertices();
  arcs.membership.assign(vs.size(), 0);
  for (size_t i = 0; i < vs.size(); ++i) {
    const VertexInfo& v = vs[i];
    bool t = v.labels & kTop;
    bool b = v.labels & kBottom;
    if (t && b) fail(ErrorCode::InvalidNetwork, "top and bottom vertex sets intersect");
    if (t) {
      arcs.a1.push_back(ArcVertex{int32_t(i), Side::Top, v.top_dir});
      arcs.membership[i] = 1;
    } else if (b) {
      arcs.a2.push_back(ArcVertex{int32_t(i), Side::Bottom, v.bottom_dir});
      arcs.membership[i] = 2;
    }
  }
  if (arcs.a1.empty() || arcs.a2.empty()) fail(ErrorCode::InvalidNetwork, "top or bottom vertex set is empty");
  return arcs;
}

AngleWindow angle_window(const CylinderSpec& spec) {
  AngleWindow w;
  w.theta = spec.dir.theta();
  double half = std::atan(2.0 * spec.h.to_double() / spec.length());
  w.lo = w.theta - half;
  w.hi = w.theta + half;
  return w;
}

}  // namespace tiltedflow
