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
#include <optional>
#include <string>
#include <vector>

#include "tiltedflow/rational.hpp"

namespace tiltedflow {

// Primitive lattice direction (p,q) proportional to v(theta), normalized so
// that theta lies in [0, pi).
struct Direction {
  int64_t p = 0;
  int64_t q = 1;

  static Direction make(int64_t p, int64_t q);
  double theta() const;
  int64_t norm2() const { return p * p + q * q; }
  std::array<double, 2> v() const;
  std::array<double, 2> v_perp() const;
  bool operator==(const Direction& o) const { return p == o.p && q == o.q; }
};

struct RPoint {
  Rational x;
  Rational y;
};

// cyl(nA, h) with A = [a, b]; (b - a) must be a positive multiple of (q, -p).
struct CylinderSpec {
  Direction dir;
  RPoint a;
  RPoint b;
  int64_t n = 1;
  Rational h = Rational(1);

  double length() const;  // l(nA)
  void validate() const;
};

enum Label : uint8_t {
  kInterior = 0,
  kTop = 1,
  kBottom = 2,
  kLeft = 4,
  kRight = 8,
};

// Lattice step directions in counter-clockwise order.
constexpr int kDx[4] = {1, 0, -1, 0};
constexpr int kDy[4] = {0, 1, 0, -1};

struct VertexInfo {
  int64_t x = 0;
  int64_t y = 0;
  uint8_t labels = kInterior;
  // Witness edges: direction index of the outside neighbour and the exact
  // crossing coordinate on the relevant side of the cylinder boundary.
  int8_t top_dir = -1;
  int8_t bottom_dir = -1;
  Surd top_xi;
  Surd bottom_xi;
  int8_t left_dir = -1;   // witness with the highest crossing on the left side
  int8_t right_dir = -1;  // same on the right side
  Rational left_eta;      // highest crossing height on the left side
  Rational right_eta;
  bool is_boundary() const { return labels != kInterior; }
};

struct LatticeEdge {
  int32_t u = 0;  // lower endpoint (west or south)
  int32_t v = 0;
  uint8_t dir = 0;  // 0: horizontal (u -> u + e1), 1: vertical (u -> u + e2)
  uint64_t key = 0;
};

// Canonical lattice edge identifier, independent of any cylinder.
uint64_t lattice_edge_key(int64_t x, int64_t y, int dir);

class Cylinder {
 public:
  explicit Cylinder(const CylinderSpec& spec);

  const CylinderSpec& spec() const { return spec_; }
  const std::vector<VertexInfo>& vertices() const { return vertices_; }
  const std::vector<LatticeEdge>& edges() const { return edges_; }
  size_t vertex_count() const { return vertices_.size(); }
  size_t edge_count() const { return edges_.size(); }

  // -1 when (x,y) is not a vertex of the cylinder.
  int32_t vertex_index(int64_t x, int64_t y) const;
  // Edge id incident to vertex i in lattice direction d (0..3), or -1.
  int32_t incident_edge(int32_t i, int d) const { return incident_[size_t(i) * 4 + size_t(d)]; }

  bool contains(const Rational& x, const Rational& y) const;
  bool contains_lattice(int64_t x, int64_t y) const;
  Rational eta(const Rational& x, const Rational& y) const;  // (z - a).(p,q)
  Rational xi(const Rational& x, const Rational& y) const;   // (z - a).(q,-p)

  const RPoint& a() const { return a_; }
  const RPoint& b() const { return b_; }
  const Rational& lw() const { return lw_; }  // xi coordinate of b
  const Rational& h() const { return spec_.h; }
  int64_t root() const { return root_; }
  Surd top_eta() const { return Surd(Rational(0), spec_.h, root_); }
  Surd bottom_eta() const { return Surd(Rational(0), -spec_.h, root_); }

  std::vector<int32_t> top_vertices() const;
  std::vector<int32_t> bottom_vertices() const;

 private:
  void classify(VertexInfo& info) const;

  CylinderSpec spec_;
  RPoint a_;
  RPoint b_;
  Rational lw_;
  Rational h2n_;
  int64_t root_;
  int64_t bx0_ = 0, by0_ = 0, bw_ = 0, bh_ = 0;
  std::vector<int32_t> index_;
  std::vector<VertexInfo> vertices_;
  std::vector<LatticeEdge> edges_;
  std::vector<int32_t> incident_;
};

// Chord from c on the left side to d on the right side, stored by its exact
// heights along v(theta), scaled by sqrt(N) as all eta coordinates are.
struct Chord {
  Surd c_eta;
  Surd d_eta;
};

struct BoundaryCondition {
  Chord chord;
  double k = 0.5;
  double theta_tilde = 0.0;
};

BoundaryCondition make_boundary_condition(const Cylinder& cyl, const Rational& k, const Direction& tilt);
BoundaryCondition make_boundary_condition(const Cylinder& cyl, const Chord& chord);
BoundaryCondition tau_condition(const Cylinder& cyl);

enum class Side : uint8_t { None = 0, Top, Bottom, Left, Right };

struct ArcVertex {
  int32_t vertex = 0;
  Side side = Side::None;  // side of the cylinder carrying the chosen witness point
  int8_t dir = -1;         // lattice direction of the witness edge
};

struct Arcs {
  std::vector<ArcVertex> a1;
  std::vector<ArcVertex> a2;
  std::vector<uint8_t> membership;  // 0 none, 1 in A1, 2 in A2
};

// Raises EmptyArc when one arc is empty unless allow_empty is set.
Arcs boundary_arcs(const Cylinder& cyl, const BoundaryCondition& bc, bool allow_empty = false);
// phi configuration: A1 = T(A,h), A2 = B(A,h).
Arcs top_bottom_arcs(const Cylinder& cyl);

struct AngleWindow {
  double theta = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double half_width() const { return hi - theta; }
};

AngleWindow angle_window(const CylinderSpec& spec);

}  // namespace tiltedflow
