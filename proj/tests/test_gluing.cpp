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
#include <random>

#include "tiltedflow/gluing.hpp"
#include "tiltedflow/rates.hpp"

using namespace tiltedflow;

namespace {

GluingConfig small_config() {
  GluingConfig g;
  g.n = 4;
  g.N = 16;
  return g;
}

// Recomputes every report field from independent flow calls on the same field.
void expect_consistent(const GluingSetup& s, const DistributionSpec& d, uint64_t seed, uint64_t rep) {
  GluingReport g = verify_gluing(s, d, seed, rep);
  std::vector<Capacity> big = sample_cylinder(d, seed, rep, s.big);
  if (s.big_kappa) {
    EXPECT_EQ(g.lhs, phi(s.big, big).value);
    EXPECT_EQ(g.middle, phi_kappa(s.big, big, *s.big_kappa).value);
  } else {
    EXPECT_EQ(g.lhs, tau(s.big, big).value);
  }
  Capacity pieces = 0;
  for (size_t i = 0; i < s.pieces.size(); ++i) {
    std::vector<Capacity> caps = sample_cylinder(d, seed, rep, s.pieces[i]);
    pieces += s.piece_kappa[i] ? phi_kappa(s.pieces[i], caps, *s.piece_kappa[i]).value : tau(s.pieces[i], caps).value;
  }
  EXPECT_EQ(g.pieces_sum, pieces);
  EXPECT_EQ(g.rhs, g.pieces_sum + g.connector_value);
  EXPECT_TRUE(g.inequality_ok) << s.kind << " rep " << rep << " lhs " << g.lhs << " rhs " << g.rhs;
  EXPECT_TRUE(g.structural_ok) << s.kind << " rep " << rep;
  EXPECT_LE(g.lhs, g.middle);
}

}  // namespace

TEST(Gluing, PhiConstruction) {
  GluingConfig cfg;
  cfg.n = 8;
  cfg.N = 48;
  SegmentTemplate t = SegmentTemplate::unit(Direction::make(1, 0));
  GluingSetup s = build_phi_gluing(cfg, t.at(cfg.N, double(cfg.N)), Direction::make(1, 1));
  EXPECT_GE(s.pieces.size(), 2u);
  for (const auto& p : s.pieces)
    for (const auto& v : p.vertices()) ASSERT_TRUE(s.big.contains_lattice(v.x, v.y));
  DistributionSpec d = DistributionSpec::two_atom(1.0, 3.0, 0.5);
  for (uint64_t rep = 0; rep < 10; ++rep) expect_consistent(s, d, 41, rep);
}

TEST(Gluing, SlabConstruction) {
  GluingConfig cfg;
  cfg.n = 4;
  cfg.N = 64;
  SegmentTemplate t = SegmentTemplate::unit(Direction::make(0, 1));
  GluingSetup s = build_slab_gluing(cfg, t.at(cfg.n, 4.0), Rational::from_pair(1, 2), Direction::make(1, 2));
  EXPECT_GE(s.pieces.size(), 2u);
  DistributionSpec d = DistributionSpec::uniform(0.5, 2.0);
  for (uint64_t rep = 0; rep < 10; ++rep) expect_consistent(s, d, 7, rep);
}

TEST(Gluing, ZeroFieldGivesZeroFlows) {
  GluingSetup s = build_triangle_gluing(small_config(), {Rational(0), Rational(0)}, {Rational(2), Rational(0)},
                                        {Rational(1), Rational(1)});
  GluingReport g = verify_gluing(s, DistributionSpec::constant(0.0), 1, 0);
  EXPECT_EQ(g.lhs, 0);
  EXPECT_EQ(g.rhs, 0);
  EXPECT_TRUE(g.inequality_ok);
  EXPECT_TRUE(g.structural_ok);
}

TEST(Gluing, RandomTriangles) {
  // c = a + s (b - a) + t rot90(b - a) stays within distance 0.7 of [a, b] so the legs fit in cyl(N[ab], N).
  std::mt19937_64 rng(123);
  DistributionSpec d = DistributionSpec::two_atom(1.0, 2.0, 0.3);
  int triangles = 0;
  while (triangles < 10) {
    auto coord = [&] { return int64_t(rng() % 7) - 3; };
    int64_t ax = coord(), ay = coord(), bx = coord(), by = coord();
    int64_t dx = bx - ax, dy = by - ay;
    if (dx == 0 && dy == 0) continue;
    Rational s = Rational::from_pair(1 + int64_t(rng() % 3), 4);
    Rational t = Rational::from_pair(int64_t(rng() % 2) ? 1 : -1, 8 * (1 + int64_t(rng() % 3)));
    if (std::fabs(t.to_double()) * std::hypot(double(dx), double(dy)) > 0.7) continue;
    RPoint a{Rational(ax), Rational(ay)}, b{Rational(bx), Rational(by)};
    RPoint c{a.x + s * Rational(dx) - t * Rational(dy), a.y + s * Rational(dy) + t * Rational(dx)};
    auto leg = [](const RPoint& u, const RPoint& v) {
      return std::hypot((v.x - u.x).to_double(), (v.y - u.y).to_double());
    };
    if (std::min(leg(a, c), leg(c, b)) < 0.75) continue;  // two pieces of length n l per leg
    GluingSetup g = build_triangle_gluing(small_config(), a, b, c);
    ++triangles;
    for (uint64_t rep = 0; rep < 5; ++rep) expect_consistent(g, d, 11, rep);
  }
}

TEST(Gluing, RejectsObtuseTriangle) {
  try {
    build_triangle_gluing(small_config(), {Rational(0), Rational(0)}, {Rational(2), Rational(0)},
                          {Rational(3), Rational(1)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BadTriangle);
  }
}

TEST(Gluing, PiecesTallerThanTheCylinderDoNotFit) {
  GluingConfig cfg;
  cfg.n = 8;
  cfg.N = 48;
  cfg.hprime_c = 3.0;
  cfg.zeta_c = 3.0;
  SegmentTemplate t = SegmentTemplate::unit(Direction::make(1, 0));
  try {
    build_phi_gluing(cfg, t.at(cfg.N, 1.0), Direction::make(1, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DoesNotFit);
  }
}

TEST(Gluing, ConnectorEdgesNearPoints) {
  SegmentTemplate t = SegmentTemplate::unit(Direction::make(0, 1));
  Cylinder c(t.at(10, 5.0));
  auto near = connector_edges(c, {Vec2{5.0, 0.0}}, {}, 1.5);
  for (int32_t e : near) {
    const auto& u = c.vertices()[size_t(c.edges()[size_t(e)].u)];
    const auto& v = c.vertices()[size_t(c.edges()[size_t(e)].v)];
    EXPECT_LT(std::hypot(double(u.x) - 5.0, double(u.y)), 1.5);
    EXPECT_LT(std::hypot(double(v.x) - 5.0, double(v.y)), 1.5);
  }
  // Unit-step neighbours of (5,0) within radius 1.5: the 4 edges at (5,0) plus the 8 of the unit square ring.
  EXPECT_EQ(near.size(), 12u);
}
