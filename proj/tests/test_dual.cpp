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
#include <random>
#include <set>
#include <string>

#include "tiltedflow/dual.hpp"
#include "tiltedflow/environment.hpp"
#include "tiltedflow/rates.hpp"

using namespace tiltedflow;

namespace {

CylinderSpec tilted_spec(int64_t p, int64_t q, int64_t lam, int64_t n, Rational h) {
  CylinderSpec s;
  s.dir = Direction::make(p, q);
  s.a = {Rational::from_pair(1, 3), Rational::from_pair(-1, 5)};
  s.b = {s.a.x + Rational(lam * s.dir.q), s.a.y - Rational(lam * s.dir.p)};
  s.n = n;
  s.h = h;
  return s;
}

std::set<std::string> grid_partitions(const Cylinder& c, int64_t m) {
  // Chord endpoints on the lattice of step 1/m over [-h, h] (axis case, N = 1).
  std::set<std::string> out;
  const int64_t hm = (c.h() * Rational(m)).num();
  for (int64_t i = -hm; i <= hm; ++i) {
    for (int64_t j = -hm; j <= hm; ++j) {
      Chord ch{Surd::rational(Rational::from_pair(i, m), 1), Surd::rational(Rational::from_pair(j, m), 1)};
      try {
        Arcs a = boundary_arcs(c, make_boundary_condition(c, ch));
        out.insert(std::string(a.membership.begin(), a.membership.end()));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::EmptyArc) throw;
      }
    }
  }
  return out;
}

}  // namespace

TEST(Dual, MatchesDinicOnMixedDirections) {
  const int dirs[][2] = {{0, 1}, {1, 1}, {2, 1}, {3, 2}, {-1, 2}, {1, -3}};
  DistributionSpec d = DistributionSpec::two_atom(0.5, 2.0, 0.4);
  int instances = 0;
  for (const auto& dir : dirs) {
    for (int64_t n : {2, 4, 6}) {
      Cylinder c(tilted_spec(dir[0], dir[1], 1, n, Rational::from_pair(2 * n + 1, 2)));
      ASSERT_LE(c.edge_count(), 5000u);
      Arcs arcs = top_bottom_arcs(c);
      DualSolver solver(c, arcs);
      for (uint64_t rep = 0; rep < 28; ++rep) {
        std::vector<Capacity> caps = sample_cylinder(d, 17, rep, c);
        DualResult r = solver.solve(caps);
        ASSERT_EQ(r.value, phi(c, caps).value) << dir[0] << "," << dir[1] << " n=" << n << " rep=" << rep;
        ASSERT_EQ(solver.value(caps), r.value);
        Capacity v = 0;
        for (int32_t e : r.cut.edges) v += caps[size_t(e)];
        ASSERT_EQ(v, r.value);
        ASSERT_TRUE(separates(cylinder_network(c, caps, arcs), r.cut.edges));
        ++instances;
      }
    }
  }
  EXPECT_GE(instances, 500);
}

TEST(Dual, EulerRelationHolds) {
  for (auto [p, q] : {std::pair{0, 1}, {1, 1}, {2, 1}, {3, 2}}) {
    Cylinder c(tilted_spec(p, q, 2, 3, Rational(3)));
    DualResult r = dual_min_cut_phi(c, std::vector<Capacity>(c.edge_count(), kFixedScale));
    EXPECT_TRUE(r.euler_ok) << p << "," << q;
    EXPECT_FALSE(r.disconnected);
  }
}

TEST(Dual, UnitStraightCylinderCutsColumns) {
  CylinderSpec s = tilted_spec(0, 1, 1, 5, Rational(4));
  s.a = {Rational(0), Rational(0)};
  s.b = {Rational(1), Rational(0)};
  Cylinder c(s);
  DualResult r = dual_min_cut_phi(c, std::vector<Capacity>(c.edge_count(), 1));
  EXPECT_EQ(r.value, 6);
  for (int32_t e : r.cut.edges) EXPECT_EQ(c.edges()[size_t(e)].dir, 1);
}

TEST(Dual, SingleColumnCutsTheColumn) {
  CylinderSpec s = tilted_spec(0, 1, 1, 1, Rational(3));
  s.a = {Rational(0), Rational(0)};
  s.b = {Rational::from_pair(1, 2), Rational(0)};
  Cylinder c(s);
  ASSERT_EQ(c.vertex_count(), 7u);
  std::vector<Capacity> caps = sample_cylinder(DistributionSpec::uniform(1.0, 2.0), 4, 0, c);
  DualResult r = dual_min_cut_phi(c, caps);
  EXPECT_EQ(r.value, phi(c, caps).value);
  EXPECT_EQ(r.cut.edges.size(), 1u);
}

TEST(Kappa, OneRowHasTrivialFamily) {
  CylinderSpec s = tilted_spec(0, 1, 3, 1, Rational::from_pair(2, 5));
  s.a = {Rational(0), Rational(0)};
  s.b = {Rational(3), Rational(0)};
  EXPECT_EQ(enumerate_kappa(Cylinder(s)).size(), 1u);
}

TEST(Kappa, FamilyMatchesGridRefinement) {
  CylinderSpec s = tilted_spec(0, 1, 1, 4, Rational(3));
  s.a = {Rational(0), Rational(0)};
  s.b = {Rational(1), Rational(0)};
  Cylinder c(s);
  AdmissibleFamily fam = enumerate_kappa(c);
  std::set<std::string> members;
  for (const auto& m : fam.members) members.insert(std::string(m.membership.begin(), m.membership.end()));
  EXPECT_EQ(members.size(), fam.size());  // distinct partitions
  size_t prev = 0;
  std::set<std::string> grid;
  for (int64_t m = 1; m <= 64; m *= 2) {
    grid = grid_partitions(c, m);
    if (m > 1 && grid.size() == prev) break;
    prev = grid.size();
  }
  EXPECT_EQ(grid, members);
}

TEST(Kappa, FamilyGrowsLikeHeightSquared) {
  std::vector<double> ratios;
  for (int64_t h : {4, 8, 16, 32}) {
    CylinderSpec s = tilted_spec(1, 2, 1, 4, Rational(h));
    size_t size = enumerate_kappa(Cylinder(s)).size();
    ratios.push_back(double(size) / double(h * h));
  }
  double lo = *std::min_element(ratios.begin(), ratios.end());
  double hi = *std::max_element(ratios.begin(), ratios.end());
  EXPECT_GT(lo, 0.0);
  EXPECT_LE(hi / lo, 2.0);
}

TEST(Kappa, PhiEqualsMinOverFamilyOnRandomInstances) {
  std::mt19937_64 rng(99);
  const int dirs[][2] = {{0, 1}, {1, 1}, {2, 1}, {1, 2}, {3, 2}, {-1, 1}};
  DistributionSpec d = DistributionSpec::two_atom(1.0, 3.0, 0.5);
  for (int it = 0; it < 100; ++it) {
    const auto& dir = dirs[rng() % 6];
    Cylinder c(tilted_spec(dir[0], dir[1], 1, 2 + int64_t(rng() % 2), Rational::from_pair(3 + int64_t(rng() % 4), 2)));
    AdmissibleFamily fam = enumerate_kappa(c);
    std::vector<Capacity> caps = sample_cylinder(d, 5, uint64_t(it), c);
    DualityReport rep = verify_duality_lemma(c, caps, fam);
    EXPECT_LE(rep.phi, rep.min_phi_kappa);
    EXPECT_TRUE(rep.equal) << "instance " << it << " phi " << rep.phi << " min " << rep.min_phi_kappa;
  }
}

TEST(Kappa, PhiEqualsMinOverFamilyZeroField) {
  Cylinder c(tilted_spec(2, 1, 1, 3, Rational(2)));
  DualityReport rep = verify_duality_lemma(c, std::vector<Capacity>(c.edge_count(), 0), enumerate_kappa(c));
  EXPECT_EQ(rep.phi, 0);
  EXPECT_EQ(rep.min_phi_kappa, 0);
  EXPECT_TRUE(rep.equal);
}

TEST(CutCount, WithinTwoOverNlOfL1Length) {
  for (int64_t p = -5; p <= 5; ++p) {
    for (int64_t q = 0; q <= 5; ++q) {
      if (std::gcd(std::abs(p), q) != 1 || (q == 0 && p != 1)) continue;
      Direction dir = Direction::make(p, q);
      SegmentTemplate t = SegmentTemplate::unit(dir);
      for (int64_t n : {8, 16}) {
        Cylinder c(t.at(n, double(n)));
        double nl = double(n) * t.length();
        double l1 = std::fabs(std::cos(dir.theta())) + std::fabs(std::sin(dir.theta()));
        int64_t count = min_cut_edge_count(c);
        EXPECT_LE(std::fabs(double(count) / nl - l1), 2.0 / nl) << p << "," << q << " n=" << n;
        EXPECT_LE(size_t(count), c.edge_count());
      }
    }
  }
}
