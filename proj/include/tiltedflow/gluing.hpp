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
#include <optional>
#include <string>
#include <vector>

#include "tiltedflow/environment.hpp"

namespace tiltedflow {

struct GluingConfig {
  int64_t n = 8;
  int64_t N = 64;
  double zeta0 = 4.0;
  double zeta_c = 1.0, zeta_beta = 0.75;    // zeta(n) = c n^beta
  double hprime_c = 1.0, hprime_beta = 0.5;  // h'(n)
  double zetap_beta = 0.25;                  // zeta'(n) = h(n) n^beta
  double h_second = 0.0;                     // h''(N); 0 picks the smallest fitting height

  double zeta() const;
  double hprime() const;
  double zeta_prime(double h_small) const;
  void validate() const;
};

using Vec2 = std::array<double, 2>;

struct GluingReport {
  std::string kind;
  Capacity lhs = 0;          // phi_N, tau_c(N) or tau(cyl''(N))
  Capacity middle = 0;       // phi_N^{kappa_N} for the phi construction, else lhs
  Capacity pieces_sum = 0;   // sum of the small-cylinder flows
  Capacity connector_value = 0;
  Capacity rhs = 0;
  Capacity slack = 0;        // rhs - lhs
  bool inequality_ok = false;
  bool structural_ok = false;
  int64_t pieces = 0;
  int64_t connector_edges = 0;
  std::vector<int64_t> connector_parts;  // ball part, segment part
};

// Pieces are integer translates of a template cylinder placed along a chain.
struct GluingSetup {
  explicit GluingSetup(Cylinder big_cyl) : big(std::move(big_cyl)) {}

  std::string kind;
  GluingConfig config;
  Cylinder big;
  Arcs big_arcs;                  // arcs whose separation is checked
  std::optional<BoundaryCondition> big_kappa;  // kappa_N for the phi construction
  std::vector<Cylinder> pieces;
  std::vector<std::optional<BoundaryCondition>> piece_kappa;  // empty means tau
  std::vector<Vec2> junctions;    // ball centres
  std::vector<std::array<Vec2, 2>> end_segments;
  int64_t count_a = 0, count_b = 0;  // number of pieces per chain
};

// G_i = tau-cylinders along the chord kappa_N through the middle of NA.
GluingSetup build_phi_gluing(const GluingConfig& cfg, const CylinderSpec& big_spec, const Direction& tilt);
// B_i = integer translates of cyl(nA, h(n)) chained along the base of cyl''(N).
GluingSetup build_slab_gluing(const GluingConfig& cfg, const CylinderSpec& small_spec, const Rational& k,
                              const Direction& tilt);
// Weak triangle inequality: tau of cyl(N[ab], N) against pieces along [Na,Nc] and [Nc,Nb].
GluingSetup build_triangle_gluing(const GluingConfig& cfg, const RPoint& a, const RPoint& b, const RPoint& c);

std::vector<CylinderSpec> build_small_cylinders(const GluingConfig& cfg, const CylinderSpec& big_spec,
                                                const Direction& tilt);

// Edges of `cyl` with both endpoints at distance < r from a point or segment.
std::vector<int32_t> connector_edges(const Cylinder& cyl, const std::vector<Vec2>& points,
                                     const std::vector<std::array<Vec2, 2>>& segments, double r);

GluingReport verify_gluing(const GluingSetup& setup, const std::vector<Capacity>& big_caps,
                           const std::vector<std::vector<Capacity>>& piece_caps);
GluingReport verify_gluing(const GluingSetup& setup, const DistributionSpec& dist, uint64_t seed,
                           uint64_t replicate);

// Cylinder over the segment [start, start + lam (dx,dy)] with normal direction
// rot90(dx,dy); endpoints are swapped when normalization flips the direction.
CylinderSpec segment_cylinder(const RPoint& start, const Rational& lam, int64_t dx, int64_t dy, const Rational& h);

}  // namespace tiltedflow
