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

#include <cstdint>
#include <string>
#include <vector>

#include "tiltedflow/flow.hpp"

namespace tiltedflow {

struct DualResult {
  Capacity value = 0;
  CutSet cut;                 // primal edge ids crossed by the dual path
  int64_t primal_vertices = 0;  // in the traced component, including s and t
  int64_t primal_edges = 0;
  int64_t faces = 0;
  bool euler_ok = true;
  bool disconnected = false;  // A1 and A2 lie in different components
};

// Minimum cut between the two arcs as a shortest path in the planar dual of
// the cylinder graph augmented by a super-source, a super-sink and an edge
// joining them outside the cylinder.
DualResult dual_min_cut(const Cylinder& cyl, const Arcs& arcs, const std::vector<Capacity>& weights);

// The dual graph of one (cylinder, arcs) pair, reusable across fields.
class DualSolver {
 public:
  DualSolver(const Cylinder& cyl, const Arcs& arcs);
  DualResult solve(const std::vector<Capacity>& weights) const;
  // Value only; skips the cut reconstruction.
  Capacity value(const std::vector<Capacity>& weights) const;

 private:
  size_t edge_count_ = 0;
  DualResult shape_;  // topology fields, value and cut left empty
  int32_t src_ = -1, dst_ = -1;
  std::vector<int32_t> adj_start_;
  std::vector<std::pair<int32_t, int32_t>> adj_;  // (face, primal edge)

  Capacity run(const std::vector<Capacity>& weights, std::vector<int32_t>* via, std::vector<int32_t>* prev) const;
};

DualResult dual_min_cut_phi(const Cylinder& cyl, const std::vector<Capacity>& caps);
// Minimal number of edges of a cutset in the tau configuration.
int64_t min_cut_edge_count(const Cylinder& cyl);

struct KappaClass {
  BoundaryCondition bc;
  std::vector<uint8_t> membership;
};

struct AdmissibleFamily {
  std::vector<KappaClass> members;
  size_t size() const { return members.size(); }
};

AdmissibleFamily enumerate_kappa(const Cylinder& cyl);

struct DualityReport {
  Capacity phi = 0;
  Capacity min_phi_kappa = 0;
  size_t argmin = 0;
  double argmin_k = 0.0;
  double argmin_theta = 0.0;
  size_t family_size = 0;
  bool equal = false;
};

DualityReport verify_duality_lemma(const Cylinder& cyl, const std::vector<Capacity>& caps,
                                   const AdmissibleFamily& family);

}  // namespace tiltedflow
