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
#include <vector>

#include "tiltedflow/geometry.hpp"

namespace tiltedflow {

using Capacity = int64_t;  // fixed point, see kFixedScale

struct FlowEdge {
  int32_t u = 0;
  int32_t v = 0;
  Capacity cap = 0;
};

struct FlowNetwork {
  int32_t vertex_count = 0;
  std::vector<FlowEdge> edges;
  std::vector<int32_t> sources;
  std::vector<int32_t> sinks;

  void validate() const;
};

struct CutSet {
  std::vector<int32_t> edges;  // sorted edge indices
  Capacity value = 0;
};

struct FlowResult {
  Capacity value = 0;
  std::vector<Capacity> flow;  // flow along edge i oriented u -> v
  CutSet cut;
};

// Dinic (BFS level graph + blocking flow by DFS) on the undirected network.
// The certifying cut is the source side of residual reachability.
FlowResult max_flow(const FlowNetwork& net);

// Exhaustive minimum over edge subsets that disconnect sources from sinks.
CutSet brute_force_min_cut(const FlowNetwork& net, size_t max_edges = 24);

// Deleting `removed` edges disconnects the sources from the sinks.
bool separates(const FlowNetwork& net, const std::vector<int32_t>& removed);
bool separates(int32_t vertex_count, const std::vector<std::pair<int32_t, int32_t>>& edges,
               const std::vector<uint8_t>& removed, const std::vector<int32_t>& sources,
               const std::vector<int32_t>& sinks);

// Node law, capacity constraints, value = out of sources = into sinks = V(cut),
// and the cut separates. Empty string when all hold.
std::string check_flow_result(const FlowNetwork& net, const FlowResult& res);

// Network of a cylinder with a capacity per edge (indexed like cyl.edges()).
FlowNetwork cylinder_network(const Cylinder& cyl, const std::vector<Capacity>& caps, const Arcs& arcs);

FlowResult tau(const Cylinder& cyl, const std::vector<Capacity>& caps);
FlowResult phi_kappa(const Cylinder& cyl, const std::vector<Capacity>& caps, const BoundaryCondition& bc);
FlowResult phi(const Cylinder& cyl, const std::vector<Capacity>& caps);

}  // namespace tiltedflow
