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

#include "tiltedflow/flow.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <string>

namespace tiltedflow {

void FlowNetwork::validate() const {
  if (vertex_count <= 0) fail(ErrorCode::InvalidNetwork, "network has no vertices");
  if (sources.empty() || sinks.empty()) fail(ErrorCode::InvalidNetwork, "source and sink sets must be nonempty");
  std::vector<uint8_t> mark(size_t(vertex_count), 0);
  for (int32_t s : sources) {
    if (s < 0 || s >= vertex_count) fail(ErrorCode::InvalidNetwork, "source out of range");
    mark[size_t(s)] = 1;
  }
  for (int32_t z : sinks) {
    if (z < 0 || z >= vertex_count) fail(ErrorCode::InvalidNetwork, "sink out of range");
    if (mark[size_t(z)] == 1) fail(ErrorCode::InvalidNetwork, "source and sink sets intersect");
  }
  for (const auto& e : edges) {
    if (e.u < 0 || e.v < 0 || e.u >= vertex_count || e.v >= vertex_count)
      fail(ErrorCode::InvalidNetwork, "edge endpoint out of range");
    if (e.cap < 0) fail(ErrorCode::InvalidNetwork, "negative capacity");
  }
}

namespace {

struct Arc {
  int32_t to;
  Capacity res;
};

class Dinic {
 public:
  explicit Dinic(int32_t n) : head_(size_t(n) + 1, 0), level_(size_t(n)), it_(size_t(n)), n_(n) {}

  void build(const std::vector<std::pair<int32_t, int32_t>>& ends, const std::vector<Capacity>& caps) {
    // CSR adjacency; arc 2i is u->v and 2i+1 is v->u of undirected edge i.
    std::vector<int32_t> deg(size_t(n_), 0);
    for (const auto& e : ends) {
      ++deg[size_t(e.first)];
      ++deg[size_t(e.second)];
    }
    for (int32_t i = 0; i < n_; ++i) head_[size_t(i) + 1] = head_[size_t(i)] + deg[size_t(i)];
    slots_.assign(size_t(head_[size_t(n_)]), 0);
    arcs_.resize(ends.size() * 2);
    std::vector<int32_t> fill(head_.begin(), head_.end() - 1);
    for (size_t i = 0; i < ends.size(); ++i) {
      auto [u, v] = ends[i];
      arcs_[2 * i] = Arc{v, caps[i]};
      arcs_[2 * i + 1] = Arc{u, caps[i]};
      slots_[size_t(fill[size_t(u)]++)] = int32_t(2 * i);
      slots_[size_t(fill[size_t(v)]++)] = int32_t(2 * i + 1);
    }
  }

  Capacity run(int32_t s, int32_t t) {
    Capacity total = 0;
    while (bfs(s, t)) {
      for (int32_t i = 0; i < n_; ++i) it_[size_t(i)] = head_[size_t(i)];
      while (true) {
        Capacity f = dfs(s, t, std::numeric_limits<Capacity>::max());
        if (f == 0) break;
        total += f;
      }
    }
    return total;
  }

  std::vector<uint8_t> reachable(int32_t s) const {
    std::vector<uint8_t> seen(size_t(n_), 0);
    std::vector<int32_t> stack{s};
    seen[size_t(s)] = 1;
    while (!stack.empty()) {
      int32_t u = stack.back();
      stack.pop_back();
      for (int32_t k = head_[size_t(u)]; k < head_[size_t(u) + 1]; ++k) {
        const Arc& a = arcs_[size_t(slots_[size_t(k)])];
        if (a.res > 0 && !seen[size_t(a.to)]) {
          seen[size_t(a.to)] = 1;
          stack.push_back(a.to);
        }
      }
    }
    return seen;
  }

  Capacity residual(size_t arc) const { return arcs_[arc].res; }

 private:
  bool bfs(int32_t s, int32_t t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::vector<int32_t> queue{s};
    level_[size_t(s)] = 0;
    for (size_t qi = 0; qi < queue.size(); ++qi) {
      int32_t u = queue[qi];
      for (int32_t k = head_[size_t(u)]; k < head_[size_t(u) + 1]; ++k) {
        const Arc& a = arcs_[size_t(slots_[size_t(k)])];
        if (a.res > 0 && level_[size_t(a.to)] < 0) {
          level_[size_t(a.to)] = level_[size_t(u)] + 1;
          queue.push_back(a.to);
        }
      }
    }
    return level_[size_t(t)] >= 0;
  }

  Capacity dfs(int32_t u, int32_t t, Capacity limit) {
    if (u == t) return limit;
    for (int32_t& k = it_[size_t(u)]; k < head_[size_t(u) + 1]; ++k) {
      int32_t id = slots_[size_t(k)];
      Arc& a = arcs_[size_t(id)];
      if (a.res <= 0 || level_[size_t(a.to)] != level_[size_t(u)] + 1) continue;
      Capacity f = dfs(a.to, t, std::min(limit, a.res));
      if (f > 0) {
        a.res -= f;
        arcs_[size_t(id ^ 1)].res += f;
        return f;
      }
    }
    return 0;
  }

  std::vector<int32_t> head_;
  std::vector<int32_t> slots_;
  std::vector<Arc> arcs_;
  std::vector<int32_t> level_;
  std::vector<int32_t> it_;
  int32_t n_;
};

Capacity terminal_capacity(const FlowNetwork& net) {
  Capacity sum = 1;
  for (const auto& e : net.edges) {
    if (__builtin_add_overflow(sum, e.cap, &sum))
      fail(ErrorCode::OverflowRisk, "total capacity exceeds 64-bit range");
  }
  return sum;
}

}  // namespace

FlowResult max_flow(const FlowNetwork& net) {
  net.validate();
  const int32_t n = net.vertex_count;
  const int32_t s = n, t = n + 1;
  const Capacity inf = terminal_capacity(net);
  std::vector<std::pair<int32_t, int32_t>> ends;
  std::vector<Capacity> caps;
  ends.reserve(net.edges.size() + net.sources.size() + net.sinks.size());
  for (const auto& e : net.edges) {
    ends.emplace_back(e.u, e.v);
    caps.push_back(e.cap);
  }
  for (int32_t a : net.sources) {
    ends.emplace_back(s, a);
    caps.push_back(inf);
  }
  for (int32_t z : net.sinks) {
    ends.emplace_back(z, t);
    caps.push_back(inf);
  }
  Dinic d(n + 2);
  d.build(ends, caps);
  FlowResult res;
  res.value = d.run(s, t);
  res.flow.resize(net.edges.size());
  for (size_t i = 0; i < net.edges.size(); ++i) res.flow[i] = net.edges[i].cap - d.residual(2 * i);
  auto seen = d.reachable(s);
  for (size_t i = 0; i < net.edges.size(); ++i) {
    const auto& e = net.edges[i];
    if (seen[size_t(e.u)] != seen[size_t(e.v)]) {
      res.cut.edges.push_back(int32_t(i));
      res.cut.value += e.cap;
    }
  }
  return res;
}

bool separates(int32_t vertex_count, const std::vector<std::pair<int32_t, int32_t>>& edges,
               const std::vector<uint8_t>& removed, const std::vector<int32_t>& sources,
               const std::vector<int32_t>& sinks) {
  std::vector<std::vector<int32_t>> adj(static_cast<size_t>(vertex_count));
  for (size_t i = 0; i < edges.size(); ++i) {
    if (!removed.empty() && removed[i]) continue;
    adj[size_t(edges[i].first)].push_back(edges[i].second);
    adj[size_t(edges[i].second)].push_back(edges[i].first);
  }
  std::vector<uint8_t> seen(size_t(vertex_count), 0);
  std::vector<int32_t> stack;
  for (int32_t a : sources) {
    if (!seen[size_t(a)]) {
      seen[size_t(a)] = 1;
      stack.push_back(a);
    }
  }
  while (!stack.empty()) {
    int32_t u = stack.back();
    stack.pop_back();
    for (int32_t w : adj[size_t(u)]) {
      if (!seen[size_t(w)]) {
        seen[size_t(w)] = 1;
        stack.push_back(w);
      }
    }
  }
  for (int32_t z : sinks)
    if (seen[size_t(z)]) return false;
  return true;
}

bool separates(const FlowNetwork& net, const std::vector<int32_t>& removed) {
  std::vector<std::pair<int32_t, int32_t>> ends;
  for (const auto& e : net.edges) ends.emplace_back(e.u, e.v);
  std::vector<uint8_t> mask(net.edges.size(), 0);
  for (int32_t r : removed) mask[size_t(r)] = 1;
  return separates(net.vertex_count, ends, mask, net.sources, net.sinks);
}

CutSet brute_force_min_cut(const FlowNetwork& net, size_t max_edges) {
  net.validate();
  const size_t m = net.edges.size();
  if (m > max_edges) fail(ErrorCode::TooLarge, "brute-force oracle limited to " + std::to_string(max_edges) + " edges");
  if (net.vertex_count > 64) fail(ErrorCode::TooLarge, "brute-force oracle limited to 64 vertices");
  uint64_t src = 0, snk = 0;
  for (int32_t a : net.sources) src |= uint64_t(1) << a;
  for (int32_t z : net.sinks) snk |= uint64_t(1) << z;

  // Closure of the sources over the kept edges (bitmask of kept edges).
  auto connected = [&](uint64_t kept) {
    uint64_t reach = src;
    while (true) {
      uint64_t next = reach;
      for (size_t i = 0; i < m; ++i) {
        if (!((kept >> i) & 1)) continue;
        uint64_t bu = uint64_t(1) << net.edges[i].u, bv = uint64_t(1) << net.edges[i].v;
        if (next & (bu | bv)) next |= bu | bv;
      }
      if (next == reach) break;
      reach = next;
    }
    return (reach & snk) != 0;
  };

  CutSet best;
  best.value = std::numeric_limits<Capacity>::max();
  uint64_t best_mask = 0;
  // Depth-first over edges: each edge is either kept or put in the cut. A
  // branch stops when its value cannot improve or its kept edges already
  // connect the terminals.
  struct Frame {
    size_t depth;
    uint64_t kept;
    uint64_t cut;
    Capacity value;
  };
  std::vector<Frame> stack{{0, 0, 0, 0}};
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    if (f.value >= best.value) continue;
    if (connected(f.kept)) continue;
    if (f.depth == m) {
      best.value = f.value;
      best_mask = f.cut;
      continue;
    }
    uint64_t bit = uint64_t(1) << f.depth;
    stack.push_back({f.depth + 1, f.kept, f.cut | bit, f.value + net.edges[f.depth].cap});
    stack.push_back({f.depth + 1, f.kept | bit, f.cut, f.value});
  }
  for (size_t i = 0; i < m; ++i)
    if ((best_mask >> i) & 1) best.edges.push_back(int32_t(i));
  return best;
}

std::string check_flow_result(const FlowNetwork& net, const FlowResult& res) {
  std::vector<Capacity> balance(size_t(net.vertex_count), 0);
  for (size_t i = 0; i < net.edges.size(); ++i) {
    const auto& e = net.edges[i];
    Capacity f = res.flow[i];
    if (f > e.cap || -f > e.cap) return "capacity constraint violated on edge " + std::to_string(i);
    balance[size_t(e.u)] -= f;
    balance[size_t(e.v)] += f;
  }
  std::vector<uint8_t> role(size_t(net.vertex_count), 0);
  for (int32_t a : net.sources) role[size_t(a)] = 1;
  for (int32_t z : net.sinks) role[size_t(z)] = 2;
  Capacity out = 0, in = 0;
  for (int32_t v = 0; v < net.vertex_count; ++v) {
    if (role[size_t(v)] == 0 && balance[size_t(v)] != 0) return "node law violated at vertex " + std::to_string(v);
    if (role[size_t(v)] == 1) out -= balance[size_t(v)];
    if (role[size_t(v)] == 2) in += balance[size_t(v)];
  }
  if (out != res.value || in != res.value) return "flow value does not match terminal balances";
  Capacity cut_value = 0;
  for (int32_t e : res.cut.edges) cut_value += net.edges[size_t(e)].cap;
  if (cut_value != res.cut.value || cut_value != res.value) return "cut value differs from flow value";
  if (!separates(net, res.cut.edges)) return "certifying cut does not separate";
  return "";
}

FlowNetwork cylinder_network(const Cylinder& cyl, const std::vector<Capacity>& caps, const Arcs& arcs) {
  if (caps.size() != cyl.edge_count()) fail(ErrorCode::InvalidNetwork, "capacity field does not match the cylinder");
  FlowNetwork net;
  net.vertex_count = int32_t(cyl.vertex_count());
  net.edges.reserve(cyl.edge_count());
  const auto& es = cyl.edges();
  for (size_t i = 0; i < es.size(); ++i) net.edges.push_back(FlowEdge{es[i].u, es[i].v, caps[i]});
  for (const auto& av : arcs.a1) net.sources.push_back(av.vertex);
  for (const auto& av : arcs.a2) net.sinks.push_back(av.vertex);
  return net;
}

FlowResult phi_kappa(const Cylinder& cyl, const std::vector<Capacity>& caps, const BoundaryCondition& bc) {
  return max_flow(cylinder_network(cyl, caps, boundary_arcs(cyl, bc)));
}

FlowResult tau(const Cylinder& cyl, const std::vector<Capacity>& caps) { return phi_kappa(cyl, caps, tau_condition(cyl)); }

FlowResult phi(const Cylinder& cyl, const std::vector<Capacity>& caps) {
  return max_flow(cylinder_network(cyl, caps, top_bottom_arcs(cyl)));
}

}  // namespace tiltedflow
