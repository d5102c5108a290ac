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
#include <limits>
#include <queue>
#include <random>

#include "tiltedflow/environment.hpp"
#include "tiltedflow/flow.hpp"

using namespace tiltedflow;

namespace {

// Sources and sinks are disconnected after deleting the masked edges.
bool oracle_separated(const FlowNetwork& net, uint32_t removed) {
  std::vector<std::vector<int32_t>> adj(size_t(net.vertex_count));
  for (size_t i = 0; i < net.edges.size(); ++i) {
    if (removed >> i & 1u) continue;
    adj[size_t(net.edges[i].u)].push_back(net.edges[i].v);
    adj[size_t(net.edges[i].v)].push_back(net.edges[i].u);
  }
  std::vector<char> seen(size_t(net.vertex_count), 0);
  std::queue<int32_t> todo;
  for (int32_t s : net.sources) {
    seen[size_t(s)] = 1;
    todo.push(s);
  }
  while (!todo.empty()) {
    int32_t u = todo.front();
    todo.pop();
    for (int32_t w : adj[size_t(u)])
      if (!seen[size_t(w)]) seen[size_t(w)] = 1, todo.push(w);
  }
  for (int32_t t : net.sinks)
    if (seen[size_t(t)]) return false;
  return true;
}

Capacity oracle_min_cut(const FlowNetwork& net) {
  Capacity best = std::numeric_limits<Capacity>::max();
  const uint32_t m = uint32_t(net.edges.size());
  for (uint32_t mask = 0; mask < (1u << m); ++mask) {
    Capacity v = 0;
    for (uint32_t i = 0; i < m; ++i)
      if (mask >> i & 1u) v += net.edges[i].cap;
    if (v < best && oracle_separated(net, mask)) best = v;
  }
  return best;
}

FlowNetwork random_network(std::mt19937_64& rng) {
  FlowNetwork net;
  net.vertex_count = 4 + int32_t(rng() % 5);
  const size_t m = 1 + rng() % 13;
  for (size_t i = 0; i < m; ++i) {
    int32_t u = int32_t(rng() % uint64_t(net.vertex_count));
    int32_t v = int32_t(rng() % uint64_t(net.vertex_count - 1));
    if (v >= u) ++v;
    net.edges.push_back({u, v, Capacity(rng() % 9) * (kFixedScale / 4)});
  }
  std::vector<int32_t> order(size_t(net.vertex_count));
  for (int32_t i = 0; i < net.vertex_count; ++i) order[size_t(i)] = i;
  std::shuffle(order.begin(), order.end(), rng);
  const size_t ns = 1 + rng() % 2, nt = 1 + rng() % 2;
  net.sources.assign(order.begin(), order.begin() + long(ns));
  net.sinks.assign(order.begin() + long(ns), order.begin() + long(ns + nt));
  return net;
}

CylinderSpec axis_spec(int64_t width, int64_t n, Rational h) {
  CylinderSpec s;
  s.dir = Direction::make(0, 1);
  s.a = {Rational(0), Rational(0)};
  s.b = {Rational(width), Rational(0)};
  s.n = n;
  s.h = h;
  return s;
}

std::vector<Capacity> constant_caps(const Cylinder& c, Capacity v) { return std::vector<Capacity>(c.edge_count(), v); }

}  // namespace

TEST(MaxFlow, MatchesBruteForceOracle) {
  std::mt19937_64 rng(2718);
  for (int it = 0; it < 1000; ++it) {
    FlowNetwork net = random_network(rng);
    FlowResult r = max_flow(net);
    ASSERT_EQ(r.value, oracle_min_cut(net)) << "instance " << it;
    ASSERT_EQ(check_flow_result(net, r), "") << "instance " << it;
    ASSERT_EQ(brute_force_min_cut(net).value, r.value) << "instance " << it;
  }
}

TEST(MaxFlow, TwoParallelPaths) {
  FlowNetwork net;
  net.vertex_count = 4;
  net.edges = {{0, 1, kFixedScale}, {1, 3, kFixedScale}, {0, 2, kFixedScale}, {2, 3, kFixedScale}};
  net.sources = {0};
  net.sinks = {3};
  FlowResult r = max_flow(net);
  EXPECT_EQ(r.value, 2 * kFixedScale);
  EXPECT_EQ(r.cut.value, 2 * kFixedScale);
  EXPECT_EQ(r.cut.edges.size(), 2u);
}

TEST(MaxFlow, ParallelCompositionAdds) {
  std::mt19937_64 rng(5);
  for (int it = 0; it < 100; ++it) {
    FlowNetwork a = random_network(rng), b = random_network(rng);
    FlowNetwork both = a;
    const int32_t off = a.vertex_count;
    both.vertex_count += b.vertex_count;
    for (auto e : b.edges) both.edges.push_back({e.u + off, e.v + off, e.cap});
    for (int32_t s : b.sources) both.sources.push_back(s + off);
    for (int32_t t : b.sinks) both.sinks.push_back(t + off);
    EXPECT_EQ(max_flow(both).value, max_flow(a).value + max_flow(b).value);
  }
}

TEST(MaxFlow, CheckerRejectsBrokenFlow) {
  FlowNetwork net;
  net.vertex_count = 3;
  net.edges = {{0, 1, kFixedScale}, {1, 2, kFixedScale}};
  net.sources = {0};
  net.sinks = {2};
  FlowResult r = max_flow(net);
  ASSERT_EQ(check_flow_result(net, r), "");
  FlowResult over = r;
  over.flow[0] = 2 * kFixedScale;
  EXPECT_NE(check_flow_result(net, over), "");
  FlowResult leak = r;
  leak.flow[1] = 0;
  EXPECT_NE(check_flow_result(net, leak), "");
  FlowResult bad_cut = r;
  bad_cut.cut.edges.clear();
  EXPECT_NE(check_flow_result(net, bad_cut), "");
}

TEST(CylinderFlow, NineVertexUnitCapacities) {
  Cylinder c(axis_spec(2, 1, Rational(1)));
  ASSERT_EQ(c.vertex_count(), 9u);
  FlowResult f = phi(c, constant_caps(c, kFixedScale));
  EXPECT_EQ(f.value, 3 * kFixedScale);
  FlowResult t = tau(c, constant_caps(c, kFixedScale));
  EXPECT_EQ(t.value, 3 * kFixedScale);
}

TEST(CylinderFlow, ZeroFieldGivesZero) {
  Cylinder c(axis_spec(3, 2, Rational(3)));
  EXPECT_EQ(phi(c, constant_caps(c, 0)).value, 0);
  EXPECT_EQ(tau(c, constant_caps(c, 0)).value, 0);
}

TEST(CylinderFlow, UnitCapacitiesCountColumns) {
  // Straight cylinder of width w*n: phi with unit capacities is the number of columns.
  for (int64_t w : {1, 2, 3}) {
    for (int64_t n : {1, 2, 4}) {
      Cylinder c(axis_spec(w, n, Rational(n)));
      EXPECT_EQ(phi(c, constant_caps(c, kFixedScale)).value, (w * n + 1) * kFixedScale) << w << " " << n;
    }
  }
}

TEST(CylinderFlow, MonotoneInCapacities) {
  CylinderSpec s;
  s.dir = Direction::make(1, 2);
  s.a = {Rational(0), Rational(0)};
  s.b = {Rational(2), Rational(-1)};
  s.n = 3;
  s.h = Rational(4);
  Cylinder c(s);
  DistributionSpec d = DistributionSpec::uniform(0.0, 2.0);
  std::mt19937_64 rng(8);
  for (uint64_t rep = 0; rep < 20; ++rep) {
    std::vector<Capacity> caps = sample_cylinder(d, 3, rep, c);
    FlowResult base = phi(c, caps);
    ASSERT_EQ(check_flow_result(cylinder_network(c, caps, top_bottom_arcs(c)), base), "");
    std::vector<Capacity> more = caps;
    for (auto& v : more) v += Capacity(rng() % 3) * kFixedScale / 8;
    EXPECT_GE(phi(c, more).value, base.value);
    EXPECT_GE(tau(c, more).value, tau(c, caps).value);
    // phi is at most tau: the tau arcs contain the phi arcs.
    EXPECT_LE(base.value, tau(c, caps).value);
  }
}
