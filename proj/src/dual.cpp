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

#include "tiltedflow/dual.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <queue>
#include <unordered_set>

namespace tiltedflow {

namespace {

struct PerimeterKey {
  int group = 0;
  Surd value;
};

bool key_less(const PerimeterKey& a, const PerimeterKey& b) {
  if (a.group != b.group) return a.group < b.group;
  return a.value < b.value;
}

// Clockwise position along the arc: A1 runs from c up the left side, along the
// top and down the right side to d; A2 from d down the right side, along the
// bottom and up the left side to c.
PerimeterKey perimeter_key(const Cylinder& cyl, const ArcVertex& av, bool upper) {
  const VertexInfo& v = cyl.vertices()[size_t(av.vertex)];
  const int64_t root = cyl.root();
  PerimeterKey k;
  switch (av.side) {
    case Side::Left:
      k.group = upper ? 0 : 2;
      k.value = Surd::rational(v.left_eta, root);
      break;
    case Side::Top:
      k.group = 1;
      k.value = v.top_xi;
      break;
    case Side::Right:
      k.group = upper ? 2 : 0;
      k.value = -Surd::rational(v.right_eta, root);
      break;
    case Side::Bottom:
      k.group = 1;
      k.value = -v.bottom_xi;
      break;
    case Side::None:
      fail(ErrorCode::InvalidArgument, "arc vertex without witness side");
  }
  return k;
}

std::vector<ArcVertex> sorted_arc(const Cylinder& cyl, const std::vector<ArcVertex>& arc, bool upper) {
  std::vector<std::pair<PerimeterKey, ArcVertex>> keyed;
  keyed.reserve(arc.size());
  for (const auto& av : arc) keyed.emplace_back(perimeter_key(cyl, av, upper), av);
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& x, const auto& y) { return key_less(x.first, y.first); });
  std::vector<ArcVertex> out;
  for (auto& kv : keyed) out.push_back(kv.second);
  return out;
}

}  // namespace

DualSolver::DualSolver(const Cylinder& cyl, const Arcs& arcs) : edge_count_(cyl.edge_count()) {
  const int32_t nv = int32_t(cyl.vertex_count());
  const int32_t s = nv, t = nv + 1;
  const int32_t n_lattice = int32_t(cyl.edge_count());

  // Edge list of the augmented graph: lattice edges, terminal edges, s-t edge.
  std::vector<std::pair<int32_t, int32_t>> ends;
  ends.reserve(size_t(n_lattice) + arcs.a1.size() + arcs.a2.size() + 1);
  for (const auto& e : cyl.edges()) ends.emplace_back(e.u, e.v);
  std::vector<std::vector<int32_t>> rot(size_t(nv) + 2);
  for (int32_t i = 0; i < nv; ++i) rot[size_t(i)].assign(4, -1);
  for (int32_t i = 0; i < nv; ++i) {
    for (int d = 0; d < 4; ++d) {
      int32_t e = cyl.incident_edge(i, d);
      if (e < 0) continue;
      const auto& le = cyl.edges()[size_t(e)];
      rot[size_t(i)][size_t(d)] = le.u == i ? 2 * e : 2 * e + 1;
    }
  }
  auto a1 = sorted_arc(cyl, arcs.a1, true);
  auto a2 = sorted_arc(cyl, arcs.a2, false);
  auto attach = [&](const ArcVertex& av, int32_t terminal) {
    int32_t e = int32_t(ends.size());
    ends.emplace_back(av.vertex, terminal);
    auto& slot = rot[size_t(av.vertex)][size_t(av.dir)];
    if (slot != -1) fail(ErrorCode::InvalidNetwork, "witness slot already occupied");
    slot = 2 * e;
    return 2 * e + 1;  // dart terminal -> vertex
  };
  for (const auto& av : a1) rot[size_t(s)].push_back(attach(av, s));
  std::vector<int32_t> t_darts;
  for (const auto& av : a2) t_darts.push_back(attach(av, t));
  int32_t st = int32_t(ends.size());
  ends.emplace_back(s, t);
  rot[size_t(s)].push_back(2 * st);
  rot[size_t(t)].push_back(2 * st + 1);
  for (int32_t dt : t_darts) rot[size_t(t)].push_back(dt);
  for (int32_t i = 0; i < nv; ++i) {
    auto& r = rot[size_t(i)];
    r.erase(std::remove(r.begin(), r.end(), -1), r.end());
  }

  auto head = [&](int32_t dart) {
    const auto& e = ends[size_t(dart / 2)];
    return dart % 2 == 0 ? e.second : e.first;
  };

  // Component of s without the s-t edge.
  std::vector<uint8_t> in_comp(size_t(nv) + 2, 0);
  std::vector<int32_t> stack{s};
  in_comp[size_t(s)] = 1;
  while (!stack.empty()) {
    int32_t u = stack.back();
    stack.pop_back();
    for (int32_t dart : rot[size_t(u)]) {
      if (dart / 2 == st) continue;
      int32_t w = head(dart);
      if (!in_comp[size_t(w)]) {
        in_comp[size_t(w)] = 1;
        stack.push_back(w);
      }
    }
  }
  DualResult& res = shape_;
  if (!in_comp[size_t(t)]) {
    res.disconnected = true;
    return;
  }

  const size_t n_darts = ends.size() * 2;
  std::vector<int32_t> pos(n_darts, -1);
  for (size_t u = 0; u < rot.size(); ++u)
    for (size_t k = 0; k < rot[u].size(); ++k) pos[size_t(rot[u][k])] = int32_t(k);

  std::vector<int32_t> face(n_darts, -1);
  int32_t n_faces = 0;
  int64_t comp_vertices = 0, comp_edges = 0;
  for (size_t u = 0; u < rot.size(); ++u) {
    if (!in_comp[u]) continue;
    ++comp_vertices;
    for (int32_t dart : rot[u])
      if (dart % 2 == 0) ++comp_edges;
  }
  for (size_t u = 0; u < rot.size(); ++u) {
    if (!in_comp[u]) continue;
    for (int32_t start : rot[u]) {
      if (face[size_t(start)] >= 0) continue;
      int32_t d = start;
      while (face[size_t(d)] < 0) {
        face[size_t(d)] = n_faces;
        int32_t v = head(d);
        int32_t back = d ^ 1;
        const auto& r = rot[size_t(v)];
        int32_t k = pos[size_t(back)];
        d = r[size_t((k + int32_t(r.size()) - 1) % int32_t(r.size()))];
      }
      ++n_faces;
    }
  }
  res.primal_vertices = comp_vertices;
  res.primal_edges = comp_edges;
  res.faces = n_faces;
  res.euler_ok = comp_vertices - comp_edges + n_faces == 2;

  src_ = face[size_t(2 * st)];
  dst_ = face[size_t(2 * st + 1)];
  adj_start_.assign(size_t(n_faces) + 1, 0);
  for (int32_t e = 0; e < n_lattice; ++e) {
    if (!in_comp[size_t(ends[size_t(e)].first)]) continue;
    int32_t f1 = face[size_t(2 * e)], f2 = face[size_t(2 * e + 1)];
    if (f1 == f2) continue;
    ++adj_start_[size_t(f1) + 1];
    ++adj_start_[size_t(f2) + 1];
  }
  for (size_t f = 0; f < size_t(n_faces); ++f) adj_start_[f + 1] += adj_start_[f];
  adj_.resize(size_t(adj_start_.back()));
  std::vector<int32_t> fill(adj_start_.begin(), adj_start_.end() - 1);
  for (int32_t e = 0; e < n_lattice; ++e) {
    if (!in_comp[size_t(ends[size_t(e)].first)]) continue;
    int32_t f1 = face[size_t(2 * e)], f2 = face[size_t(2 * e + 1)];
    if (f1 == f2) continue;
    adj_[size_t(fill[size_t(f1)]++)] = {f2, e};
    adj_[size_t(fill[size_t(f2)]++)] = {f1, e};
  }
}

Capacity DualSolver::run(const std::vector<Capacity>& weights, std::vector<int32_t>* via,
                         std::vector<int32_t>* prev) const {
  if (weights.size() != edge_count_) fail(ErrorCode::InvalidNetwork, "weights do not match the cylinder");
  const size_t n_faces = adj_start_.size() - 1;
  const Capacity inf = std::numeric_limits<Capacity>::max();
  std::vector<Capacity> dist(n_faces, inf);
  if (via) via->assign(n_faces, -1);
  if (prev) prev->assign(n_faces, -1);
  using Item = std::pair<Capacity, int32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  dist[size_t(src_)] = 0;
  pq.emplace(0, src_);
  while (!pq.empty()) {
    auto [dcur, f] = pq.top();
    pq.pop();
    if (dcur != dist[size_t(f)]) continue;
    if (f == dst_) break;
    for (int32_t k = adj_start_[size_t(f)]; k < adj_start_[size_t(f) + 1]; ++k) {
      auto [g, e] = adj_[size_t(k)];
      Capacity nd = dcur + weights[size_t(e)];
      if (nd < dist[size_t(g)]) {
        dist[size_t(g)] = nd;
        if (via) (*via)[size_t(g)] = e;
        if (prev) (*prev)[size_t(g)] = f;
        pq.emplace(nd, g);
      }
    }
  }
  if (dist[size_t(dst_)] == inf) fail(ErrorCode::InvalidNetwork, "no dual path between the lateral zones");
  return dist[size_t(dst_)];
}

DualResult DualSolver::solve(const std::vector<Capacity>& weights) const {
  DualResult res = shape_;
  if (res.disconnected) return res;
  std::vector<int32_t> via, prev;
  res.value = run(weights, &via, &prev);
  for (int32_t f = dst_; f != src_; f = prev[size_t(f)]) res.cut.edges.push_back(via[size_t(f)]);
  std::sort(res.cut.edges.begin(), res.cut.edges.end());
  res.cut.value = res.value;
  return res;
}

Capacity DualSolver::value(const std::vector<Capacity>& weights) const {
  if (shape_.disconnected) return 0;
  return run(weights, nullptr, nullptr);
}

DualResult dual_min_cut(const Cylinder& cyl, const Arcs& arcs, const std::vector<Capacity>& weights) {
  if (weights.size() != cyl.edge_count()) fail(ErrorCode::InvalidNetwork, "weights do not match the cylinder");
  return DualSolver(cyl, arcs).solve(weights);
}

DualResult dual_min_cut_phi(const Cylinder& cyl, const std::vector<Capacity>& caps) {
  return dual_min_cut(cyl, top_bottom_arcs(cyl), caps);
}

int64_t min_cut_edge_count(const Cylinder& cyl) {
  std::vector<Capacity> unit(cyl.edge_count(), 1);
  return dual_min_cut(cyl, boundary_arcs(cyl, tau_condition(cyl)), unit).value;
}

AdmissibleFamily enumerate_kappa(const Cylinder& cyl) {
  const int64_t root = cyl.root();
  std::vector<Surd> left{cyl.bottom_eta()}, right{cyl.bottom_eta()};
  for (const auto& v : cyl.vertices()) {
    if (v.labels & (kTop | kBottom)) continue;
    if (v.labels & kLeft) left.push_back(Surd::rational(v.left_eta, root));
    if (v.labels & kRight) right.push_back(Surd::rational(v.right_eta, root));
  }
  auto uniq = [](std::vector<Surd>& xs) {
    std::sort(xs.begin(), xs.end(), [](const Surd& a, const Surd& b) { return a < b; });
    xs.erase(std::unique(xs.begin(), xs.end(), [](const Surd& a, const Surd& b) { return a == b; }), xs.end());
  };
  uniq(left);
  uniq(right);
  AdmissibleFamily fam;
  std::unordered_set<std::string> seen;
  for (const auto& c : left) {
    for (const auto& d : right) {
      BoundaryCondition bc = make_boundary_condition(cyl, Chord{c, d});
      Arcs arcs;
      try {
        arcs = boundary_arcs(cyl, bc);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::EmptyArc) continue;
        throw;
      }
      std::string key(arcs.membership.begin(), arcs.membership.end());
      if (!seen.insert(key).second) continue;
      fam.members.push_back(KappaClass{bc, std::move(arcs.membership)});
    }
  }
  if (fam.members.empty()) {
    // No chord separates the boundary (a single row): every kappa induces the same partition.
    BoundaryCondition bc = tau_condition(cyl);
    fam.members.push_back(KappaClass{bc, boundary_arcs(cyl, bc, true).membership});
  }
  return fam;
}

DualityReport verify_duality_lemma(const Cylinder& cyl, const std::vector<Capacity>& caps,
                                   const AdmissibleFamily& family) {
  DualityReport rep;
  rep.phi = phi(cyl, caps).value;
  rep.family_size = family.size();
  rep.min_phi_kappa = std::numeric_limits<Capacity>::max();
  for (size_t i = 0; i < family.members.size(); ++i) {
    Capacity v = phi_kappa(cyl, caps, family.members[i].bc).value;
    if (v < rep.min_phi_kappa) {
      rep.min_phi_kappa = v;
      rep.argmin = i;
    }
  }
  if (!family.members.empty()) {
    rep.argmin_k = family.members[rep.argmin].bc.k;
    rep.argmin_theta = family.members[rep.argmin].bc.theta_tilde;
  }
  rep.equal = rep.phi == rep.min_phi_kappa;
  return rep;
}

}  // namespace tiltedflow
