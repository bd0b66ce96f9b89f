// Copyright 2026 The HHE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hhe/growth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <string>

#include "hhe/quadrature.hpp"

namespace hhe {

AnalyticSurface plane_surface(const Vec3& point, const Vec3& normal) {
  const Vec3 n = normal.normalized();
  const Vec3 p = point;
  return {[n, p](const Vec3& x) { return n.dot(x - p); }};
}

AnalyticSurface sphere_surface(const Vec3& center, double radius) {
  return {[center, radius](const Vec3& x) { return (x - center).norm() - radius; }};
}

NormalField constant_normal(const Vec3& v) {
  const Vec3 c = v;
  return {[c](const Vec3&) { return c; }};
}

const SharedTopology* Domain::topo_between(int a, int b) const {
  for (int idx : elementTopos[a]) {
    const SharedTopology& st = topos[idx];
    if ((st.a == a && st.b == b) || (st.a == b && st.b == a)) return &st;
  }
  return nullptr;
}

std::vector<int> Domain::neighbors(int element) const {
  std::vector<int> out;
  for (int idx : elementTopos[element]) {
    const SharedTopology& st = topos[idx];
    out.push_back(st.a == element ? st.b : st.a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Domain make_domain(Mesh mesh) {
  validate(mesh);
  Domain d;
  d.mesh = std::move(mesh);
  d.topos = adjacency(d.mesh);
  d.elementTopos.resize(d.mesh.elements.size());
  for (size_t i = 0; i < d.topos.size(); ++i) {
    d.elementTopos[d.topos[i].a].push_back((int)i);
    d.elementTopos[d.topos[i].b].push_back((int)i);
  }
  d.trees.reserve(d.mesh.elements.size());
  for (const MeshElement& el : d.mesh.elements)
    d.trees.emplace_back(el.kind, el.conn);
  return d;
}

namespace {

// Sign relation between two enrichments' nodal values at shared nodes:
// +1 all equal, -1 all opposite, 0 inconsistent.
int sign_relation(const EnrichmentTree& ta, const std::vector<double>& sdA,
                  const EnrichmentTree& tb, const std::vector<double>& sdB,
                  const std::vector<int>& sharedNodes) {
  bool allEq = true, allOp = true;
  for (int g : sharedNodes) {
    const int sa = sdA[ta.slot_of(g)] > 0 ? 1 : -1;
    const int sb = sdB[tb.slot_of(g)] > 0 ? 1 : -1;
    (sa == sb ? allOp : allEq) = false;
  }
  if (allEq) return 1;
  if (allOp) return -1;
  return 0;
}

bool field_boundary_crossed(const EnrichmentTree& tree, int fieldId,
                            const std::vector<double>& sd) {
  bool anyNeg = false, anyPos = false;
  for (const Polygon& poly : tree.field(fieldId).boundary)
    for (const Vec3& v : poly.vertices) {
      const Eigen::VectorXd n = shape_values(tree.kind(), v);
      double val = 0;
      for (int i = 0; i < n.size(); ++i) val += n[i] * sd[i];
      (val > 0 ? anyPos : anyNeg) = true;
      if (anyNeg && anyPos) return true;
    }
  return false;
}

Vec3 field_physical_centroid(const Domain& d, int element, int fieldId) {
  const Vec3 xi = polyhedron_centroid(d.trees[element].field(fieldId).boundary);
  return map_to_physical(d.mesh, element, xi);
}

bool mixed_signs_at(const EnrichmentTree& tree, const std::vector<double>& values,
                    const std::vector<int>& sharedNodes) {
  bool anyNeg = false, anyPos = false;
  for (int g : sharedNodes)
    (values[tree.slot_of(g)] > 0 ? anyPos : anyNeg) = true;
  return anyNeg && anyPos;
}

}  // namespace

int insert_surface(Domain& d, const AnalyticSurface& surface,
                   const RegionPredicate& region) {
  EnrichmentSurfaceState state;
  state.id = (int)d.surfaces.size();
  std::vector<std::vector<int>> added(d.mesh.elements.size());

  for (size_t e = 0; e < d.mesh.elements.size(); ++e) {
    EnrichmentTree& tree = d.trees[e];
    std::vector<double> sd(tree.conn().size());
    for (size_t i = 0; i < tree.conn().size(); ++i)
      sd[i] = surface.signedDistance(d.mesh.nodes[tree.conn()[i]]);
    perturb_signed_distances(sd, tables(tree.kind()).paramDiameter);
    bool anyNeg = false, anyPos = false;
    for (double v : sd) (v > 0 ? anyPos : anyNeg) = true;
    if (!anyNeg || !anyPos) continue;

    for (int basal : tree.basal_fields()) {
      if (region && !region(field_physical_centroid(d, (int)e, basal))) continue;
      if (!field_boundary_crossed(tree, basal, sd)) continue;
      const int enrId = tree.insert_enrichment(basal, sd, state.id);
      added[e].push_back(enrId);
      state.members.push_back({(int)e, enrId});
    }
  }
  if (state.members.empty()) throw ScenarioError("surface outside domain");

  // Link enrichments of this surface across shared topologies: consistent
  // nodal sign relation plus a crossing of the shared face/edge from both
  // sides.
  for (const SharedTopology& st : d.topos) {
    if (added[st.a].empty() || added[st.b].empty()) continue;
    for (int ea : added[st.a])
      for (int eb : added[st.b]) {
        const int orient =
            sign_relation(d.trees[st.a], d.trees[st.a].enrichment(ea).signedDistances,
                          d.trees[st.b], d.trees[st.b].enrichment(eb).signedDistances,
                          st.sharedNodes);
        if (orient == 0) continue;
        if (!query_crosses_shared_topology(d.trees[st.a], ea, st)) continue;
        if (!query_crosses_shared_topology(d.trees[st.b], eb, st)) continue;
        d.trees[st.a].enrichment(ea).links.push_back({st.b, eb, orient});
        d.trees[st.b].enrichment(eb).links.push_back({st.a, ea, orient});
      }
  }

  d.surfaces.push_back(std::move(state));
  recompute_front(d, d.surfaces.back().id);
  return d.surfaces.back().id;
}

SdSolveResult solve_nodal_signed_distances(const Domain& d, int element,
                                           const NormalField& normal,
                                           const std::vector<EnrichmentMember>& compat) {
  const EnrichmentTree& tree = d.trees[element];
  const int N = (int)tree.conn().size();

  // Penalty data: node indicator and averaged target values over listed
  // enrichments present at each node.
  Eigen::VectorXd b = Eigen::VectorXd::Zero(N);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(N);
  Eigen::VectorXd hits = Eigen::VectorXd::Zero(N);
  for (int i = 0; i < N; ++i) {
    const int g = tree.conn()[i];
    for (const EnrichmentMember& m : compat) {
      const EnrichmentTree& other = d.trees[m.element];
      const int slot = other.slot_of(g);
      if (slot < 0) continue;
      b[i] = 1.0;
      a[i] += other.enrichment(m.enrichment).signedDistances[slot];
      hits[i] += 1.0;
    }
    if (hits[i] > 0) a[i] /= hits[i];
  }
  if (b.sum() == 0) throw NumericalError("unconstrained level set");

  // Laplacian and normal-flux integrals over the whole element via the
  // reference tetrahedral decomposition.
  const std::vector<TetCell>& cells = root_decomposition(tree.kind());

  const QuadratureRule& rule = tet_rule(tet_rule_order(tree.kind()));
  Eigen::MatrixXd A0 = Eigen::MatrixXd::Zero(N, N);
  Eigen::VectorXd c0 = Eigen::VectorXd::Zero(N);
  for (const TetCell& cell : cells) {
    Eigen::Matrix3d M;
    M.col(0) = cell.v[1] - cell.v[0];
    M.col(1) = cell.v[2] - cell.v[0];
    M.col(2) = cell.v[3] - cell.v[0];
    const double detM = M.determinant();
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const Vec3 xi = cell.v[0] + M * rule.points[q];
      const Eigen::Matrix3d J = jacobian(d.mesh, element, xi);
      const double detJ = J.determinant();
      if (detJ <= 0) throw NumericalError("nonpositive jacobian in element " +
                                          std::to_string(element));
      const Eigen::Matrix<double, Eigen::Dynamic, 3> dNdx =
          shape_gradients(tree.kind(), xi) * J.inverse();
      const double w = rule.weights[q] * detM * detJ;
      A0 += w * (dNdx * dNdx.transpose());
      const Vec3 n = normal.direction(map_to_physical(d.mesh, element, xi)).normalized();
      c0 += w * (dNdx * n);
    }
  }

  const double lc = characteristic_length(d.mesh, element);
  double w = 1.0;
  SdSolveResult result;
  for (int round = 0;; ++round) {
    Eigen::MatrixXd A = A0;
    Eigen::VectorXd c = c0;
    for (int i = 0; i < N; ++i) {
      A(i, i) += w * lc * b[i];
      c[i] += w * lc * b[i] * a[i];
    }
    Eigen::VectorXd f = A.ldlt().solve(c);
    result.values.assign(f.data(), f.data() + N);

    bool ok = true;
    for (const EnrichmentMember& m : compat) {
      const EnrichmentTree& other = d.trees[m.element];
      const std::vector<double>& sdC = other.enrichment(m.enrichment).signedDistances;
      bool allEq = true, allOp = true, any = false;
      for (int i = 0; i < N; ++i) {
        const int slot = other.slot_of(tree.conn()[i]);
        if (slot < 0) continue;
        any = true;
        const int sf = result.values[i] > 0 ? 1 : -1;
        const int sc = sdC[slot] > 0 ? 1 : -1;
        (sf == sc ? allOp : allEq) = false;
      }
      if (any && !allEq && !allOp) {
        ok = false;
        break;
      }
    }
    if (ok) break;
    if (round >= 20)
      throw NumericalError("signed-distance escalation exceeded iteration bound");
    w *= 10.0;
    ++result.escalations;
  }
  return result;
}

bool can_advance(const Domain& d, const EnrichmentMember& member,
                 int targetElement, int targetBasal) {
  const SharedTopology* st = d.topo_between(member.element, targetElement);
  if (st == nullptr) return false;
  const EnrichmentTree& te = d.trees[member.element];
  const EnrichmentTree& tn = d.trees[targetElement];
  if (!tn.is_basal(targetBasal)) return false;

  if (!query_crosses_adjacent_field(te, member.enrichment, tn, targetBasal, *st))
    return false;

  const auto targetAncestry = tn.ancestry(targetBasal);

  // Already compatible with an ancestor: the surface has passed through.
  for (const EnrichmentLink& link : te.enrichment(member.enrichment).links) {
    if (link.element != targetElement) continue;
    for (const auto& [anc, sign] : targetAncestry)
      if (anc == link.enrichment) return false;
  }

  // Linked ancestors must agree on the branch: the advancing enrichment and
  // the target field must lie on matching sides (flipped for opposite
  // orientations).
  const int parentField = te.enrichment(member.enrichment).parentField;
  for (const auto& [ancE, signE] : te.ancestry(parentField)) {
    for (const EnrichmentLink& link : te.enrichment(ancE).links) {
      if (link.element != targetElement) continue;
      for (const auto& [ancN, signN] : targetAncestry) {
        if (ancN != link.enrichment) continue;
        if (signE * signN != link.orientation) return false;
      }
    }
  }
  return true;
}

void recompute_front(Domain& d, int surfaceId) {
  EnrichmentSurfaceState& state = d.surfaces[surfaceId];
  std::sort(state.members.begin(), state.members.end());
  state.front.clear();
  for (const EnrichmentMember& m : state.members) {
    bool admissible = false;
    for (int idx : d.elementTopos[m.element]) {
      const SharedTopology& st = d.topos[idx];
      const int n = st.a == m.element ? st.b : st.a;
      for (int basal : d.trees[n].basal_fields()) {
        if (can_advance(d, m, n, basal)) {
          admissible = true;
          break;
        }
      }
      if (admissible) break;
    }
    if (admissible) state.front.push_back(m);
  }
}

namespace {

struct CompatEntry {
  EnrichmentMember member;
  int orientation;
};

// Step 1: enrichments of the surface in elements adjacent to the target that
// are front members or linked to one.
std::vector<EnrichmentMember> partial_compat_list(const Domain& d, int surfaceId,
                                                  int target) {
  const EnrichmentSurfaceState& state = d.surfaces[surfaceId];
  std::set<EnrichmentMember> frontSet(state.front.begin(), state.front.end());
  auto is_front_linked = [&](const EnrichmentMember& m) {
    if (frontSet.count(m)) return true;
    for (const EnrichmentLink& link : d.trees[m.element].enrichment(m.enrichment).links)
      if (frontSet.count({link.element, link.enrichment})) return true;
    return false;
  };
  std::vector<int> adj = d.neighbors(target);
  std::vector<EnrichmentMember> out;
  for (const EnrichmentMember& m : state.members) {
    if (!std::binary_search(adj.begin(), adj.end(), m.element)) continue;
    if (is_front_linked(m)) out.push_back(m);
  }
  return out;
}

// Step 3: all enrichments in adjacent elements whose nodal signs relate
// consistently to the solved values and that cross the shared topology from
// both sides. Enrichments of other surfaces additionally require nodal
// agreement within the merge tolerance.
std::vector<CompatEntry> complete_compat_list(const Domain& d, int surfaceId,
                                              int target,
                                              const std::vector<double>& values,
                                              int* merges) {
  const EnrichmentTree& tn = d.trees[target];
  std::vector<CompatEntry> out;
  const double mergeTol = 1e-3 * characteristic_length(d.mesh, target);
  for (int m : d.neighbors(target)) {
    const SharedTopology* st = d.topo_between(target, m);
    if (st->kind == TopologyKind::node) continue;
    const EnrichmentTree& tm = d.trees[m];
    for (const Enrichment& enr : tm.enrichments()) {
      const int orient =
          sign_relation(tn, values, tm, enr.signedDistances, st->sharedNodes);
      if (orient == 0) continue;
      if (!mixed_signs_at(tn, values, st->sharedNodes)) continue;
      if (!query_crosses_shared_topology(tm, enr.id, *st)) continue;
      if (enr.surfaceId != surfaceId) {
        bool close = true;
        for (int g : st->sharedNodes) {
          const double fv = values[tn.slot_of(g)];
          const double cv = enr.signedDistances[tm.slot_of(g)];
          if (std::abs(fv - orient * cv) > mergeTol) {
            close = false;
            break;
          }
        }
        if (!close) continue;
        if (merges) ++(*merges);
      }
      out.push_back({{m, enr.id}, orient});
    }
  }
  return out;
}

}  // namespace

GrowthReport advance_front(Domain& d, int surfaceId, const NormalField& normal,
                           int maxSteps) {
  GrowthReport rep;
  EnrichmentSurfaceState& state = d.surfaces[surfaceId];
  for (int sweep = 0; sweep < maxSteps; ++sweep) {
    recompute_front(d, surfaceId);
    if (state.front.empty()) {
      rep.complete = true;
      break;
    }
    // Collect admissible advances for this sweep, ascending.
    std::vector<std::array<int, 4>> advances;  // e, enr, n, basal
    for (const EnrichmentMember& m : state.front) {
      for (int n : d.neighbors(m.element)) {
        for (int basal : d.trees[n].basal_fields())
          if (can_advance(d, m, n, basal))
            advances.push_back({m.element, m.enrichment, n, basal});
      }
    }
    for (const auto& [e, enr, n, basal] : advances) {
      if (!d.trees[n].is_basal(basal)) continue;  // consumed this sweep
      if (!can_advance(d, {e, enr}, n, basal)) continue;

      const std::vector<EnrichmentMember> partial =
          partial_compat_list(d, surfaceId, n);
      SdSolveResult tmp = solve_nodal_signed_distances(d, n, normal, partial);
      rep.escalations += tmp.escalations;

      int mergeCount = 0;
      std::vector<CompatEntry> complete =
          complete_compat_list(d, surfaceId, n, tmp.values, &mergeCount);

      std::vector<EnrichmentMember> completeMembers;
      for (const CompatEntry& ce : complete) completeMembers.push_back(ce.member);
      SdSolveResult fin;
      if (completeMembers == partial) {
        fin = std::move(tmp);
      } else {
        fin = solve_nodal_signed_distances(d, n, normal, completeMembers);
        rep.escalations += fin.escalations;
      }
      rep.merges += mergeCount;

      const int newEnr = d.trees[n].insert_enrichment(basal, fin.values, surfaceId);
      const std::vector<double>& stored =
          d.trees[n].enrichment(newEnr).signedDistances;
      for (const CompatEntry& ce : complete) {
        const SharedTopology* st = d.topo_between(n, ce.member.element);
        EnrichmentTree& tm = d.trees[ce.member.element];
        const int orient = sign_relation(d.trees[n], stored, tm,
                                         tm.enrichment(ce.member.enrichment).signedDistances,
                                         st->sharedNodes);
        if (orient == 0) continue;
        d.trees[n].enrichment(newEnr).links.push_back(
            {ce.member.element, ce.member.enrichment, orient});
        tm.enrichment(ce.member.enrichment).links.push_back({n, newEnr, orient});
      }
      state.members.push_back({n, newEnr});
      ++rep.enrichmentsAdded;
    }
    ++rep.steps;
  }
  recompute_front(d, surfaceId);
  rep.complete = state.front.empty();
  return rep;
}

}  // namespace hhe
