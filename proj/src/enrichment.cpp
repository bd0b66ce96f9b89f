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

#include "hhe/enrichment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

namespace hhe {

using json = nlohmann::ordered_json;

void perturb_signed_distances(std::vector<double>& sd, double paramDiameter) {
  const double tau = 1e-8 * paramDiameter;
  for (double& v : sd) {
    if (std::abs(v) < tau) v = v > 0 ? tau : -tau;  // exact zeros go negative
  }
}

EnrichmentTree::EnrichmentTree(ElementKind kind, std::vector<int> conn)
    : kind_(kind), conn_(std::move(conn)) {
  Field root;
  root.id = 0;
  for (const ReferenceFacePolygon& rf : reference_boundary(kind_)) {
    Polygon poly;
    poly.vertices = rf.vertices;
    poly.edgeTags = rf.edgeTags;
    poly.originFace = rf.faceId;
    root.boundary.push_back(std::move(poly));
  }
  fields_.push_back(std::move(root));
}

int EnrichmentTree::slot_of(int globalNode) const {
  for (size_t i = 0; i < conn_.size(); ++i)
    if (conn_[i] == globalNode) return (int)i;
  return -1;
}

std::vector<int> EnrichmentTree::basal_fields() const {
  std::vector<int> out;
  for (const Field& f : fields_)
    if (f.childEnrichment < 0) out.push_back(f.id);
  return out;
}

std::vector<std::pair<int, int>> EnrichmentTree::ancestry(int fieldId) const {
  std::vector<std::pair<int, int>> chain;
  int cur = fieldId;
  while (fields_[cur].parentEnrichment >= 0) {
    chain.push_back({fields_[cur].parentEnrichment, fields_[cur].branchSign});
    cur = enrichments_[fields_[cur].parentEnrichment].parentField;
  }
  std::reverse(chain.begin(), chain.end());
  return chain;
}

int EnrichmentTree::branch_sign(int fieldId, int enrichmentId) const {
  for (const auto& [enr, sign] : ancestry(fieldId))
    if (enr == enrichmentId) return sign;
  return 0;
}

double EnrichmentTree::interp_sd(int enrichmentId, const Vec3& xi) const {
  const Eigen::VectorXd n = shape_values(kind_, xi);
  const std::vector<double>& sd = enrichments_[enrichmentId].signedDistances;
  double v = 0;
  for (int i = 0; i < n.size(); ++i) v += n[i] * sd[i];
  return v;
}

int EnrichmentTree::insert_enrichment(int basalField,
                                      std::vector<double> signedDistances,
                                      int surfaceId) {
  if (basalField < 0 || basalField >= (int)fields_.size() || !is_basal(basalField))
    throw Error("enrichment target is not a basal field");
  const KindTables& t = tables(kind_);
  if ((int)signedDistances.size() != t.nodeCount)
    throw Error("signed distance count does not match element nodes");
  perturb_signed_distances(signedDistances, t.paramDiameter);
  bool anyNeg = false, anyPos = false;
  for (double v : signedDistances) (v > 0 ? anyPos : anyNeg) = true;
  if (!anyNeg || !anyPos) throw NumericalError("level set misses element");

  const int enrId = (int)enrichments_.size();
  auto level = [&](const Vec3& xi) {
    const Eigen::VectorXd n = shape_values(kind_, xi);
    double v = 0;
    for (int i = 0; i < n.size(); ++i) v += n[i] * signedDistances[i];
    return v;
  };
  PolyhedronCut cut = cut_polyhedron(fields_[basalField].boundary, level, enrId);
  if (!cut.crossed) throw NumericalError("enrichment outside parent field");

  Enrichment enr;
  enr.id = enrId;
  enr.parentField = basalField;
  enr.surfaceId = surfaceId;
  enr.signedDistances = std::move(signedDistances);
  for (const Polygon& p : cut.negative)
    if (p.originEnrichment == enrId) enr.interface.push_back(p);

  Field neg, pos;
  neg.id = (int)fields_.size();
  pos.id = neg.id + 1;
  neg.parentEnrichment = pos.parentEnrichment = enrId;
  neg.branchSign = -1;
  pos.branchSign = +1;
  neg.boundary = std::move(cut.negative);
  pos.boundary = std::move(cut.positive);
  enr.negField = neg.id;
  enr.posField = pos.id;

  fields_[basalField].childEnrichment = enrId;
  fields_.push_back(std::move(neg));
  fields_.push_back(std::move(pos));
  enrichments_.push_back(std::move(enr));
  return enrId;
}

double EnrichmentTree::coefficient(int fieldId, const Vec3& xi) const {
  double c = 1.0;
  for (const auto& [enr, sign] : ancestry(fieldId)) {
    const int side = interp_sd(enr, xi) > 0 ? 1 : -1;
    if (side != sign) return 0.0;
  }
  return c;
}

int EnrichmentTree::classify_point(const Vec3& xi) const {
  int cur = 0;
  while (fields_[cur].childEnrichment >= 0) {
    const Enrichment& enr = enrichments_[fields_[cur].childEnrichment];
    cur = interp_sd(enr.id, xi) > 0 ? enr.posField : enr.negField;
  }
  return cur;
}

Vec3 EnrichmentTree::aggregate_solution(
    const std::vector<std::vector<Vec3>>& nodalValues, const Vec3& xi) const {
  if (nodalValues.size() != fields_.size())
    throw Error("aggregate solution needs one value set per field");
  const Eigen::VectorXd n = shape_values(kind_, xi);
  Vec3 u = Vec3::Zero();
  for (const Field& f : fields_) {
    if (f.childEnrichment >= 0) continue;
    const double c = coefficient(f.id, xi);
    if (c == 0.0) continue;
    const std::vector<Vec3>& vals = nodalValues[f.id];
    if ((int)vals.size() != (int)conn_.size())
      throw Error("aggregate solution missing field values");
    Vec3 local = Vec3::Zero();
    for (int i = 0; i < n.size(); ++i) local += n[i] * vals[i];
    u += c * local;
  }
  return u;
}

namespace {

void render_field(const EnrichmentTree& tree, int fieldId, const std::string& prefix,
                  bool last, bool isRoot, std::ostringstream& out) {
  const Field& f = tree.field(fieldId);
  std::string label;
  if (isRoot) {
    label = "field 0 (root)";
  } else {
    label = "field " + std::to_string(f.id) + " [" +
            std::to_string(f.parentEnrichment + 1) +
            (f.branchSign < 0 ? "-" : "+") + "]";
  }
  if (f.childEnrichment < 0) label += " (basal)";
  if (isRoot) {
    out << label << "\n";
  } else {
    out << prefix << (last ? "`- " : "|- ") << label << "\n";
  }
  if (f.childEnrichment >= 0) {
    const Enrichment& enr = tree.enrichment(f.childEnrichment);
    const std::string childPrefix =
        isRoot ? "" : prefix + (last ? "   " : "|  ");
    out << childPrefix << "enrichment " << enr.id << " [surface " << enr.surfaceId
        << "]\n";
    render_field(tree, enr.negField, childPrefix, false, false, out);
    render_field(tree, enr.posField, childPrefix, true, false, out);
  }
}

json field_json(const EnrichmentTree& tree, int fieldId) {
  const Field& f = tree.field(fieldId);
  json j;
  j["field"] = f.id;
  j["branch"] = f.parentEnrichment < 0 ? "root" : (f.branchSign < 0 ? "-" : "+");
  j["basal"] = f.childEnrichment < 0;
  if (f.childEnrichment >= 0) {
    const Enrichment& enr = tree.enrichment(f.childEnrichment);
    json je;
    je["id"] = enr.id;
    je["surface"] = enr.surfaceId;
    je["signedDistances"] = enr.signedDistances;
    je["negative"] = field_json(tree, enr.negField);
    je["positive"] = field_json(tree, enr.posField);
    j["enrichment"] = std::move(je);
  }
  return j;
}

}  // namespace

std::string EnrichmentTree::render() const {
  std::ostringstream out;
  render_field(*this, 0, "", true, true, out);
  return out.str();
}

std::string EnrichmentTree::dump_json() const {
  return field_json(*this, 0).dump(2);
}

namespace {

// Element face id whose global node set equals `sharedNodes` (sorted), -1 if none.
int face_id_of(const EnrichmentTree& tree, const std::vector<int>& sharedNodes) {
  const KindTables& t = tables(tree.kind());
  for (size_t f = 0; f < t.faces.size(); ++f) {
    if (t.faces[f].size() != sharedNodes.size()) continue;
    std::vector<int> fs;
    for (int slot : t.faces[f]) fs.push_back(tree.conn()[slot]);
    std::sort(fs.begin(), fs.end());
    if (fs == sharedNodes) return (int)f;
  }
  return -1;
}

int edge_id_of(const EnrichmentTree& tree, const std::vector<int>& sharedNodes) {
  const KindTables& t = tables(tree.kind());
  for (size_t e = 0; e < t.edges.size(); ++e) {
    std::vector<int> es = {tree.conn()[t.edges[e][0]], tree.conn()[t.edges[e][1]]};
    std::sort(es.begin(), es.end());
    if (es == sharedNodes) return (int)e;
  }
  return -1;
}

// Bilinear/linear coefficients (a + b*u + c*v + d*u*v) of a trace on the
// canonical face-local frame: triangles on (0,0),(1,0),(0,1), quads on
// (-1,-1),(1,-1),(1,1),(-1,1), corner values in loop order.
std::array<double, 4> trace_coeffs(const std::vector<double>& w) {
  if (w.size() == 3) return {w[0], w[1] - w[0], w[2] - w[0], 0.0};
  return {(w[0] + w[1] + w[2] + w[3]) / 4, (-w[0] + w[1] + w[2] - w[3]) / 4,
          (-w[0] - w[1] + w[2] + w[3]) / 4, (w[0] - w[1] + w[2] - w[3]) / 4};
}

double trace_eval(const std::array<double, 4>& c, double u, double v) {
  return c[0] + c[1] * u + c[2] * v + c[3] * u * v;
}

Polygon face_frame_polygon(size_t corners) {
  Polygon poly;
  if (corners == 3) {
    poly.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  } else {
    poly.vertices = {Vec3(-1, -1, 0), Vec3(1, -1, 0), Vec3(1, 1, 0), Vec3(-1, 1, 0)};
  }
  poly.edgeTags.assign(poly.vertices.size(), -1);
  return poly;
}

// Extremes of a bilinear trace over a polygon in the face-local plane:
// vertices plus interior stationary points of each edge's quadratic.
void trace_min_max(const std::array<double, 4>& c, const Polygon& poly,
                   double& minVal, double& maxVal) {
  const size_t n = poly.vertices.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec3& p = poly.vertices[i];
    const Vec3& q = poly.vertices[(i + 1) % n];
    const double v0 = trace_eval(c, p[0], p[1]);
    minVal = std::min(minVal, v0);
    maxVal = std::max(maxVal, v0);
    const double du = q[0] - p[0], dv = q[1] - p[1];
    const double quad = c[3] * du * dv;
    const double lin = c[1] * du + c[2] * dv + c[3] * (p[0] * dv + p[1] * du);
    if (std::abs(quad) > 0) {
      const double tStar = -lin / (2 * quad);
      if (tStar > 0 && tStar < 1) {
        const double val = trace_eval(c, p[0] + tStar * du, p[1] + tStar * dv);
        minVal = std::min(minVal, val);
        maxVal = std::max(maxVal, val);
      }
    }
  }
}

}  // namespace

const std::vector<TetCell>& root_decomposition(ElementKind kind) {
  static std::mutex cacheMutex;
  static std::map<ElementKind, std::vector<TetCell>> cache;
  std::lock_guard<std::mutex> lock(cacheMutex);
  auto it = cache.find(kind);
  if (it == cache.end()) {
    std::vector<int> conn(tables(kind).nodeCount);
    std::iota(conn.begin(), conn.end(), 0);
    EnrichmentTree pristine(kind, std::move(conn));
    it = cache
             .emplace(kind, tetrahedralize(pristine.field(0).boundary,
                                           tables(kind).refVolume))
             .first;
  }
  return it->second;
}

bool query_crosses_shared_topology(const EnrichmentTree& tree, int enrichmentId,
                                   const SharedTopology& st) {
  if (st.kind == TopologyKind::node) return false;
  const std::vector<double>& sd = tree.enrichment(enrichmentId).signedDistances;
  bool anyNeg = false, anyPos = false;
  for (int g : st.sharedNodes) {
    const int slot = tree.slot_of(g);
    if (slot < 0) throw Error("shared topology node not in element");
    (sd[slot] > 0 ? anyPos : anyNeg) = true;
  }
  return anyNeg && anyPos;
}

bool query_touches_shared_topology(const EnrichmentTree& tree, int basalField,
                                   const SharedTopology& st) {
  const Field& f = tree.field(basalField);
  if (st.kind == TopologyKind::face) {
    const int faceId = face_id_of(tree, st.sharedNodes);
    if (faceId < 0) return false;
    for (const Polygon& p : f.boundary)
      if (p.originFace == faceId && polygon_area(p) > 1e-12) return true;
    return false;
  }
  if (st.kind == TopologyKind::edge) {
    const int edgeId = edge_id_of(tree, st.sharedNodes);
    if (edgeId < 0) return false;
    for (const Polygon& p : f.boundary) {
      const size_t n = p.vertices.size();
      for (size_t i = 0; i < n; ++i)
        if (p.edgeTags[i] == edgeId &&
            (p.vertices[(i + 1) % n] - p.vertices[i]).norm() > 1e-12)
          return true;
    }
    return false;
  }
  const int slot = tree.slot_of(st.sharedNodes[0]);
  if (slot < 0) return false;
  for (const Polygon& p : f.boundary)
    for (const Vec3& v : p.vertices)
      if (point_is_corner(tree.kind(), v, slot, 1e-12)) return true;
  return false;
}

bool query_crosses_adjacent_field(const EnrichmentTree& enrTree, int enrichmentId,
                                  const EnrichmentTree& adjTree, int basalField,
                                  const SharedTopology& st) {
  if (st.kind == TopologyKind::node) return false;
  const auto ancestors = adjTree.ancestry(basalField);

  if (st.kind == TopologyKind::edge) {
    const int g0 = st.sharedNodes[0], g1 = st.sharedNodes[1];
    auto end_values = [&](const EnrichmentTree& tree, int enr) {
      const auto& sd = tree.enrichment(enr).signedDistances;
      return std::array<double, 2>{sd[tree.slot_of(g0)], sd[tree.slot_of(g1)]};
    };
    double lo = 0, hi = 1;
    for (const auto& [anc, sign] : ancestors) {
      const auto a = end_values(adjTree, anc);
      auto value = [&](double t) { return a[0] + t * (a[1] - a[0]); };
      const bool loOk = (value(lo) > 0 ? 1 : -1) == sign;
      const bool hiOk = (value(hi) > 0 ? 1 : -1) == sign;
      if (loOk && hiOk) continue;
      if (!loOk && !hiOk) return false;
      const double tRoot = a[0] / (a[0] - a[1]);
      if (loOk)
        hi = std::min(hi, tRoot);
      else
        lo = std::max(lo, tRoot);
      if (lo >= hi) return false;
    }
    const auto e = end_values(enrTree, enrichmentId);
    const double hLo = e[0] + lo * (e[1] - e[0]);
    const double hHi = e[0] + hi * (e[1] - e[0]);
    return hLo * hHi < 0;
  }

  // face sharing
  const int faceId = face_id_of(adjTree, st.sharedNodes);
  if (faceId < 0) return false;
  const auto& faceSlots = tables(adjTree.kind()).faces[faceId];
  std::vector<int> globals;
  for (int slot : faceSlots) globals.push_back(adjTree.conn()[slot]);

  auto corner_values = [&](const EnrichmentTree& tree, int enr) {
    std::vector<double> w;
    const auto& sd = tree.enrichment(enr).signedDistances;
    for (int g : globals) {
      const int slot = tree.slot_of(g);
      if (slot < 0) throw Error("shared face node not in element");
      w.push_back(sd[slot]);
    }
    return w;
  };

  std::vector<Polygon> region = {face_frame_polygon(globals.size())};
  for (const auto& [anc, sign] : ancestors) {
    const auto c = trace_coeffs(corner_values(adjTree, anc));
    auto level = [&c](const Vec3& p) { return trace_eval(c, p[0], p[1]); };
    std::vector<Polygon> neg, pos;
    for (const Polygon& poly : region) split_single_polygon(poly, level, neg, pos);
    region = sign < 0 ? std::move(neg) : std::move(pos);
    if (region.empty()) return false;
  }

  const auto h = trace_coeffs(corner_values(enrTree, enrichmentId));
  double minVal = 1e300, maxVal = -1e300;
  for (const Polygon& poly : region) trace_min_max(h, poly, minVal, maxVal);
  return minVal < 0 && maxVal > 0;
}

}  // namespace hhe
