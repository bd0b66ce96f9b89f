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

#include "hhe/scenario.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/SVD>

#include "hhe/quadrature.hpp"

namespace hhe {

namespace {

using ojson = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ScenarioError("scenario " + where + ": " + what);
}

const ojson* find_key(const ojson& obj, const std::string& key) {
  if (!obj.is_object()) return nullptr;
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const ojson& require_key(const ojson& obj, const std::string& key,
                         const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, "missing required key '" + key + "'");
  return *it;
}

double as_number(const ojson& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

int as_int(const ojson& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<int>();
}

std::string as_string(const ojson& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

Vec3 as_vec3(const ojson& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) fail(where, "expected an array of 3 numbers");
  Vec3 v;
  for (int i = 0; i < 3; ++i) v[i] = as_number(j[i], where);
  return v;
}

int as_axis(const ojson& j, const std::string& where) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "x") return 0;
    if (s == "y") return 1;
    if (s == "z") return 2;
  } else if (j.is_number_integer()) {
    const int a = j.get<int>();
    if (a >= 0 && a <= 2) return a;
  }
  fail(where, "expected axis x, y, z or 0, 1, 2");
}

Mesh build_mesh(const ojson& spec) {
  const std::string where = "/mesh";
  const std::string type =
      as_string(require_key(spec, "type", where), where + "/type");
  if (type == "uniform") {
    const ojson& div = require_key(spec, "divisions", where);
    if (!div.is_array() || div.size() != 3)
      fail(where + "/divisions", "expected an array of 3 integers");
    int n[3];
    for (int i = 0; i < 3; ++i) {
      n[i] = as_int(div[i], where + "/divisions");
      if (n[i] < 1) fail(where + "/divisions", "divisions must be positive");
    }
    const double L =
        as_number(require_key(spec, "length", where), where + "/length");
    if (L <= 0) fail(where + "/length", "length must be positive");
    return generate_uniform_grid(n[0], n[1], n[2], L);
  }
  if (type == "mixed") {
    const double L =
        as_number(require_key(spec, "length", where), where + "/length");
    if (L <= 0) fail(where + "/length", "length must be positive");
    return generate_mixed_grid(L);
  }
  if (type == "file") {
    const std::string path =
        as_string(require_key(spec, "path", where), where + "/path");
    std::ifstream in(path);
    if (!in) fail(where + "/path", "cannot open mesh file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return mesh_from_json(text.str());
  }
  fail(where + "/type", "unknown mesh type '" + type + "'");
}

AnalyticSurface build_surface(const ojson& j, const std::string& where) {
  const std::string type = as_string(require_key(j, "type", where), where + "/type");
  if (type == "plane") {
    const Vec3 p = as_vec3(require_key(j, "point", where), where + "/point");
    const Vec3 n = as_vec3(require_key(j, "normal", where), where + "/normal");
    if (n.norm() == 0) fail(where + "/normal", "normal must be nonzero");
    return plane_surface(p, n);
  }
  if (type == "sphere") {
    const Vec3 c = as_vec3(require_key(j, "center", where), where + "/center");
    const double r = as_number(require_key(j, "radius", where), where + "/radius");
    if (r <= 0) fail(where + "/radius", "radius must be positive");
    return sphere_surface(c, r);
  }
  fail(where + "/type", "unknown surface type '" + type + "'");
}

RegionPredicate build_region(const ojson& j, const std::string& where) {
  const std::string type = as_string(require_key(j, "type", where), where + "/type");
  if (type == "outsideSphere") {
    const Vec3 c = as_vec3(require_key(j, "center", where), where + "/center");
    const double r = as_number(require_key(j, "radius", where), where + "/radius");
    if (r <= 0) fail(where + "/radius", "radius must be positive");
    return [c, r](const Vec3& x) { return (x - c).norm() > r; };
  }
  if (type == "axisBelow" || type == "axisAbove") {
    const int axis = as_axis(require_key(j, "axis", where), where + "/axis");
    const double v = as_number(require_key(j, "value", where), where + "/value");
    if (type == "axisBelow")
      return [axis, v](const Vec3& x) { return x[axis] < v; };
    return [axis, v](const Vec3& x) { return x[axis] > v; };
  }
  fail(where + "/type", "unknown region type '" + type + "'");
}

NormalField build_normal(const ojson& j, const std::string& where) {
  const std::string type = as_string(require_key(j, "type", where), where + "/type");
  if (type == "constant") {
    const Vec3 dir =
        as_vec3(require_key(j, "direction", where), where + "/direction");
    if (dir.norm() == 0) fail(where + "/direction", "direction must be nonzero");
    return constant_normal(dir);
  }
  if (type == "piecewise") {
    const int axis = as_axis(require_key(j, "axis", where), where + "/axis");
    const double th =
        as_number(require_key(j, "threshold", where), where + "/threshold");
    const Vec3 below = as_vec3(require_key(j, "below", where), where + "/below");
    const Vec3 above = as_vec3(require_key(j, "above", where), where + "/above");
    if (below.norm() == 0 || above.norm() == 0)
      fail(where, "directions must be nonzero");
    return {[axis, th, below, above](const Vec3& x) {
      return x[axis] < th ? below : above;
    }};
  }
  fail(where + "/type", "unknown normal field type '" + type + "'");
}

struct BcSpec {
  bool isPlane = false;
  int axis = 0;
  double value = 0;
  Vec3 position = Vec3::Zero();
  double tol = 0;
  std::vector<std::pair<int, double>> comps;
  std::string where;
};

BcSpec parse_bc(const ojson& j, const std::string& where, double boundingLength) {
  BcSpec bc;
  bc.where = where;
  const ojson& sel = require_key(j, "where", where);
  const std::string selWhere = where + "/where";
  const std::string type =
      as_string(require_key(sel, "type", selWhere), selWhere + "/type");
  bc.tol = 1e-9 * boundingLength;
  if (const ojson* t = find_key(sel, "tol")) {
    bc.tol = as_number(*t, selWhere + "/tol");
    if (bc.tol < 0) fail(selWhere + "/tol", "tolerance must be nonnegative");
  }
  if (type == "plane") {
    bc.isPlane = true;
    bc.axis = as_axis(require_key(sel, "axis", selWhere), selWhere + "/axis");
    bc.value = as_number(require_key(sel, "value", selWhere), selWhere + "/value");
  } else if (type == "point") {
    bc.position =
        as_vec3(require_key(sel, "position", selWhere), selWhere + "/position");
  } else {
    fail(selWhere + "/type", "unknown selector type '" + type + "'");
  }
  const ojson& set = require_key(j, "set", where);
  if (!set.is_object() || set.empty())
    fail(where + "/set", "expected components u1, u2, u3");
  for (auto it = set.begin(); it != set.end(); ++it) {
    const std::string& k = it.key();
    const int comp = k == "u1" ? 0 : k == "u2" ? 1 : k == "u3" ? 2 : -1;
    if (comp < 0) fail(where + "/set", "unknown component '" + k + "'");
    bc.comps.push_back({comp, as_number(it.value(), where + "/set/" + k)});
  }
  return bc;
}

// Node classification point: the corner nudged toward the parametric
// centroid so it lands strictly inside one basal field.
Vec3 snapped_corner(ElementKind kind, int slot) {
  const KindTables& tbl = tables(kind);
  const Vec3 xi = tbl.refCoords[slot];
  Vec3 c = Vec3::Zero();
  for (const Vec3& v : tbl.refCoords) c += v;
  c /= (double)tbl.refCoords.size();
  return xi + 1e-6 * tbl.paramDiameter * (c - xi).normalized();
}

std::vector<Constraint> resolve_bcs(const Domain& d, const DofMap& map,
                                    const std::vector<BcSpec>& bcs) {
  std::vector<std::vector<int>> nodeElems(d.mesh.nodes.size());
  for (size_t e = 0; e < d.mesh.elements.size(); ++e)
    for (int g : d.mesh.elements[e].conn) nodeElems[g].push_back((int)e);

  std::vector<Constraint> out;
  for (const BcSpec& bc : bcs) {
    std::vector<int> matched;
    for (size_t g = 0; g < d.mesh.nodes.size(); ++g) {
      const Vec3& x = d.mesh.nodes[g];
      const bool hit = bc.isPlane
                           ? std::abs(x[bc.axis] - bc.value) <= bc.tol
                           : (x - bc.position).norm() <= bc.tol;
      if (hit) matched.push_back((int)g);
    }
    if (matched.empty()) throw ScenarioError("empty BC at " + bc.where);
    for (int g : matched) {
      for (int e : nodeElems[g]) {
        const EnrichmentTree& tree = d.trees[e];
        const int slot = tree.slot_of(g);
        const int field = tree.classify_point(snapped_corner(tree.kind(), slot));
        const int ord = map.ordinal_of(e, field);
        for (const auto& [comp, value] : bc.comps)
          out.push_back({map.dof(e, ord, slot, comp), value});
      }
    }
  }
  return out;
}

// The load vector is identically zero, so an under-restrained piece would
// "solve" to an arbitrary position instead of failing. Reject any piece whose
// prescribed dofs do not block all six rigid motions.
void check_restraints(const Domain& d, const DofMap& map,
                      const PieceAssignment& pieces,
                      const std::vector<Constraint>& cons) {
  std::vector<Vec3> pos(map.scalarClasses, Vec3::Zero());
  std::vector<int> piece(map.scalarClasses, -1);
  for (size_t e = 0; e < d.mesh.elements.size(); ++e) {
    for (size_t ord = 0; ord < map.fieldIds[e].size(); ++ord) {
      const int p = pieces.pieceOf.at({(int)e, map.fieldIds[e][ord]});
      const std::vector<int>& slots = map.classes[e][ord];
      for (size_t s = 0; s < slots.size(); ++s) {
        if (piece[slots[s]] >= 0) continue;
        piece[slots[s]] = p;
        pos[slots[s]] = d.mesh.nodes[d.mesh.elements[e].conn[s]];
      }
    }
  }
  std::vector<std::vector<Eigen::Matrix<double, 1, 6>>> rows(pieces.count);
  for (const Constraint& c : cons) {
    const int cls = c.dof / 3, k = c.dof % 3;
    const Vec3& x = pos[cls];
    Eigen::Matrix<double, 1, 6> r = Eigen::Matrix<double, 1, 6>::Zero();
    r(k) = 1.0;
    const Vec3 gen[3] = {Vec3(0, -x[2], x[1]), Vec3(x[2], 0, -x[0]),
                         Vec3(-x[1], x[0], 0)};
    for (int j = 0; j < 3; ++j) r(3 + j) = gen[j][k];
    rows[piece[cls]].push_back(r);
  }
  for (int p = 0; p < pieces.count; ++p) {
    if ((int)rows[p].size() < 6)
      throw NumericalError("singular system — add constraints");
    Eigen::MatrixXd M((int)rows[p].size(), 6);
    for (size_t i = 0; i < rows[p].size(); ++i) M.row((int)i) = rows[p][i];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const Eigen::VectorXd& sv = svd.singularValues();
    if (sv(5) <= 1e-8 * std::max(1.0, sv(0)))
      throw NumericalError("singular system — add constraints");
  }
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int vtk_cell_type(ElementKind kind) {
  switch (kind) {
    case ElementKind::hex8: return 12;
    case ElementKind::tet4: return 10;
    case ElementKind::wedge6: return 13;
    case ElementKind::pyramid5: return 14;
  }
  return 0;
}

// Visits each quadrature point of a field's subdomain with the physical
// weight and the reference coordinate.
template <typename Fn>
void field_points(const Domain& d, int element, int fieldId, Fn&& fn) {
  const EnrichmentTree& tree = d.trees[element];
  const ElementKind kind = tree.kind();
  std::vector<TetCell> own;
  const std::vector<TetCell>* cells;
  if (!tree.enriched() && fieldId == 0) {
    cells = &root_decomposition(kind);
  } else {
    own = tetrahedralize(tree.field(fieldId).boundary, tables(kind).refVolume);
    cells = &own;
  }
  const QuadratureRule& rule = tet_rule(tet_rule_order(kind));
  for (const TetCell& cell : *cells) {
    Eigen::Matrix3d M;
    M.col(0) = cell.v[1] - cell.v[0];
    M.col(1) = cell.v[2] - cell.v[0];
    M.col(2) = cell.v[3] - cell.v[0];
    const double detM = 6.0 * cell.volume;
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const Vec3 xi = cell.v[0] + M * rule.points[q];
      const double detJ = jacobian(d.mesh, element, xi).determinant();
      fn(rule.weights[q] * detM * detJ, xi);
    }
  }
}

std::vector<PieceStat> compute_piece_stats(const Domain& d, const DofMap& map,
                                           const Eigen::VectorXd& q,
                                           const PieceAssignment& pieces) {
  std::vector<PieceStat> stats(pieces.count);
  std::vector<Vec3> integral(pieces.count, Vec3::Zero());
  for (int p = 0; p < pieces.count; ++p) stats[p].piece = p;
  for (size_t e = 0; e < d.mesh.elements.size(); ++e) {
    const int N = (int)d.mesh.elements[e].conn.size();
    for (size_t ord = 0; ord < map.fieldIds[e].size(); ++ord) {
      const int fieldId = map.fieldIds[e][ord];
      const int p = pieces.pieceOf.at({(int)e, fieldId});
      std::vector<Vec3> u(N);
      for (int slot = 0; slot < N; ++slot)
        for (int comp = 0; comp < 3; ++comp)
          u[slot][comp] = q[map.dof((int)e, (int)ord, slot, comp)];
      field_points(d, (int)e, fieldId, [&](double w, const Vec3& xi) {
        const Eigen::VectorXd nv = shape_values(d.trees[e].kind(), xi);
        Vec3 ux = Vec3::Zero();
        for (int i = 0; i < N; ++i) ux += nv[i] * u[i];
        stats[p].volume += w;
        integral[p] += w * ux;
      });
    }
  }
  for (int p = 0; p < pieces.count; ++p)
    stats[p].meanDisplacement = integral[p] / stats[p].volume;
  return stats;
}

void write_solution_vtk(const Domain& d, const DofMap& map,
                        const Eigen::VectorXd& q, const PieceAssignment& pieces,
                        const std::string& path) {
  // Exploded view: every field's tetrahedra get their own points so
  // discontinuities across pieces stay visible.
  std::vector<Vec3> points;
  std::vector<Vec3> disp;
  std::vector<int> cellPiece;
  std::vector<int> cellElement;
  for (size_t e = 0; e < d.mesh.elements.size(); ++e) {
    const EnrichmentTree& tree = d.trees[e];
    const int N = (int)d.mesh.elements[e].conn.size();
    for (size_t ord = 0; ord < map.fieldIds[e].size(); ++ord) {
      const int fieldId = map.fieldIds[e][ord];
      std::vector<Vec3> u(N);
      for (int slot = 0; slot < N; ++slot)
        for (int comp = 0; comp < 3; ++comp)
          u[slot][comp] = q[map.dof((int)e, (int)ord, slot, comp)];
      std::vector<TetCell> own;
      const std::vector<TetCell>* cells;
      if (!tree.enriched() && fieldId == 0) {
        cells = &root_decomposition(tree.kind());
      } else {
        own = tetrahedralize(tree.field(fieldId).boundary,
                             tables(tree.kind()).refVolume);
        cells = &own;
      }
      for (const TetCell& cell : *cells) {
        for (const Vec3& xi : cell.v) {
          points.push_back(map_to_physical(d.mesh, (int)e, xi));
          const Eigen::VectorXd nv = shape_values(tree.kind(), xi);
          Vec3 ux = Vec3::Zero();
          for (int i = 0; i < N; ++i) ux += nv[i] * u[i];
          disp.push_back(ux);
        }
        cellPiece.push_back(pieces.pieceOf.at({(int)e, fieldId}));
        cellElement.push_back((int)e);
      }
    }
  }

  std::ofstream out(path);
  out << "# vtk DataFile Version 3.0\nsolution\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << points.size() << " double\n";
  for (const Vec3& x : points)
    out << num(x[0]) << " " << num(x[1]) << " " << num(x[2]) << "\n";
  const size_t cellCount = cellPiece.size();
  out << "CELLS " << cellCount << " " << 5 * cellCount << "\n";
  for (size_t c = 0; c < cellCount; ++c)
    out << "4 " << 4 * c << " " << 4 * c + 1 << " " << 4 * c + 2 << " "
        << 4 * c + 3 << "\n";
  out << "CELL_TYPES " << cellCount << "\n";
  for (size_t c = 0; c < cellCount; ++c) out << "10\n";
  out << "POINT_DATA " << points.size() << "\n";
  out << "VECTORS displacement double\n";
  for (const Vec3& ux : disp)
    out << num(ux[0]) << " " << num(ux[1]) << " " << num(ux[2]) << "\n";
  out << "CELL_DATA " << cellCount << "\n";
  out << "SCALARS piece int 1\nLOOKUP_TABLE default\n";
  for (int p : cellPiece) out << p << "\n";
  out << "SCALARS element int 1\nLOOKUP_TABLE default\n";
  for (int e : cellElement) out << e << "\n";
}

}  // namespace

void write_mesh_vtk(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  out << "# vtk DataFile Version 3.0\nmesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.nodes.size() << " double\n";
  for (const Vec3& x : mesh.nodes)
    out << num(x[0]) << " " << num(x[1]) << " " << num(x[2]) << "\n";
  size_t total = 0;
  for (const MeshElement& el : mesh.elements) total += el.conn.size() + 1;
  out << "CELLS " << mesh.elements.size() << " " << total << "\n";
  for (const MeshElement& el : mesh.elements) {
    out << el.conn.size();
    for (int g : el.conn) out << " " << g;
    out << "\n";
  }
  out << "CELL_TYPES " << mesh.elements.size() << "\n";
  for (const MeshElement& el : mesh.elements) out << vtk_cell_type(el.kind) << "\n";
}

nlohmann::ordered_json load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file '" + path + "'");
  try {
    return ojson::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError("scenario parse error at byte " + std::to_string(e.byte) +
                        ": " + std::string(e.what()));
  }
}

RunResult run_scenario(const nlohmann::ordered_json& scenario,
                       const std::string& outDir, const ScenarioOptions& opts) {
  if (!scenario.is_object()) fail("/", "expected an object");
  Domain d = make_domain(build_mesh(require_key(scenario, "mesh", "/")));
  Material mat;
  if (const ojson* m = find_key(scenario, "material")) {
    mat.youngsModulus = as_number(require_key(*m, "E", "/material"), "/material/E");
    mat.poissonRatio = as_number(require_key(*m, "nu", "/material"), "/material/nu");
    if (mat.youngsModulus <= 0) fail("/material/E", "must be positive");
    if (mat.poissonRatio <= -1 || mat.poissonRatio >= 0.5)
      fail("/material/nu", "must lie in (-1, 0.5)");
  }
  const ojson& actions = require_key(scenario, "actions", "/");
  if (!actions.is_array()) fail("/actions", "expected an array");
  if (actions.empty()) throw ScenarioError("nothing to do");

  RunResult rr;
  ojson reportActions = ojson::array();
  std::vector<BcSpec> bcs;
  CompatibilityGraph graph;
  bool graphBuilt = false;
  DofMap map;
  Eigen::VectorXd q;
  PieceAssignment pieces;
  AssembledSystem sys;
  bool sysBuilt = false;
  bool solved = false;
  std::set<std::string> exports;

  auto ensure_graph = [&] {
    if (graphBuilt) return;
    graph = initial_graph(d);
    std::vector<int> enriched;
    for (size_t e = 0; e < d.trees.size(); ++e)
      if (d.trees[e].enriched()) enriched.push_back((int)e);
    invalidate(graph, enriched);
    build_partial(d, graph, opts.policy, opts.threads);
    complete_graph(d, graph);
    graphBuilt = true;
  };
  auto ensure_system = [&] {
    ensure_graph();
    if (sysBuilt) return;
    map = enumerate_dofs(d, graph);
    sys = assemble_system(d, map, mat, opts.threads);
    sysBuilt = true;
  };

  for (size_t i = 0; i < actions.size(); ++i) {
    const std::string where = "/actions/" + std::to_string(i);
    const ojson& a = actions[i];
    const std::string kind =
        as_string(require_key(a, "action", where), where + "/action");
    if (kind == "insert") {
      const AnalyticSurface s =
          build_surface(require_key(a, "surface", where), where + "/surface");
      RegionPredicate region;
      if (const ojson* r = find_key(a, "region"))
        region = build_region(*r, where + "/region");
      const int id = insert_surface(d, s, region);
      graphBuilt = sysBuilt = solved = false;
      ojson rep;
      rep["action"] = "insert";
      rep["surface"] = id;
      rep["members"] = (int)d.surfaces[id].members.size();
      reportActions.push_back(std::move(rep));
    } else if (kind == "grow") {
      const int sid = as_int(require_key(a, "surface", where), where + "/surface");
      if (sid < 0 || sid >= (int)d.surfaces.size())
        fail(where + "/surface", "unknown surface id " + std::to_string(sid));
      const NormalField nf =
          build_normal(require_key(a, "normal", where), where + "/normal");
      int maxSteps = 100;
      if (const ojson* ms = find_key(a, "maxSteps")) {
        maxSteps = as_int(*ms, where + "/maxSteps");
        if (maxSteps < 1) fail(where + "/maxSteps", "must be positive");
      }
      const GrowthReport g = advance_front(d, sid, nf, maxSteps);
      graphBuilt = sysBuilt = solved = false;
      ojson rep;
      rep["action"] = "grow";
      rep["surface"] = sid;
      rep["steps"] = g.steps;
      rep["enrichmentsAdded"] = g.enrichmentsAdded;
      rep["merges"] = g.merges;
      rep["escalations"] = g.escalations;
      rep["complete"] = g.complete;
      reportActions.push_back(std::move(rep));
    } else if (kind == "bc") {
      bcs.push_back(parse_bc(a, where, d.mesh.boundingLength));
      ojson rep;
      rep["action"] = "bc";
      reportActions.push_back(std::move(rep));
    } else if (kind == "solve") {
      ensure_system();
      const std::vector<Constraint> cons = resolve_bcs(d, map, bcs);
      pieces = connected_pieces(d, graph);
      check_restraints(d, map, pieces, cons);
      q = solve_constrained(sys, cons);
      solved = true;
      rr.maxStrainComponent = max_strain_component(d, map, q);
      ojson rep;
      rep["action"] = "solve";
      rep["constraints"] = (int)cons.size();
      rep["totalDofs"] = map.totalDofs;
      rep["pieces"] = pieces.count;
      rep["graphEdges"] = (int)graph.edge_count();
      rep["maxStrainComponent"] = rr.maxStrainComponent;
      reportActions.push_back(std::move(rep));
    } else if (kind == "export") {
      const ojson& what = require_key(a, "what", where);
      std::vector<std::string> names;
      if (what.is_string()) {
        names.push_back(what.get<std::string>());
      } else if (what.is_array()) {
        for (const auto& w : what) names.push_back(as_string(w, where + "/what"));
      } else {
        fail(where + "/what", "expected a string or an array of strings");
      }
      for (const std::string& w : names) {
        if (w != "mesh" && w != "solution" && w != "trees" && w != "graph" &&
            w != "system")
          fail(where + "/what", "unknown export '" + w + "'");
        exports.insert(w);
      }
      ojson rep;
      rep["action"] = "export";
      rep["what"] = names;
      reportActions.push_back(std::move(rep));
    } else {
      fail(where + "/action", "unknown action '" + kind + "'");
    }
  }

  if (solved) {
    rr.solved = true;
    rr.pieces = pieces.count;
    rr.totalDofs = map.totalDofs;
    rr.pieceStats = compute_piece_stats(d, map, q, pieces);
  }

  int enrichedElements = 0, enrichments = 0;
  for (const EnrichmentTree& tree : d.trees) {
    if (tree.enriched()) ++enrichedElements;
    enrichments += (int)tree.enrichments().size();
  }
  ojson res;
  res["mesh"] = {{"nodes", (int)d.mesh.nodes.size()},
                 {"elements", (int)d.mesh.elements.size()}};
  res["surfaces"] = (int)d.surfaces.size();
  res["enrichedElements"] = enrichedElements;
  res["enrichments"] = enrichments;
  if (solved) {
    res["pieces"] = rr.pieces;
    res["scalarClasses"] = map.scalarClasses;
    res["totalDofs"] = map.totalDofs;
    res["maxStrainComponent"] = rr.maxStrainComponent;
    ojson stats = ojson::array();
    for (const PieceStat& ps : rr.pieceStats) {
      ojson s;
      s["piece"] = ps.piece;
      s["volume"] = ps.volume;
      s["meanDisplacement"] = {ps.meanDisplacement[0], ps.meanDisplacement[1],
                               ps.meanDisplacement[2]};
      stats.push_back(std::move(s));
    }
    res["pieceStats"] = std::move(stats);
  }
  rr.result = res;

  ojson rep;
  rep["policy"] =
      opts.policy == CompatPolicy::allPairs ? "allPairs" : "oneToOneOnly";
  rep["threads"] = opts.threads;
  rep["actions"] = reportActions;
  rr.report = rep;

  if (!outDir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(outDir);
    {
      std::ofstream out(outDir + "/result.json");
      out << rr.result.dump(2) << "\n";
    }
    {
      std::ofstream out(outDir + "/report.json");
      out << rr.report.dump(2) << "\n";
    }
    if (exports.count("mesh")) write_mesh_vtk(d.mesh, outDir + "/mesh.vtk");
    if (exports.count("graph")) {
      ensure_graph();
      std::ofstream out(outDir + "/graph.json");
      out << graph_to_json(graph).dump(2) << "\n";
    }
    if (exports.count("trees")) {
      ojson trees = ojson::object();
      for (size_t e = 0; e < d.trees.size(); ++e)
        if (d.trees[e].enriched())
          trees[std::to_string(e)] = ojson::parse(d.trees[e].dump_json());
      std::ofstream out(outDir + "/trees.json");
      out << trees.dump(2) << "\n";
    }
    if (exports.count("system")) {
      ensure_system();
      write_matrix_market(sys.K, outDir + "/K.mtx");
      write_dense_vector(sys.F, outDir + "/F.mtx");
    }
    if (exports.count("solution")) {
      if (!solved)
        throw ScenarioError("export 'solution' requires a solve action");
      write_solution_vtk(d, map, q, pieces, outDir + "/solution.vtk");
    }
  } else if (exports.count("solution") && !solved) {
    throw ScenarioError("export 'solution' requires a solve action");
  }

  return rr;
}

int cli_main(std::vector<std::string> args) {
  try {
    CLI::App app{"hierarchical Heaviside enrichment kernel"};
    app.require_subcommand(1);
    CLI::App* run = app.add_subcommand("run", "execute a scenario file");
    std::string scenarioPath, outDir;
    std::string logLevel = "warn";
    std::string policy = "oneToOneOnly";
    int threads = 1;
    run->add_option("scenario", scenarioPath, "scenario JSON file")->required();
    run->add_option("--out", outDir, "output directory")->required();
    run->add_option("--threads", threads, "worker thread count");
    run->add_option("--log", logLevel, "log level: error|warn|info|debug|trace");
    run->add_option("--policy", policy,
                    "compatibility policy: allPairs|oneToOneOnly");
    try {
      std::reverse(args.begin(), args.end());
      app.parse(args);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e);
      return code == 0 ? 0 : 2;
    }
    if (threads < 1) throw ScenarioError("--threads must be positive");
    logging::level() = logging::parse_level(logLevel);
    ScenarioOptions opts;
    opts.threads = threads;
    opts.policy = policy_from_string(policy);
    const ojson scenario = load_scenario_file(scenarioPath);
    run_scenario(scenario, outDir, opts);
    return 0;
  } catch (const ScenarioError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}

}  // namespace hhe
