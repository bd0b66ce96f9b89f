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

#include "hhe/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "hhe/quadrature.hpp"

namespace hhe {

using json = nlohmann::ordered_json;

int Mesh::slot_of(int element, int globalNode) const {
  const auto& conn = elements[element].conn;
  for (size_t i = 0; i < conn.size(); ++i)
    if (conn[i] == globalNode) return (int)i;
  return -1;
}

std::vector<SharedTopology> adjacency(const Mesh& mesh) {
  std::vector<std::vector<int>> nodeElems(mesh.nodes.size());
  for (size_t e = 0; e < mesh.elements.size(); ++e)
    for (int n : mesh.elements[e].conn) nodeElems[n].push_back((int)e);

  std::set<std::pair<int, int>> pairs;
  for (const auto& list : nodeElems)
    for (size_t i = 0; i < list.size(); ++i)
      for (size_t j = i + 1; j < list.size(); ++j)
        pairs.insert({list[i], list[j]});

  auto sorted_conn = [&](int e) {
    std::vector<int> c = mesh.elements[e].conn;
    std::sort(c.begin(), c.end());
    return c;
  };

  auto is_face_of = [&](int e, const std::vector<int>& shared) {
    const auto& el = mesh.elements[e];
    for (const auto& face : tables(el.kind).faces) {
      if (face.size() != shared.size()) continue;
      std::vector<int> fs;
      for (int slot : face) fs.push_back(el.conn[slot]);
      std::sort(fs.begin(), fs.end());
      if (fs == shared) return true;
    }
    return false;
  };

  auto is_edge_of = [&](int e, const std::vector<int>& shared) {
    const auto& el = mesh.elements[e];
    for (const auto& edge : tables(el.kind).edges) {
      std::vector<int> es = {el.conn[edge[0]], el.conn[edge[1]]};
      std::sort(es.begin(), es.end());
      if (es == shared) return true;
    }
    return false;
  };

  std::vector<SharedTopology> out;
  for (const auto& [a, b] : pairs) {
    std::vector<int> ca = sorted_conn(a), cb = sorted_conn(b);
    std::vector<int> shared;
    std::set_intersection(ca.begin(), ca.end(), cb.begin(), cb.end(),
                          std::back_inserter(shared));
    SharedTopology st;
    st.a = a;
    st.b = b;
    st.sharedNodes = shared;
    if (shared.size() >= 3 && is_face_of(a, shared) && is_face_of(b, shared)) {
      st.kind = TopologyKind::face;
    } else if (shared.size() == 4 && is_face_of(a, shared) && is_face_of(b, shared)) {
      st.kind = TopologyKind::face;
    } else if (shared.size() == 2 && is_edge_of(a, shared) && is_edge_of(b, shared)) {
      st.kind = TopologyKind::edge;
    } else if (shared.size() == 1) {
      st.kind = TopologyKind::node;
    } else {
      throw Error("nonconforming mesh: elements " + std::to_string(a) + "," +
                  std::to_string(b) + " share an unexpected node set");
    }
    out.push_back(std::move(st));
  }
  return out;
}

Mesh generate_uniform_grid(int nx, int ny, int nz, double L) {
  if (nx < 1 || ny < 1 || nz < 1 || L <= 0)
    throw ScenarioError("uniform grid dimensions must be positive");
  Mesh mesh;
  mesh.boundingLength = L;
  const double hx = L / nx, hy = L / ny, hz = L / nz;
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i)
        mesh.nodes.emplace_back(i * hx, j * hy, k * hz);
  auto nid = [&](int i, int j, int k) {
    return i + (nx + 1) * (j + (ny + 1) * k);
  };
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        MeshElement el;
        el.kind = ElementKind::hex8;
        el.conn = {nid(i, j, k),         nid(i + 1, j, k),
                   nid(i + 1, j + 1, k), nid(i, j + 1, k),
                   nid(i, j, k + 1),     nid(i + 1, j, k + 1),
                   nid(i + 1, j + 1, k + 1), nid(i, j + 1, k + 1)};
        mesh.elements.push_back(std::move(el));
      }
  return mesh;
}

namespace {

double tet_det(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return (b - a).cross(c - a).dot(d - a);
}

}  // namespace

Mesh generate_mixed_grid(double L) {
  if (L <= 0) throw ScenarioError("mixed grid length must be positive");
  constexpr int N = 9;
  Mesh mesh;
  mesh.boundingLength = L;
  const double h = L / N;
  for (int k = 0; k <= N; ++k)
    for (int j = 0; j <= N; ++j)
      for (int i = 0; i <= N; ++i)
        mesh.nodes.emplace_back(i * h, j * h, k * h);
  auto nid = [&](int i, int j, int k) {
    return i + (N + 1) * (j + (N + 1) * k);
  };
  auto npos = [&](int id) { return mesh.nodes[id]; };

  auto add_tet = [&](std::array<int, 4> c) {
    if (tet_det(npos(c[0]), npos(c[1]), npos(c[2]), npos(c[3])) < 0)
      std::swap(c[1], c[2]);
    mesh.elements.push_back({ElementKind::tet4, {c[0], c[1], c[2], c[3]}});
  };
  auto add_pyramid = [&](std::array<int, 4> base, int apex) {
    const Vec3 n =
        (npos(base[1]) - npos(base[0])).cross(npos(base[2]) - npos(base[0]));
    if (n.dot(npos(apex) - npos(base[0])) < 0)
      std::reverse(base.begin(), base.end());
    mesh.elements.push_back(
        {ElementKind::pyramid5, {base[0], base[1], base[2], base[3], apex}});
  };

  for (int k = 0; k < N; ++k)
    for (int j = 0; j < N; ++j)
      for (int i = 0; i < N; ++i) {
        // cube corner ids c[dz][dy][dx]
        int c[2][2][2];
        for (int dz = 0; dz < 2; ++dz)
          for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx)
              c[dz][dy][dx] = nid(i + dx, j + dy, k + dz);

        if (k == 0) {
          // Six-tet subdivision: path tetrahedra along each axis permutation.
          const int axes[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                  {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
          for (const auto& perm : axes) {
            int d[3] = {0, 0, 0};
            std::array<int, 4> tet;
            tet[0] = c[0][0][0];
            for (int s = 0; s < 3; ++s) {
              d[perm[s]] = 1;
              tet[s + 1] = c[d[2]][d[1]][d[0]];
            }
            add_tet(tet);
          }
        } else if (k <= 2) {
          // Vertical wedge pair split along the local x=y diagonal plane.
          // Prism {x<=y}: bottom triangle (0,0),(1,1),(0,1).
          mesh.elements.push_back(
              {ElementKind::wedge6,
               {c[0][0][0], c[0][1][1], c[0][1][0],
                c[1][0][0], c[1][1][1], c[1][1][0]}});
          mesh.elements.push_back(
              {ElementKind::wedge6,
               {c[0][0][0], c[0][0][1], c[0][1][1],
                c[1][0][0], c[1][0][1], c[1][1][1]}});
        } else if (k <= 5) {
          // Cone cube: its center node fans each face into a pyramid; the
          // bottom face of layer 3 is split into two triangles (matching the
          // wedge tops below) fanned into two tets.
          const Vec3 center{(i + 0.5) * h, (j + 0.5) * h, (k + 0.5) * h};
          const int centerId = (int)mesh.nodes.size();
          mesh.nodes.push_back(center);
          const std::array<std::array<int, 4>, 6> faces = {{
              {c[0][0][0], c[0][0][1], c[0][1][1], c[0][1][0]},  // bottom
              {c[1][0][0], c[1][0][1], c[1][1][1], c[1][1][0]},  // top
              {c[0][0][0], c[0][0][1], c[1][0][1], c[1][0][0]},  // y-
              {c[0][1][0], c[0][1][1], c[1][1][1], c[1][1][0]},  // y+
              {c[0][0][0], c[0][1][0], c[1][1][0], c[1][0][0]},  // x-
              {c[0][0][1], c[0][1][1], c[1][1][1], c[1][0][1]},  // x+
          }};
          for (int f = 0; f < 6; ++f) {
            if (k == 3 && f == 0) {
              // split along local x=y: triangles (00,11,01) and (00,01x..)
              add_tet({c[0][0][0], c[0][1][1], c[0][1][0], centerId});
              add_tet({c[0][0][0], c[0][0][1], c[0][1][1], centerId});
            } else {
              add_pyramid(faces[f], centerId);
            }
          }
        } else {
          mesh.elements.push_back(
              {ElementKind::hex8,
               {c[0][0][0], c[0][0][1], c[0][1][1], c[0][1][0],
                c[1][0][0], c[1][0][1], c[1][1][1], c[1][1][0]}});
        }
      }
  return mesh;
}

Mesh mesh_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("mesh JSON parse error: ") + e.what());
  }
  if (!j.is_object() || !j.contains("nodes") || !j.contains("elements"))
    throw ScenarioError("mesh JSON must contain 'nodes' and 'elements'");
  Mesh mesh;
  for (const auto& n : j["nodes"]) {
    if (!n.is_array() || n.size() != 3)
      throw ScenarioError("mesh node must be an [x,y,z] triple");
    mesh.nodes.emplace_back(n[0].get<double>(), n[1].get<double>(),
                            n[2].get<double>());
  }
  for (const auto& e : j["elements"]) {
    if (!e.is_object() || !e.contains("kind") || !e.contains("conn"))
      throw ScenarioError("mesh element must have 'kind' and 'conn'");
    MeshElement el;
    el.kind = kind_from_string(e["kind"].get<std::string>());
    for (const auto& v : e["conn"]) el.conn.push_back(v.get<int>());
    mesh.elements.push_back(std::move(el));
  }
  mesh.boundingLength = j.value("boundingLength", 0.0);
  if (mesh.boundingLength == 0.0) {
    Vec3 lo = Vec3::Constant(1e300), hi = Vec3::Constant(-1e300);
    for (const Vec3& p : mesh.nodes) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    mesh.boundingLength = mesh.nodes.empty() ? 0.0 : (hi - lo).maxCoeff();
  }
  validate(mesh);
  return mesh;
}

std::string mesh_to_json(const Mesh& mesh) {
  json j;
  j["nodes"] = json::array();
  for (const Vec3& n : mesh.nodes) j["nodes"].push_back({n[0], n[1], n[2]});
  j["elements"] = json::array();
  for (const auto& e : mesh.elements) {
    json el;
    el["kind"] = kind_to_string(e.kind);
    el["conn"] = e.conn;
    j["elements"].push_back(std::move(el));
  }
  j["boundingLength"] = mesh.boundingLength;
  return j.dump(2);
}

Vec3 map_to_physical(const Mesh& mesh, int element, const Vec3& xi) {
  const auto& el = mesh.elements[element];
  const Eigen::VectorXd n = shape_values(el.kind, xi);
  Vec3 x = Vec3::Zero();
  for (size_t i = 0; i < el.conn.size(); ++i) x += n[i] * mesh.nodes[el.conn[i]];
  return x;
}

Eigen::Matrix3d jacobian(const Mesh& mesh, int element, const Vec3& xi) {
  const auto& el = mesh.elements[element];
  const auto g = shape_gradients(el.kind, xi);
  Eigen::Matrix3d J = Eigen::Matrix3d::Zero();
  for (size_t i = 0; i < el.conn.size(); ++i)
    J += mesh.nodes[el.conn[i]] * g.row(i);  // J(k,l) = d x_k / d xi_l
  return J;
}

double element_volume(const Mesh& mesh, int element) {
  const auto& el = mesh.elements[element];
  const QuadratureRule& rule = classical_rule(el.kind);
  double v = 0;
  for (size_t q = 0; q < rule.points.size(); ++q)
    v += rule.weights[q] * jacobian(mesh, element, rule.points[q]).determinant();
  return v;
}

double characteristic_length(const Mesh& mesh, int element) {
  return std::cbrt(element_volume(mesh, element));
}

void validate(const Mesh& mesh) {
  for (size_t e = 0; e < mesh.elements.size(); ++e) {
    const auto& el = mesh.elements[e];
    const KindTables& t = tables(el.kind);
    if ((int)el.conn.size() != t.nodeCount)
      throw ScenarioError("element " + std::to_string(e) +
                          " has wrong connectivity size");
    for (int n : el.conn)
      if (n < 0 || n >= (int)mesh.nodes.size())
        throw ScenarioError("element " + std::to_string(e) +
                            " references missing node");
    const QuadratureRule& rule = classical_rule(el.kind);
    for (const Vec3& xi : rule.points)
      if (jacobian(mesh, (int)e, xi).determinant() <= 0)
        throw NumericalError("element " + std::to_string(e) +
                             " has nonpositive jacobian");
  }
}

}  // namespace hhe
