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

#include "hhe/element.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <mutex>

namespace hhe {

namespace logging {

Level& level() {
  static Level lvl = Level::warn;
  return lvl;
}

Level parse_level(const std::string& name) {
  if (name == "error") return Level::error;
  if (name == "warn") return Level::warn;
  if (name == "info") return Level::info;
  if (name == "debug") return Level::debug;
  if (name == "trace") return Level::trace;
  throw ScenarioError("unknown log level: " + name);
}

bool enabled(Level lvl) { return static_cast<int>(lvl) <= static_cast<int>(level()); }

void write(Level lvl, const std::string& message) {
  if (!enabled(lvl)) return;
  static std::mutex mu;
  static const char* names[] = {"error", "warn", "info", "debug", "trace"};
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << "[" << names[static_cast<int>(lvl)] << "] " << message << "\n";
}

}  // namespace logging

ElementKind kind_from_string(const std::string& name) {
  if (name == "hex8") return ElementKind::hex8;
  if (name == "tet4") return ElementKind::tet4;
  if (name == "wedge6") return ElementKind::wedge6;
  if (name == "pyramid5") return ElementKind::pyramid5;
  throw ScenarioError("unknown element kind: " + name);
}

const char* kind_to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::hex8: return "hex8";
    case ElementKind::tet4: return "tet4";
    case ElementKind::wedge6: return "wedge6";
    case ElementKind::pyramid5: return "pyramid5";
  }
  return "?";
}

namespace {

KindTables make_hex8() {
  KindTables t;
  t.nodeCount = 8;
  t.refCoords = {{-1, -1, -1}, {1, -1, -1}, {1, 1, -1}, {-1, 1, -1},
                 {-1, -1, 1},  {1, -1, 1},  {1, 1, 1},  {-1, 1, 1}};
  t.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
             {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};
  t.faces = {{0, 3, 2, 1}, {4, 5, 6, 7}, {0, 1, 5, 4},
             {1, 2, 6, 5}, {2, 3, 7, 6}, {3, 0, 4, 7}};
  t.refVolume = 8.0;
  t.paramDiameter = 2.0 * std::sqrt(3.0);
  return t;
}

KindTables make_tet4() {
  KindTables t;
  t.nodeCount = 4;
  t.refCoords = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  t.edges = {{0, 1}, {1, 2}, {2, 0}, {0, 3}, {1, 3}, {2, 3}};
  t.faces = {{0, 2, 1}, {0, 1, 3}, {1, 2, 3}, {0, 3, 2}};
  t.refVolume = 1.0 / 6.0;
  t.paramDiameter = std::sqrt(2.0);
  return t;
}

KindTables make_wedge6() {
  KindTables t;
  t.nodeCount = 6;
  t.refCoords = {{0, 0, -1}, {1, 0, -1}, {0, 1, -1},
                 {0, 0, 1},  {1, 0, 1},  {0, 1, 1}};
  t.edges = {{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5},
             {5, 3}, {0, 3}, {1, 4}, {2, 5}};
  t.faces = {{0, 2, 1}, {3, 4, 5}, {0, 1, 4, 3}, {1, 2, 5, 4}, {2, 0, 3, 5}};
  t.refVolume = 1.0;
  t.paramDiameter = std::sqrt(6.0);
  return t;
}

KindTables make_pyramid5() {
  KindTables t;
  t.nodeCount = 5;
  t.refCoords = {{-1, -1, 0}, {1, -1, 0}, {1, 1, 0}, {-1, 1, 0}, {0, 0, 1}};
  t.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 4}, {1, 4}, {2, 4}, {3, 4}};
  t.faces = {{0, 3, 2, 1}, {0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}};
  t.refVolume = 4.0;  // parametric cube [-1,1]^2 x [0,1]
  t.paramDiameter = 3.0;
  return t;
}

}  // namespace

const KindTables& tables(ElementKind kind) {
  static const KindTables hex = make_hex8();
  static const KindTables tet = make_tet4();
  static const KindTables wedge = make_wedge6();
  static const KindTables pyr = make_pyramid5();
  switch (kind) {
    case ElementKind::hex8: return hex;
    case ElementKind::tet4: return tet;
    case ElementKind::wedge6: return wedge;
    case ElementKind::pyramid5: return pyr;
  }
  throw Error("bad element kind");
}

Eigen::VectorXd shape_values(ElementKind kind, const Vec3& xi) {
  const double x = xi[0], y = xi[1], z = xi[2];
  switch (kind) {
    case ElementKind::hex8: {
      Eigen::VectorXd n(8);
      const auto& rc = tables(kind).refCoords;
      for (int i = 0; i < 8; ++i)
        n[i] = (1 + rc[i][0] * x) * (1 + rc[i][1] * y) * (1 + rc[i][2] * z) / 8.0;
      return n;
    }
    case ElementKind::tet4: {
      Eigen::VectorXd n(4);
      n << 1 - x - y - z, x, y, z;
      return n;
    }
    case ElementKind::wedge6: {
      Eigen::VectorXd n(6);
      const double l0 = 1 - x - y, l1 = x, l2 = y;
      n << l0 * (1 - z) / 2, l1 * (1 - z) / 2, l2 * (1 - z) / 2,
          l0 * (1 + z) / 2, l1 * (1 + z) / 2, l2 * (1 + z) / 2;
      return n;
    }
    case ElementKind::pyramid5: {
      Eigen::VectorXd n(5);
      n << (1 - x) * (1 - y) * (1 - z) / 4.0, (1 + x) * (1 - y) * (1 - z) / 4.0,
          (1 + x) * (1 + y) * (1 - z) / 4.0, (1 - x) * (1 + y) * (1 - z) / 4.0, z;
      return n;
    }
  }
  throw Error("bad element kind");
}

Eigen::Matrix<double, Eigen::Dynamic, 3> shape_gradients(ElementKind kind,
                                                         const Vec3& xi) {
  const double x = xi[0], y = xi[1], z = xi[2];
  switch (kind) {
    case ElementKind::hex8: {
      Eigen::Matrix<double, Eigen::Dynamic, 3> g(8, 3);
      const auto& rc = tables(kind).refCoords;
      for (int i = 0; i < 8; ++i) {
        g(i, 0) = rc[i][0] * (1 + rc[i][1] * y) * (1 + rc[i][2] * z) / 8.0;
        g(i, 1) = (1 + rc[i][0] * x) * rc[i][1] * (1 + rc[i][2] * z) / 8.0;
        g(i, 2) = (1 + rc[i][0] * x) * (1 + rc[i][1] * y) * rc[i][2] / 8.0;
      }
      return g;
    }
    case ElementKind::tet4: {
      Eigen::Matrix<double, Eigen::Dynamic, 3> g(4, 3);
      g << -1, -1, -1, 1, 0, 0, 0, 1, 0, 0, 0, 1;
      return g;
    }
    case ElementKind::wedge6: {
      Eigen::Matrix<double, Eigen::Dynamic, 3> g(6, 3);
      const double l0 = 1 - x - y, l1 = x, l2 = y;
      g << -(1 - z) / 2, -(1 - z) / 2, -l0 / 2,
          (1 - z) / 2, 0, -l1 / 2,
          0, (1 - z) / 2, -l2 / 2,
          -(1 + z) / 2, -(1 + z) / 2, l0 / 2,
          (1 + z) / 2, 0, l1 / 2,
          0, (1 + z) / 2, l2 / 2;
      return g;
    }
    case ElementKind::pyramid5: {
      Eigen::Matrix<double, Eigen::Dynamic, 3> g(5, 3);
      g << -(1 - y) * (1 - z) / 4, -(1 - x) * (1 - z) / 4, -(1 - x) * (1 - y) / 4,
          (1 - y) * (1 - z) / 4, -(1 + x) * (1 - z) / 4, -(1 + x) * (1 - y) / 4,
          (1 + y) * (1 - z) / 4, (1 + x) * (1 - z) / 4, -(1 + x) * (1 + y) / 4,
          -(1 + y) * (1 - z) / 4, (1 - x) * (1 - z) / 4, -(1 - x) * (1 + y) / 4,
          0, 0, 1;
      return g;
    }
  }
  throw Error("bad element kind");
}

namespace {

std::vector<ReferenceFacePolygon> build_boundary(ElementKind kind) {
  const KindTables& t = tables(kind);
  std::vector<ReferenceFacePolygon> polys;

  auto edge_tag = [&t](const Vec3& a, const Vec3& b) -> int {
    for (size_t e = 0; e < t.edges.size(); ++e) {
      const Vec3& p = t.refCoords[t.edges[e][0]];
      const Vec3& q = t.refCoords[t.edges[e][1]];
      if ((a - p).norm() < 1e-14 && (b - q).norm() < 1e-14) return (int)e;
      if ((a - q).norm() < 1e-14 && (b - p).norm() < 1e-14) return (int)e;
    }
    return -1;
  };

  if (kind != ElementKind::pyramid5) {
    for (size_t f = 0; f < t.faces.size(); ++f) {
      ReferenceFacePolygon poly;
      poly.faceId = (int)f;
      for (int slot : t.faces[f]) poly.vertices.push_back(t.refCoords[slot]);
      const size_t n = poly.vertices.size();
      for (size_t i = 0; i < n; ++i)
        poly.edgeTags.push_back(
            edge_tag(poly.vertices[i], poly.vertices[(i + 1) % n]));
      polys.push_back(std::move(poly));
    }
    return polys;
  }

  // Pyramid: polygons are the six faces of the parametric cube. Lateral
  // quads carry the triangular element faces; their vertical cube edges are
  // the lateral element edges; cube edges at xi3 = 1 collapse to the apex
  // and carry no element edge.
  auto quad = [&](std::array<Vec3, 4> v, int faceId) {
    ReferenceFacePolygon poly;
    poly.faceId = faceId;
    for (const Vec3& p : v) poly.vertices.push_back(p);
    for (int i = 0; i < 4; ++i) {
      const Vec3& a = v[i];
      const Vec3& b = v[(i + 1) % 4];
      if (std::abs(a[2] - 1) < 1e-14 && std::abs(b[2] - 1) < 1e-14) {
        poly.edgeTags.push_back(-1);  // collapsed top edge
      } else if (std::abs(a[2] - b[2]) > 1e-14) {
        // vertical cube edge at corner (x,y): lateral element edge from the
        // base corner with those coordinates to the apex (slot 4)
        const double cx = a[0], cy = a[1];
        int baseSlot = -1;
        for (int s = 0; s < 4; ++s)
          if (std::abs(t.refCoords[s][0] - cx) < 1e-14 &&
              std::abs(t.refCoords[s][1] - cy) < 1e-14)
            baseSlot = s;
        int tag = -1;
        for (size_t e = 0; e < t.edges.size(); ++e)
          if ((t.edges[e][0] == baseSlot && t.edges[e][1] == 4) ||
              (t.edges[e][1] == baseSlot && t.edges[e][0] == 4))
            tag = (int)e;
        poly.edgeTags.push_back(tag);
      } else {
        poly.edgeTags.push_back(edge_tag(a, b));
      }
    }
    return poly;
  };

  polys.push_back(quad({Vec3{-1, -1, 0}, {-1, 1, 0}, {1, 1, 0}, {1, -1, 0}}, 0));
  polys.push_back(quad({Vec3{-1, -1, 0}, {1, -1, 0}, {1, -1, 1}, {-1, -1, 1}}, 1));
  polys.push_back(quad({Vec3{1, -1, 0}, {1, 1, 0}, {1, 1, 1}, {1, -1, 1}}, 2));
  polys.push_back(quad({Vec3{1, 1, 0}, {-1, 1, 0}, {-1, 1, 1}, {1, 1, 1}}, 3));
  polys.push_back(quad({Vec3{-1, 1, 0}, {-1, -1, 0}, {-1, -1, 1}, {-1, 1, 1}}, 4));
  polys.push_back(
      quad({Vec3{-1, -1, 1}, {1, -1, 1}, {1, 1, 1}, {-1, 1, 1}}, kApexFaceId));
  return polys;
}

}  // namespace

const std::vector<ReferenceFacePolygon>& reference_boundary(ElementKind kind) {
  static const std::vector<ReferenceFacePolygon> hex = build_boundary(ElementKind::hex8);
  static const std::vector<ReferenceFacePolygon> tet = build_boundary(ElementKind::tet4);
  static const std::vector<ReferenceFacePolygon> wedge = build_boundary(ElementKind::wedge6);
  static const std::vector<ReferenceFacePolygon> pyr = build_boundary(ElementKind::pyramid5);
  switch (kind) {
    case ElementKind::hex8: return hex;
    case ElementKind::tet4: return tet;
    case ElementKind::wedge6: return wedge;
    case ElementKind::pyramid5: return pyr;
  }
  throw Error("bad element kind");
}

bool point_is_corner(ElementKind kind, const Vec3& xi, int slot, double tol) {
  if (kind == ElementKind::pyramid5 && slot == 4) return xi[2] > 1.0 - tol;
  return (xi - tables(kind).refCoords[slot]).norm() < tol;
}

}  // namespace hhe
