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

#ifndef HHE_ELEMENT_HPP_
#define HHE_ELEMENT_HPP_

#include <array>
#include <string>
#include <vector>

#include "hhe/common.hpp"

namespace hhe {

enum class ElementKind { hex8, tet4, wedge6, pyramid5 };

ElementKind kind_from_string(const std::string& name);
const char* kind_to_string(ElementKind kind);

// Reference conventions:
//   hex8      [-1,1]^3, trilinear, node order bottom CCW then top CCW.
//   tet4      unit tetrahedron x,y,z >= 0, x+y+z <= 1.
//   wedge6    triangle (0,0),(1,0),(0,1) extruded over z in [-1,1].
//   pyramid5  collapsed cube: xi1,xi2 in [-1,1], xi3 in [0,1]; base bilinears
//             scaled by (1-xi3), apex function xi3. The parametric domain is
//             the full cube; the physical collapse lives in the geometry map.
//             Node 4 (the apex) is canonically placed at (0,0,1); every
//             parametric point with xi3 = 1 maps to the apex.
struct KindTables {
  int nodeCount;
  std::vector<Vec3> refCoords;               // parametric corner coordinates
  std::vector<std::array<int, 2>> edges;     // corner slot pairs
  std::vector<std::vector<int>> faces;       // outward-oriented slot loops
  double refVolume;                          // parametric volume
  double paramDiameter;                      // parametric bounding diameter
};

const KindTables& tables(ElementKind kind);

// Shape values / parametric gradients at a parametric point.
Eigen::VectorXd shape_values(ElementKind kind, const Vec3& xi);
Eigen::Matrix<double, Eigen::Dynamic, 3> shape_gradients(ElementKind kind,
                                                         const Vec3& xi);

// Boundary of the parametric domain as outward-oriented polygons, one per
// entry, with per-edge element-edge tags (-1 where a polygon edge is not part
// of an element edge, e.g. the pyramid's collapsed top) and the face id the
// polygon sits on. The pyramid carries six polygons: ids 0..4 are the element
// faces (base, then the four triangles as listed in tables().faces); id 5 is
// the degenerate parametric top that keeps the cube watertight.
struct ReferenceFacePolygon {
  std::vector<Vec3> vertices;
  std::vector<int> edgeTags;
  int faceId;
};

const std::vector<ReferenceFacePolygon>& reference_boundary(ElementKind kind);

// Sentinel face id of the pyramid's collapsed parametric top.
inline constexpr int kApexFaceId = 5;

// True when a parametric point represents the given corner slot; handles the
// pyramid apex, which is any point with xi3 = 1.
bool point_is_corner(ElementKind kind, const Vec3& xi, int slot, double tol);

}  // namespace hhe

#endif  // HHE_ELEMENT_HPP_
