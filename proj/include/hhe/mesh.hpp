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

#ifndef HHE_MESH_HPP_
#define HHE_MESH_HPP_

#include <array>
#include <string>
#include <vector>

#include "hhe/common.hpp"
#include "hhe/element.hpp"

namespace hhe {

struct MeshElement {
  ElementKind kind;
  std::vector<int> conn;  // global node ids in reference slot order
};

struct Mesh {
  std::vector<Vec3> nodes;
  std::vector<MeshElement> elements;
  double boundingLength = 0.0;

  int slot_of(int element, int globalNode) const;  // -1 when absent
};

enum class TopologyKind { face, edge, node };

// Maximal shared topology between a pair of elements: the full set of common
// nodes, classified as a whole face of both, a whole edge of both, or a
// single node.
struct SharedTopology {
  int a = -1;
  int b = -1;
  TopologyKind kind = TopologyKind::node;
  std::vector<int> sharedNodes;  // sorted global ids
};

std::vector<SharedTopology> adjacency(const Mesh& mesh);

// nx*ny*nz axis-aligned hex cells tiling [0,L]^3 (cell size L/n per axis).
// Node ids are lexicographic (i fastest); element ids likewise.
Mesh generate_uniform_grid(int nx, int ny, int nz, double L);

// Deterministic mixed-kind tiling of [0,L]^3 on a 9x9x9 cube lattice with all
// four element kinds: one z-layer of six-tet cubes, two of wedge pairs, three
// of center-node cone cubes (pyramids/tets), three of hexes.
Mesh generate_mixed_grid(double L);

Mesh mesh_from_json(const std::string& text);
std::string mesh_to_json(const Mesh& mesh);

// Geometry helpers.
Vec3 map_to_physical(const Mesh& mesh, int element, const Vec3& xi);
Eigen::Matrix3d jacobian(const Mesh& mesh, int element, const Vec3& xi);
double element_volume(const Mesh& mesh, int element);  // physical
double characteristic_length(const Mesh& mesh, int element);  // cbrt(volume)

// Throws when any element has a nonpositive Jacobian determinant at any of
// its quadrature points, a bad connectivity size, or out-of-range node ids.
void validate(const Mesh& mesh);

}  // namespace hhe

#endif  // HHE_MESH_HPP_
