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

#ifndef HHE_POLYHEDRON_HPP_
#define HHE_POLYHEDRON_HPP_

#include <array>
#include <functional>
#include <vector>

#include "hhe/common.hpp"

namespace hhe {

// Oriented boundary polygon of a (sub-)field's parametric domain. Vertices
// wind so the right-hand normal points out of the domain. edgeTags[i] is the
// element-edge id the segment vertices[i] -> vertices[i+1] lies on (-1 when
// it is not part of an element edge). originFace is the element face id the
// polygon lies on (-1 for cut surfaces); originEnrichment is the enrichment
// whose cut produced it (-1 for element boundary polygons).
struct Polygon {
  std::vector<Vec3> vertices;
  std::vector<int> edgeTags;
  int originFace = -1;
  int originEnrichment = -1;
};

double polygon_area(const Polygon& poly);
Vec3 polygon_centroid(const Polygon& poly);  // vertex mean

// Signed volume/centroid by the divergence theorem over centroid fans;
// consistent across sub-polyhedra sharing faces.
double polyhedron_volume(const std::vector<Polygon>& boundary);
Vec3 polyhedron_centroid(const std::vector<Polygon>& boundary);

struct PolyhedronCut {
  std::vector<Polygon> negative;  // includes cut-surface loops, outward for the negative side
  std::vector<Polygon> positive;
  bool crossed = false;
};

// Splits a watertight polyhedron by the zero set of `level`, evaluated at
// polygon vertices with linear roots along edges. Vertex sign convention:
// values > 0 are positive, <= 0 negative. Edge roots are computed on
// lexicographically ordered endpoints so polygons sharing an edge produce
// bit-identical crossing points.
PolyhedronCut cut_polyhedron(const std::vector<Polygon>& boundary,
                             const std::function<double(const Vec3&)>& level,
                             int enrichmentId);

// Splits a single polygon by the level's vertex signs (linear edge roots);
// keep-side parts are appended to negOut/posOut, chord segments tagged -1.
void split_single_polygon(const Polygon& poly,
                          const std::function<double(const Vec3&)>& level,
                          std::vector<Polygon>& negOut,
                          std::vector<Polygon>& posOut);

struct TetCell {
  std::array<Vec3, 4> v;
  double volume = 0.0;  // parametric, positive
};

// Centroid-cone decomposition with retry over alternative apexes. refVolume
// sets the degeneracy scale: total volumes below 1e-12*refVolume are
// rejected as slivers.
std::vector<TetCell> tetrahedralize(const std::vector<Polygon>& boundary,
                                    double refVolume);

}  // namespace hhe

#endif  // HHE_POLYHEDRON_HPP_
