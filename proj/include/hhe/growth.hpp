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

#ifndef HHE_GROWTH_HPP_
#define HHE_GROWTH_HPP_

#include <functional>
#include <optional>
#include <vector>

#include "hhe/enrichment.hpp"
#include "hhe/mesh.hpp"

namespace hhe {

struct AnalyticSurface {
  std::function<double(const Vec3&)> signedDistance;
};

AnalyticSurface plane_surface(const Vec3& point, const Vec3& normal);
AnalyticSurface sphere_surface(const Vec3& center, double radius);

// Growth direction data: a (not necessarily unit) surface normal per
// physical point; normalized where used.
struct NormalField {
  std::function<Vec3(const Vec3&)> direction;
};

NormalField constant_normal(const Vec3& v);

struct EnrichmentMember {
  int element;
  int enrichment;
  bool operator==(const EnrichmentMember& o) const {
    return element == o.element && enrichment == o.enrichment;
  }
  bool operator<(const EnrichmentMember& o) const {
    return element != o.element ? element < o.element : enrichment < o.enrichment;
  }
};

struct EnrichmentSurfaceState {
  int id = -1;
  std::vector<EnrichmentMember> members;
  std::vector<EnrichmentMember> front;  // members with an admissible advance
};

// Mesh plus per-element enrichment trees, shared-topology index, and
// enrichment surface bookkeeping.
struct Domain {
  Mesh mesh;
  std::vector<EnrichmentTree> trees;
  std::vector<SharedTopology> topos;
  std::vector<std::vector<int>> elementTopos;  // element -> indices into topos
  std::vector<EnrichmentSurfaceState> surfaces;

  const SharedTopology* topo_between(int a, int b) const;
  std::vector<int> neighbors(int element) const;  // ascending element ids
};

Domain make_domain(Mesh mesh);

// Admits a basal field when its physical volume centroid satisfies the
// predicate; an absent predicate admits everything.
using RegionPredicate = std::function<bool(const Vec3&)>;

// Enriches every basal field the analytic zero set crosses (optionally
// restricted), links enrichments across shared topologies, and computes the
// surface front. Throws "surface outside domain" when nothing is cut.
int insert_surface(Domain& domain, const AnalyticSurface& surface,
                   const RegionPredicate& region = nullptr);

struct SdSolveResult {
  std::vector<double> values;  // per element node
  int escalations = 0;
};

// Laplace-smoothed nodal signed distances for a new enrichment of `element`:
// gradients follow the normal field while penalty terms tie nodes shared
// with the compatibility list to the listed enrichments' values. The penalty
// weight escalates tenfold (bounded by 20 rounds) until the solved signs are
// consistent (all-equal or all-opposite per listed enrichment). Throws
// "unconstrained level set" when the list shares no nodes with the element.
SdSolveResult solve_nodal_signed_distances(const Domain& domain, int element,
                                           const NormalField& normal,
                                           const std::vector<EnrichmentMember>& compat);

// Growth admissibility of `member`'s enrichment into basal field
// `targetBasal` of adjacent element `targetElement`.
bool can_advance(const Domain& domain, const EnrichmentMember& member,
                 int targetElement, int targetBasal);

void recompute_front(Domain& domain, int surfaceId);

struct GrowthReport {
  int steps = 0;             // breadth-first sweeps executed
  int enrichmentsAdded = 0;
  int merges = 0;            // links onto enrichments of other surfaces
  int escalations = 0;       // total penalty escalations across solves
  bool complete = false;     // front empty on exit
};

GrowthReport advance_front(Domain& domain, int surfaceId,
                           const NormalField& normal, int maxSteps);

}  // namespace hhe

#endif  // HHE_GROWTH_HPP_
