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

#ifndef HHE_ENRICHMENT_HPP_
#define HHE_ENRICHMENT_HPP_

#include <string>
#include <vector>

#include "hhe/mesh.hpp"
#include "hhe/polyhedron.hpp"

namespace hhe {

// Displacement field node of a per-element binary enrichment tree. Leaves
// ("basal" fields) carry degrees of freedom; interior fields were split by an
// enrichment. A field's parametric domain is bounded by `boundary`.
struct Field {
  int id = 0;
  int parentEnrichment = -1;  // -1 for the root
  int branchSign = 0;         // -1 negative child, +1 positive child, 0 root
  int childEnrichment = -1;   // -1 while basal
  std::vector<Polygon> boundary;
};

struct EnrichmentLink {
  int element;      // element owning the compatible enrichment
  int enrichment;   // its id within that element's tree
  int orientation;  // +1 equal signs at shared nodes, -1 opposite
};

struct Enrichment {
  int id = 0;
  int parentField = -1;
  int surfaceId = -1;
  std::vector<double> signedDistances;  // one per element node, never zero
  int negField = -1;
  int posField = -1;
  std::vector<Polygon> interface;  // explicit cut surface within the parent
  std::vector<EnrichmentLink> links;
};

// Nudges near-zero values to +-tau*paramDiameter (tau = 1e-8); exact zeros
// move to the negative side. Signs of other values never change.
void perturb_signed_distances(std::vector<double>& sd, double paramDiameter);

class EnrichmentTree {
 public:
  EnrichmentTree() = default;
  EnrichmentTree(ElementKind kind, std::vector<int> conn);

  ElementKind kind() const { return kind_; }
  const std::vector<int>& conn() const { return conn_; }
  int slot_of(int globalNode) const;

  const std::vector<Field>& fields() const { return fields_; }
  const std::vector<Enrichment>& enrichments() const { return enrichments_; }
  Field& field(int id) { return fields_[id]; }
  const Field& field(int id) const { return fields_[id]; }
  Enrichment& enrichment(int id) { return enrichments_[id]; }
  const Enrichment& enrichment(int id) const { return enrichments_[id]; }

  bool is_basal(int fieldId) const { return fields_[fieldId].childEnrichment < 0; }
  std::vector<int> basal_fields() const;  // ascending field id
  bool enriched() const { return !enrichments_.empty(); }

  // Enrichment ancestry of a field: (enrichment id, branch sign the field
  // descends through), root-most first.
  std::vector<std::pair<int, int>> ancestry(int fieldId) const;
  // Branch sign of `fieldId` relative to ancestor enrichment, 0 if not below.
  int branch_sign(int fieldId, int enrichmentId) const;

  double interp_sd(int enrichmentId, const Vec3& xi) const;

  // Splits a basal field with perturbed nodal signed distances; returns the
  // new enrichment id. Throws "level set misses element" when all signs
  // agree and "enrichment outside parent field" when the level set does not
  // cross the field's domain.
  int insert_enrichment(int basalField, std::vector<double> signedDistances,
                        int surfaceId);

  // Product of Heaviside factors along the field's ancestry: exactly 1.0 on
  // the field's physical domain, 0.0 elsewhere.
  double coefficient(int fieldId, const Vec3& xi) const;
  int classify_point(const Vec3& xi) const;  // basal field containing xi

  // Sum of basal-field interpolants weighted by their coefficients;
  // nodalValues[fieldId] holds one vector per element node.
  Vec3 aggregate_solution(const std::vector<std::vector<Vec3>>& nodalValues,
                          const Vec3& xi) const;

  std::string render() const;
  std::string dump_json() const;

 private:
  ElementKind kind_ = ElementKind::hex8;
  std::vector<int> conn_;
  std::vector<Field> fields_;
  std::vector<Enrichment> enrichments_;
};

// Cached tetrahedral decomposition of the pristine reference element.
const std::vector<TetCell>& root_decomposition(ElementKind kind);

// Enrichment-front queries against a shared topology st between elements.
// The tree arguments carry the element-local data of each side.

// Does `enrichment`'s level set cross into `basal`'s physical domain within
// the shared face/edge? (false for node sharing)
bool query_crosses_adjacent_field(const EnrichmentTree& enrTree, int enrichmentId,
                                  const EnrichmentTree& adjTree, int basalField,
                                  const SharedTopology& st);

// Does `enrichment`'s level set cross the shared topology at all? Exact via
// nodal signs. (false for node sharing)
bool query_crosses_shared_topology(const EnrichmentTree& tree, int enrichmentId,
                                   const SharedTopology& st);

// Does the basal field's physical domain touch the shared topology with
// positive measure (or contain the shared node)? Uses boundary tags.
bool query_touches_shared_topology(const EnrichmentTree& tree, int basalField,
                                   const SharedTopology& st);

}  // namespace hhe

#endif  // HHE_ENRICHMENT_HPP_
