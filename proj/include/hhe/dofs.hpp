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

#ifndef HHE_DOFS_HPP_
#define HHE_DOFS_HPP_

#include <map>
#include <vector>

#include <nlohmann/json.hpp>

#include "hhe/compatibility.hpp"

namespace hhe {

// Scalar degrees of freedom live on (element, basal field, node slot) tuples;
// compatible fields share them at common nodes. Vector dof = 3*class + comp.
struct DofMap {
  std::vector<std::vector<int>> fieldIds;  // basal field ids per element, asc
  std::vector<std::vector<std::vector<int>>> classes;  // [elem][ordinal][slot]
  int scalarClasses = 0;
  int totalDofs = 0;

  int ordinal_of(int element, int fieldId) const;
  int class_of(int element, int fieldOrdinal, int slot) const {
    return classes[element][fieldOrdinal][slot];
  }
  int dof(int element, int fieldOrdinal, int slot, int comp) const {
    return 3 * classes[element][fieldOrdinal][slot] + comp;
  }
};

// Serial enumeration: union-find over tuples, merged across each graph edge
// at every node the two elements share; dense class ids by first touch in
// (element, field ordinal, slot) order.
DofMap enumerate_dofs(const Domain& d, const CompatibilityGraph& g);

// Renumbers scalar classes: class -> perm[class].
void apply_permutation(DofMap& map, const std::vector<int>& perm);

struct Partition {
  int ranks = 1;
  std::vector<int> ownerOfElement;
};

Partition partition_contiguous(const Mesh& mesh, int ranks);
// Four ranks split at the x then y centroid medians.
Partition partition_quadrants(const Mesh& mesh);

struct MessageRecord {
  int from = 0;
  int to = 0;
  int payloadSize = 0;
};

// Per-rank fault injection for testing: edges applied to (or removed from)
// that rank's local view of the compatibility graph.
struct GraphOverride {
  std::vector<std::pair<CompatNode, CompatNode>> addEdges;
  std::vector<std::pair<CompatNode, CompatNode>> dropEdges;
};

struct DistributedEnumeration {
  DofMap map;
  std::vector<MessageRecord> messages;  // ghost exchange only, sorted
  int prefixRounds = 0;
  std::vector<int> ownedCounts;  // owned scalar classes per rank
};

// Simulated multi-rank enumeration: one worker thread per rank, mailbox
// message passing. Each rank enumerates the classes at nodes it owns (node
// owner = smallest owner among containing elements), global offsets come from
// a log-round prefix scan, and ghosted classes are resolved by owner
// messages. Throws "inconsistent ghost layers" when a ghosted class receives
// conflicting ids or none at all.
DistributedEnumeration enumerate_dofs_distributed(
    const Domain& d, const CompatibilityGraph& g, const Partition& part,
    const std::map<int, GraphOverride>& overrides = {});

// True when the two maps name the same sharing structure: the class mapping
// over all tuples is a bijection.
bool verify_equivalence(const DofMap& a, const DofMap& b);

nlohmann::ordered_json dofs_to_json(const DofMap& map);

}  // namespace hhe

#endif  // HHE_DOFS_HPP_
