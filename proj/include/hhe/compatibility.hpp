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

#ifndef HHE_COMPATIBILITY_HPP_
#define HHE_COMPATIBILITY_HPP_

#include <map>
#include <set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hhe/growth.hpp"

namespace hhe {

// A graph node is one basal displacement field: (element id, field id).
using CompatNode = std::pair<int, int>;

enum class CompatPolicy { allPairs, oneToOneOnly };

CompatPolicy policy_from_string(const std::string& s);

struct CompatibilityGraph {
  std::map<CompatNode, std::set<CompatNode>> adj;

  bool has_node(const CompatNode& n) const { return adj.count(n) > 0; }
  bool has_edge(const CompatNode& a, const CompatNode& b) const;
  void add_node(const CompatNode& n) { adj[n]; }
  void add_edge(const CompatNode& a, const CompatNode& b);
  void remove_element(int element);
  size_t edge_count() const;
  // Edges with the smaller node first, sorted.
  std::vector<std::pair<CompatNode, CompatNode>> edges() const;
};

// Classical starting graph: one node per element root field, one edge per
// shared topology of any kind.
CompatibilityGraph initial_graph(const Domain& d);

// Removes the listed elements' nodes (and incident edges); used after their
// trees changed, so stale field references never survive.
void invalidate(CompatibilityGraph& g, const std::vector<int>& elements);

// Pairwise reconnection across shared faces and edges. Both fields must
// touch the shared topology; linked enrichment ancestors must agree on the
// branch sides. The one-to-one policy additionally requires every ancestor
// crossing the shared topology to be linked across, uniquely.
void build_partial(const Domain& d, CompatibilityGraph& g, CompatPolicy policy,
                   int threads = 1);

// Transitive closure step: connects two fields that share a topology of any
// kind, both touch it, and have a common neighbor already in the graph.
// Iterates to a fixed point. Returns the number of edges added.
int complete_graph(const Domain& d, CompatibilityGraph& g);

struct PieceAssignment {
  int count = 0;
  std::map<CompatNode, int> pieceOf;  // dense ids by smallest member
};

PieceAssignment connected_pieces(const Domain& d, const CompatibilityGraph& g);

nlohmann::ordered_json graph_to_json(const CompatibilityGraph& g);

}  // namespace hhe

#endif  // HHE_COMPATIBILITY_HPP_
