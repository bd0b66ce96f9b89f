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

#include "hhe/compatibility.hpp"

#include <algorithm>
#include <string>
#include <thread>

namespace hhe {

CompatPolicy policy_from_string(const std::string& s) {
  if (s == "allPairs") return CompatPolicy::allPairs;
  if (s == "oneToOneOnly") return CompatPolicy::oneToOneOnly;
  throw ScenarioError("unknown compatibility policy: " + s);
}

bool CompatibilityGraph::has_edge(const CompatNode& a, const CompatNode& b) const {
  auto it = adj.find(a);
  return it != adj.end() && it->second.count(b) > 0;
}

void CompatibilityGraph::add_edge(const CompatNode& a, const CompatNode& b) {
  adj[a].insert(b);
  adj[b].insert(a);
}

void CompatibilityGraph::remove_element(int element) {
  for (auto it = adj.begin(); it != adj.end();) {
    if (it->first.first == element) {
      for (const CompatNode& n : it->second) {
        auto other = adj.find(n);
        if (other != adj.end()) other->second.erase(it->first);
      }
      it = adj.erase(it);
    } else {
      ++it;
    }
  }
}

size_t CompatibilityGraph::edge_count() const {
  size_t twice = 0;
  for (const auto& [n, nbrs] : adj) twice += nbrs.size();
  return twice / 2;
}

std::vector<std::pair<CompatNode, CompatNode>> CompatibilityGraph::edges() const {
  std::vector<std::pair<CompatNode, CompatNode>> out;
  for (const auto& [n, nbrs] : adj)
    for (const CompatNode& m : nbrs)
      if (n < m) out.push_back({n, m});
  return out;
}

CompatibilityGraph initial_graph(const Domain& d) {
  CompatibilityGraph g;
  for (size_t e = 0; e < d.mesh.elements.size(); ++e) g.add_node({(int)e, 0});
  for (const SharedTopology& st : d.topos) g.add_edge({st.a, 0}, {st.b, 0});
  return g;
}

void invalidate(CompatibilityGraph& g, const std::vector<int>& elements) {
  for (int e : elements) g.remove_element(e);
}

namespace {

// Branch agreement: wherever an enrichment ancestor of one field is linked to
// an enrichment ancestor of the other, the two fields must descend through
// sides matching the link orientation.
bool ancestors_agree(const EnrichmentTree& ta,
                     const std::vector<std::pair<int, int>>& ancA, int elemB,
                     const std::vector<std::pair<int, int>>& ancB) {
  for (const auto& [ea, sa] : ancA) {
    for (const EnrichmentLink& l : ta.enrichment(ea).links) {
      if (l.element != elemB) continue;
      for (const auto& [eb, sb] : ancB)
        if (eb == l.enrichment && sa * sb != l.orientation) return false;
    }
  }
  return true;
}

bool links_twice_into(const EnrichmentTree& ta,
                      const std::vector<std::pair<int, int>>& ancA, int elemB,
                      const std::vector<std::pair<int, int>>& ancB) {
  for (const auto& [ea, sa] : ancA) {
    int hits = 0;
    for (const EnrichmentLink& l : ta.enrichment(ea).links) {
      if (l.element != elemB) continue;
      for (const auto& [eb, sb] : ancB)
        if (eb == l.enrichment) ++hits;
    }
    if (hits > 1) return true;
  }
  return false;
}

bool crossing_ancestor_unlinked(const EnrichmentTree& ta,
                                const std::vector<std::pair<int, int>>& ancA,
                                int elemB,
                                const std::vector<std::pair<int, int>>& ancB,
                                const SharedTopology& st) {
  for (const auto& [ea, sa] : ancA) {
    if (!query_crosses_shared_topology(ta, ea, st)) continue;
    bool linked = false;
    for (const EnrichmentLink& l : ta.enrichment(ea).links) {
      if (l.element != elemB) continue;
      for (const auto& [eb, sb] : ancB)
        if (eb == l.enrichment) {
          linked = true;
          break;
        }
      if (linked) break;
    }
    if (!linked) return true;
  }
  return false;
}

bool pair_compatible(const Domain& d, const SharedTopology& st, int fa, int fb,
                     CompatPolicy policy) {
  const EnrichmentTree& ta = d.trees[st.a];
  const EnrichmentTree& tb = d.trees[st.b];
  if (!query_touches_shared_topology(ta, fa, st)) return false;
  if (!query_touches_shared_topology(tb, fb, st)) return false;
  const auto ancA = ta.ancestry(fa);
  const auto ancB = tb.ancestry(fb);
  if (!ancestors_agree(ta, ancA, st.b, ancB)) return false;
  if (policy == CompatPolicy::oneToOneOnly) {
    if (links_twice_into(ta, ancA, st.b, ancB)) return false;
    if (links_twice_into(tb, ancB, st.a, ancA)) return false;
    if (crossing_ancestor_unlinked(ta, ancA, st.b, ancB, st)) return false;
    if (crossing_ancestor_unlinked(tb, ancB, st.a, ancA, st)) return false;
  }
  return true;
}

}  // namespace

void build_partial(const Domain& d, CompatibilityGraph& g, CompatPolicy policy,
                   int threads) {
  std::vector<int> topoIds;
  for (size_t i = 0; i < d.topos.size(); ++i)
    if (d.topos[i].kind != TopologyKind::node) topoIds.push_back((int)i);

  // Per-topology edge lists, filled independently and merged in topology
  // order so the result is thread-count invariant.
  std::vector<std::vector<std::pair<CompatNode, CompatNode>>> found(topoIds.size());
  auto work = [&](size_t begin, size_t step) {
    for (size_t k = begin; k < topoIds.size(); k += step) {
      const SharedTopology& st = d.topos[topoIds[k]];
      for (int fa : d.trees[st.a].basal_fields())
        for (int fb : d.trees[st.b].basal_fields())
          if (pair_compatible(d, st, fa, fb, policy))
            found[k].push_back({{st.a, fa}, {st.b, fb}});
    }
  };
  const int n = std::max(1, threads);
  if (n == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(work, (size_t)t, (size_t)n);
    for (std::thread& t : pool) t.join();
  }
  for (const auto& list : found)
    for (const auto& [a, b] : list) g.add_edge(a, b);
  // Fields with no compatible partner still participate as isolated nodes.
  for (size_t e = 0; e < d.mesh.elements.size(); ++e)
    for (int f : d.trees[e].basal_fields()) g.add_node({(int)e, f});
}

int complete_graph(const Domain& d, CompatibilityGraph& g) {
  int added = 0;
  auto neighbors_of = [&](const CompatNode& n) -> const std::set<CompatNode>* {
    auto it = g.adj.find(n);
    return it == g.adj.end() ? nullptr : &it->second;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (const SharedTopology& st : d.topos) {
      for (int fa : d.trees[st.a].basal_fields()) {
        if (!query_touches_shared_topology(d.trees[st.a], fa, st)) continue;
        const CompatNode a{st.a, fa};
        const std::set<CompatNode>* na = neighbors_of(a);
        if (na == nullptr || na->empty()) continue;
        for (int fb : d.trees[st.b].basal_fields()) {
          const CompatNode b{st.b, fb};
          if (g.has_edge(a, b)) continue;
          if (!query_touches_shared_topology(d.trees[st.b], fb, st)) continue;
          const std::set<CompatNode>* nb = neighbors_of(b);
          if (nb == nullptr) continue;
          bool common = false;
          for (const CompatNode& c : *na)
            if (nb->count(c)) {
              common = true;
              break;
            }
          if (!common) continue;
          g.add_edge(a, b);
          ++added;
          changed = true;
        }
      }
    }
  }
  return added;
}

namespace {

struct UnionFind {
  std::map<CompatNode, CompatNode> parent;
  CompatNode find(CompatNode x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(const CompatNode& a, const CompatNode& b) {
    const CompatNode ra = find(a), rb = find(b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
};

}  // namespace

PieceAssignment connected_pieces(const Domain& d, const CompatibilityGraph& g) {
  UnionFind uf;
  for (size_t e = 0; e < d.mesh.elements.size(); ++e)
    for (int f : d.trees[e].basal_fields()) {
      const CompatNode n{(int)e, f};
      uf.parent[n] = n;
    }
  for (const auto& [a, b] : g.edges())
    if (uf.parent.count(a) && uf.parent.count(b)) uf.unite(a, b);

  PieceAssignment out;
  std::map<CompatNode, int> rootId;
  for (size_t e = 0; e < d.mesh.elements.size(); ++e)
    for (int f : d.trees[e].basal_fields()) {
      const CompatNode n{(int)e, f};
      const CompatNode r = uf.find(n);
      auto it = rootId.find(r);
      if (it == rootId.end()) it = rootId.emplace(r, out.count++).first;
      out.pieceOf[n] = it->second;
    }
  return out;
}

nlohmann::ordered_json graph_to_json(const CompatibilityGraph& g) {
  auto key = [](const CompatNode& n) {
    return std::to_string(n.first) + ":" + std::to_string(n.second);
  };
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& [n, nbrs] : g.adj) {
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const CompatNode& m : nbrs) list.push_back(key(m));
    out[key(n)] = std::move(list);
  }
  return out;
}

}  // namespace hhe
