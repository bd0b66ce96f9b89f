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

#include "hhe/dofs.hpp"

#include <algorithm>
#include <barrier>
#include <memory>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

namespace hhe {

int DofMap::ordinal_of(int element, int fieldId) const {
  const std::vector<int>& ids = fieldIds[element];
  auto it = std::lower_bound(ids.begin(), ids.end(), fieldId);
  if (it == ids.end() || *it != fieldId) return -1;
  return (int)(it - ids.begin());
}

namespace {

int uf_find(std::vector<int>& parent, int x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

void uf_unite(std::vector<int>& parent, int a, int b) {
  const int ra = uf_find(parent, a), rb = uf_find(parent, b);
  if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
}

void validate_graph(const Domain& d, const CompatibilityGraph& g) {
  for (const auto& [n, nbrs] : g.adj) {
    if (n.first < 0 || n.first >= (int)d.mesh.elements.size() ||
        !d.trees[n.first].is_basal(n.second))
      throw ScenarioError("graph references unknown field " +
                          std::to_string(n.first) + ":" +
                          std::to_string(n.second));
  }
}

}  // namespace

DofMap enumerate_dofs(const Domain& d, const CompatibilityGraph& g) {
  validate_graph(d, g);
  const int E = (int)d.mesh.elements.size();
  DofMap map;
  map.fieldIds.resize(E);
  map.classes.resize(E);
  std::vector<int> base(E + 1, 0);
  for (int e = 0; e < E; ++e) {
    map.fieldIds[e] = d.trees[e].basal_fields();
    const int nodes = (int)d.mesh.elements[e].conn.size();
    map.classes[e].assign(map.fieldIds[e].size(), std::vector<int>(nodes, -1));
    base[e + 1] = base[e] + (int)map.fieldIds[e].size() * nodes;
  }
  auto tuple_id = [&](int e, int ord, int slot) {
    return base[e] + ord * (int)d.mesh.elements[e].conn.size() + slot;
  };

  std::vector<int> parent(base[E]);
  std::iota(parent.begin(), parent.end(), 0);
  for (const auto& [a, b] : g.edges()) {
    const int orda = map.ordinal_of(a.first, a.second);
    const int ordb = map.ordinal_of(b.first, b.second);
    const std::vector<int>& connA = d.mesh.elements[a.first].conn;
    for (int sa = 0; sa < (int)connA.size(); ++sa) {
      const int sb = d.trees[b.first].slot_of(connA[sa]);
      if (sb < 0) continue;
      uf_unite(parent, tuple_id(a.first, orda, sa), tuple_id(b.first, ordb, sb));
    }
  }

  std::vector<int> dense(base[E], -1);
  int next = 0;
  for (int e = 0; e < E; ++e)
    for (int ord = 0; ord < (int)map.fieldIds[e].size(); ++ord)
      for (int slot = 0; slot < (int)d.mesh.elements[e].conn.size(); ++slot) {
        const int root = uf_find(parent, tuple_id(e, ord, slot));
        if (dense[root] < 0) dense[root] = next++;
        map.classes[e][ord][slot] = dense[root];
      }
  map.scalarClasses = next;
  map.totalDofs = 3 * next;
  return map;
}

void apply_permutation(DofMap& map, const std::vector<int>& perm) {
  if ((int)perm.size() != map.scalarClasses)
    throw ScenarioError("permutation size mismatch");
  for (auto& fields : map.classes)
    for (auto& slots : fields)
      for (int& c : slots) c = perm[c];
}

Partition partition_contiguous(const Mesh& mesh, int ranks) {
  Partition p;
  p.ranks = ranks;
  const long long E = (long long)mesh.elements.size();
  p.ownerOfElement.resize(E);
  for (long long e = 0; e < E; ++e)
    p.ownerOfElement[e] = (int)std::min<long long>(ranks - 1, e * ranks / E);
  return p;
}

Partition partition_quadrants(const Mesh& mesh) {
  const int E = (int)mesh.elements.size();
  std::vector<Vec3> centroids(E, Vec3::Zero());
  for (int e = 0; e < E; ++e) {
    for (int g : mesh.elements[e].conn) centroids[e] += mesh.nodes[g];
    centroids[e] /= (double)mesh.elements[e].conn.size();
  }
  auto median = [&](int axis) {
    std::vector<double> v(E);
    for (int e = 0; e < E; ++e) v[e] = centroids[e][axis];
    std::nth_element(v.begin(), v.begin() + E / 2, v.end());
    const double hi = v[E / 2];
    if (E % 2 == 1) return hi;
    // Even count: split between the two middle order statistics so both
    // halves end up equal.
    const double lo = *std::max_element(v.begin(), v.begin() + E / 2);
    return (lo + hi) / 2;
  };
  const double mx = median(0), my = median(1);
  Partition p;
  p.ranks = 4;
  p.ownerOfElement.resize(E);
  for (int e = 0; e < E; ++e)
    p.ownerOfElement[e] =
        (centroids[e][0] > mx ? 1 : 0) + (centroids[e][1] > my ? 2 : 0);
  return p;
}

namespace {

struct GhostEntry {
  int element;
  int ordinal;
  int slot;
  int globalClass;
};

struct GhostMessage {
  int from;
  std::vector<GhostEntry> entries;
};

struct Mailbox {
  std::mutex m;
  std::vector<GhostMessage> msgs;
};

}  // namespace

DistributedEnumeration enumerate_dofs_distributed(
    const Domain& d, const CompatibilityGraph& g, const Partition& part,
    const std::map<int, GraphOverride>& overrides) {
  validate_graph(d, g);
  const int E = (int)d.mesh.elements.size();
  const int R = part.ranks;
  if ((int)part.ownerOfElement.size() != E)
    throw ScenarioError("partition does not cover the mesh");

  // Node ownership: the smallest rank owning a containing element.
  const int N = (int)d.mesh.nodes.size();
  std::vector<std::vector<int>> nodeElems(N);
  for (int e = 0; e < E; ++e)
    for (int gnode : d.mesh.elements[e].conn) nodeElems[gnode].push_back(e);
  std::vector<int> nodeOwner(N, -1);
  for (int gnode = 0; gnode < N; ++gnode)
    for (int e : nodeElems[gnode]) {
      const int o = part.ownerOfElement[e];
      if (nodeOwner[gnode] < 0 || o < nodeOwner[gnode]) nodeOwner[gnode] = o;
    }

  const auto globalEdges = g.edges();
  const std::vector<std::vector<int>> basalIds = [&] {
    std::vector<std::vector<int>> out(E);
    for (int e = 0; e < E; ++e) out[e] = d.trees[e].basal_fields();
    return out;
  }();

  DistributedEnumeration result;
  result.map.fieldIds = basalIds;
  result.map.classes.resize(E);
  for (int e = 0; e < E; ++e)
    result.map.classes[e].assign(basalIds[e].size(),
                                 std::vector<int>(d.mesh.elements[e].conn.size(), -1));
  result.ownedCounts.assign(R, 0);

  int rounds = 0;
  while ((1 << rounds) < R) ++rounds;
  result.prefixRounds = rounds;

  std::vector<std::unique_ptr<Mailbox>> mailboxes;
  for (int r = 0; r < R; ++r) mailboxes.push_back(std::make_unique<Mailbox>());
  std::vector<long long> prefixSlot(R, 0);
  std::vector<long long> inclusive(R, 0);
  std::vector<std::vector<MessageRecord>> sentLog(R);
  std::barrier<> sync(R);
  std::mutex errMutex;
  std::exception_ptr firstError;

  auto worker = [&](int rank) {
    // Local mesh: owned elements plus every element carrying an owned node.
    std::vector<char> isLocal(E, 0);
    for (int e = 0; e < E; ++e) {
      if (part.ownerOfElement[e] == rank) {
        isLocal[e] = 1;
        continue;
      }
      for (int gnode : d.mesh.elements[e].conn)
        if (nodeOwner[gnode] == rank) {
          isLocal[e] = 1;
          break;
        }
    }
    std::vector<int> tupleBase(E + 1, 0);
    for (int e = 0; e < E; ++e)
      tupleBase[e + 1] =
          tupleBase[e] + (isLocal[e] ? (int)(basalIds[e].size() *
                                             d.mesh.elements[e].conn.size())
                                     : 0);
    auto tuple_id = [&](int e, int ord, int slot) {
      return tupleBase[e] + ord * (int)d.mesh.elements[e].conn.size() + slot;
    };
    auto ordinal = [&](int e, int fieldId) {
      const std::vector<int>& ids = basalIds[e];
      auto it = std::lower_bound(ids.begin(), ids.end(), fieldId);
      return it != ids.end() && *it == fieldId ? (int)(it - ids.begin()) : -1;
    };

    // Local view of the graph, with this rank's fault overrides applied.
    std::vector<std::pair<CompatNode, CompatNode>> localEdges;
    auto sameEdge = [](const std::pair<CompatNode, CompatNode>& x,
                       const std::pair<CompatNode, CompatNode>& y) {
      return (x.first == y.first && x.second == y.second) ||
             (x.first == y.second && x.second == y.first);
    };
    const GraphOverride* ov = nullptr;
    if (auto it = overrides.find(rank); it != overrides.end()) ov = &it->second;
    for (const auto& edge : globalEdges) {
      if (!isLocal[edge.first.first] || !isLocal[edge.second.first]) continue;
      bool dropped = false;
      if (ov)
        for (const auto& de : ov->dropEdges)
          if (sameEdge(edge, de)) {
            dropped = true;
            break;
          }
      if (!dropped) localEdges.push_back(edge);
    }
    if (ov)
      for (const auto& ae : ov->addEdges)
        if (isLocal[ae.first.first] && isLocal[ae.second.first])
          localEdges.push_back(ae);

    std::vector<int> parent(tupleBase[E]);
    std::iota(parent.begin(), parent.end(), 0);
    for (const auto& [a, b] : localEdges) {
      const int orda = ordinal(a.first, a.second);
      const int ordb = ordinal(b.first, b.second);
      if (orda < 0 || ordb < 0) continue;
      const std::vector<int>& connA = d.mesh.elements[a.first].conn;
      for (int sa = 0; sa < (int)connA.size(); ++sa) {
        const int sb = d.trees[b.first].slot_of(connA[sa]);
        if (sb < 0) continue;
        uf_unite(parent, tuple_id(a.first, orda, sa), tuple_id(b.first, ordb, sb));
      }
    }

    // Dense local numbering, classes at owned node positions first.
    std::map<int, int> ownedIndex;  // uf root -> owned-local index
    for (int e = 0; e < E; ++e) {
      if (!isLocal[e]) continue;
      const std::vector<int>& conn = d.mesh.elements[e].conn;
      for (int ord = 0; ord < (int)basalIds[e].size(); ++ord)
        for (int slot = 0; slot < (int)conn.size(); ++slot) {
          if (nodeOwner[conn[slot]] != rank) continue;
          const int root = uf_find(parent, tuple_id(e, ord, slot));
          ownedIndex.emplace(root, (int)ownedIndex.size());
        }
    }
    const long long owned = (long long)ownedIndex.size();
    result.ownedCounts[rank] = (int)owned;

    // Prefix scan for global offsets; one partner message per round.
    long long val = owned;
    sync.arrive_and_wait();
    for (int k = 0; k < rounds; ++k) {
      const int step = 1 << k;
      if (rank + step < R) prefixSlot[rank + step] = val;
      sync.arrive_and_wait();
      if (rank >= step) val += prefixSlot[rank];
      sync.arrive_and_wait();
    }
    inclusive[rank] = val;
    const long long offset = val - owned;

    auto global_of_owned = [&](int root) {
      return (int)(offset + ownedIndex.at(root));
    };

    // Ghost exchange: for every node this rank owns, send the class ids of
    // all tuples there to each rank owning an element at that node.
    std::map<int, std::vector<GhostEntry>> outbound;
    for (int gnode = 0; gnode < N; ++gnode) {
      if (nodeOwner[gnode] != rank) continue;
      std::set<int> receivers;
      for (int e : nodeElems[gnode]) {
        const int o = part.ownerOfElement[e];
        if (o != rank) receivers.insert(o);
      }
      if (receivers.empty()) continue;
      std::vector<GhostEntry> entries;
      for (int e : nodeElems[gnode]) {
        const int slot = d.trees[e].slot_of(gnode);
        for (int ord = 0; ord < (int)basalIds[e].size(); ++ord) {
          const int root = uf_find(parent, tuple_id(e, ord, slot));
          entries.push_back({e, ord, slot, global_of_owned(root)});
        }
      }
      for (int t : receivers)
        for (const GhostEntry& ge : entries) outbound[t].push_back(ge);
    }
    for (auto& [t, entries] : outbound) {
      sentLog[rank].push_back({rank, t, (int)entries.size()});
      std::lock_guard<std::mutex> lock(mailboxes[t]->m);
      mailboxes[t]->msgs.push_back({rank, std::move(entries)});
    }
    sync.arrive_and_wait();

    try {
      // Resolve ghosted classes from owner messages.
      std::map<int, std::set<int>> incoming;  // uf root -> received ids
      {
        std::lock_guard<std::mutex> lock(mailboxes[rank]->m);
        for (const GhostMessage& msg : mailboxes[rank]->msgs)
          for (const GhostEntry& ge : msg.entries) {
            if (!isLocal[ge.element]) continue;
            const int root = uf_find(parent, tuple_id(ge.element, ge.ordinal, ge.slot));
            incoming[root].insert(ge.globalClass);
          }
      }
      for (const auto& [root, ids] : incoming)
        if (ids.size() > 1) throw NumericalError("inconsistent ghost layers");

      // Emit this rank's owned elements into the global map.
      for (int e = 0; e < E; ++e) {
        if (part.ownerOfElement[e] != rank) continue;
        const std::vector<int>& conn = d.mesh.elements[e].conn;
        for (int ord = 0; ord < (int)basalIds[e].size(); ++ord)
          for (int slot = 0; slot < (int)conn.size(); ++slot) {
            const int root = uf_find(parent, tuple_id(e, ord, slot));
            int gid;
            if (nodeOwner[conn[slot]] == rank) {
              gid = global_of_owned(root);
            } else {
              auto it = incoming.find(root);
              if (it == incoming.end())
                throw NumericalError("inconsistent ghost layers");
              gid = *it->second.begin();
            }
            result.map.classes[e][ord][slot] = gid;
          }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(errMutex);
      if (!firstError) firstError = std::current_exception();
    }
  };

  std::vector<std::thread> pool;
  for (int r = 0; r < R; ++r) pool.emplace_back(worker, r);
  for (std::thread& t : pool) t.join();
  if (firstError) std::rethrow_exception(firstError);

  long long total = 0;
  for (int r = 0; r < R; ++r) total = std::max(total, inclusive[r]);
  result.map.scalarClasses = (int)total;
  result.map.totalDofs = 3 * (int)total;
  for (const auto& log : sentLog)
    for (const MessageRecord& m : log) result.messages.push_back(m);
  std::sort(result.messages.begin(), result.messages.end(),
            [](const MessageRecord& a, const MessageRecord& b) {
              return a.from != b.from ? a.from < b.from : a.to < b.to;
            });
  return result;
}

bool verify_equivalence(const DofMap& a, const DofMap& b) {
  if (a.fieldIds != b.fieldIds) return false;
  if (a.scalarClasses != b.scalarClasses) return false;
  std::map<int, int> fwd, bwd;
  for (size_t e = 0; e < a.classes.size(); ++e) {
    if (a.classes[e].size() != b.classes[e].size()) return false;
    for (size_t ord = 0; ord < a.classes[e].size(); ++ord) {
      if (a.classes[e][ord].size() != b.classes[e][ord].size()) return false;
      for (size_t slot = 0; slot < a.classes[e][ord].size(); ++slot) {
        const int ca = a.classes[e][ord][slot];
        const int cb = b.classes[e][ord][slot];
        auto f = fwd.emplace(ca, cb);
        if (!f.second && f.first->second != cb) return false;
        auto r = bwd.emplace(cb, ca);
        if (!r.second && r.first->second != ca) return false;
      }
    }
  }
  return true;
}

nlohmann::ordered_json dofs_to_json(const DofMap& map) {
  nlohmann::ordered_json out;
  out["scalarClasses"] = map.scalarClasses;
  out["totalDofs"] = map.totalDofs;
  nlohmann::ordered_json elems = nlohmann::ordered_json::array();
  for (size_t e = 0; e < map.classes.size(); ++e) {
    nlohmann::ordered_json fields = nlohmann::ordered_json::array();
    for (size_t ord = 0; ord < map.classes[e].size(); ++ord) {
      nlohmann::ordered_json f;
      f["field"] = map.fieldIds[e][ord];
      f["classes"] = map.classes[e][ord];
      fields.push_back(std::move(f));
    }
    nlohmann::ordered_json el;
    el["element"] = (int)e;
    el["fields"] = std::move(fields);
    elems.push_back(std::move(el));
  }
  out["elements"] = std::move(elems);
  return out;
}

}  // namespace hhe
