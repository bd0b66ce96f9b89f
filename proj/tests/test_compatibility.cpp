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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "hhe/compatibility.hpp"
#include "hhe/growth.hpp"

using namespace hhe;

namespace {

using Edge = std::pair<CompatNode, CompatNode>;

std::set<Edge> edge_set(const CompatibilityGraph& g) {
  const auto edges = g.edges();
  return std::set<Edge>(edges.begin(), edges.end());
}

Edge mk(int ea, int fa, int eb, int fb) {
  CompatNode a{ea, fa}, b{eb, fb};
  return a < b ? Edge{a, b} : Edge{b, a};
}

// The canonical crack test bed: 3x3x1 grid, elements 3 and 4 cut by the
// plane y = 1.45 restricted to x < 2, each into fields 1 (below) and 2
// (above).
Domain cracked_grid() {
  Domain d = make_domain(generate_uniform_grid(3, 3, 1, 3.0));
  insert_surface(d, plane_surface(Vec3(0, 1.45, 0), Vec3(0, 1, 0)),
                 [](const Vec3& x) { return x[0] < 2.0; });
  return d;
}

const std::set<Edge> kSurvivors = {
    mk(0, 0, 1, 0), mk(1, 0, 2, 0), mk(6, 0, 7, 0), mk(7, 0, 8, 0),
    mk(2, 0, 5, 0), mk(5, 0, 8, 0), mk(1, 0, 5, 0), mk(5, 0, 7, 0)};

const std::set<Edge> kPartialAdds = {
    mk(3, 1, 4, 1), mk(3, 2, 4, 2), mk(0, 0, 3, 1), mk(1, 0, 3, 1),
    mk(1, 0, 4, 1), mk(0, 0, 4, 1), mk(2, 0, 4, 1), mk(6, 0, 3, 2),
    mk(7, 0, 3, 2), mk(7, 0, 4, 2), mk(6, 0, 4, 2), mk(8, 0, 4, 2)};

const std::set<Edge> kCompleteAdds = {mk(5, 0, 4, 1), mk(5, 0, 4, 2)};

std::set<Edge> set_union(const std::set<Edge>& a, const std::set<Edge>& b) {
  std::set<Edge> out = a;
  out.insert(b.begin(), b.end());
  return out;
}

}  // namespace

TEST_CASE("the initial graph mirrors the mesh adjacency") {
  Domain d = make_domain(generate_uniform_grid(3, 3, 1, 3.0));
  CompatibilityGraph g = initial_graph(d);
  CHECK(g.edge_count() == 20);  // 12 face + 8 edge pairs
  for (int e = 0; e < 9; ++e) CHECK(g.has_node({e, 0}));
  CHECK(g.has_edge({0, 0}, {1, 0}));
  CHECK(g.has_edge({0, 0}, {4, 0}));  // diagonal edge sharing
  CHECK_FALSE(g.has_edge({0, 0}, {8, 0}));
}

TEST_CASE("invalidation removes enriched elements and their mirror edges") {
  Domain d = cracked_grid();
  CompatibilityGraph g = initial_graph(d);
  invalidate(g, {3, 4});
  CHECK(edge_set(g) == kSurvivors);
  CHECK_FALSE(g.has_node({3, 0}));
  CHECK_FALSE(g.has_node({4, 0}));
  for (const auto& [node, nbrs] : g.adj)
    for (const auto& n : nbrs) {
      CHECK(n.first != 3);
      CHECK(n.first != 4);
    }
}

TEST_CASE("partial rebuild restores provable pairs under the guarantee") {
  Domain d = cracked_grid();
  CompatibilityGraph g = initial_graph(d);
  invalidate(g, {3, 4});
  build_partial(d, g, CompatPolicy::oneToOneOnly);
  CHECK(edge_set(g) == set_union(kSurvivors, kPartialAdds));
  // Every basal field exists as a node even if isolated.
  CHECK(g.has_node({3, 1}));
  CHECK(g.has_node({3, 2}));
  CHECK(g.has_node({4, 1}));
  CHECK(g.has_node({4, 2}));
}

TEST_CASE("the relaxed policy admits the crossing-ancestor pairs directly") {
  Domain d = cracked_grid();
  CompatibilityGraph g = initial_graph(d);
  invalidate(g, {3, 4});
  build_partial(d, g, CompatPolicy::allPairs);
  CHECK(edge_set(g) ==
        set_union(set_union(kSurvivors, kPartialAdds), kCompleteAdds));
}

TEST_CASE("completion closes exactly the both-touch triangles") {
  Domain d = cracked_grid();
  CompatibilityGraph g = initial_graph(d);
  invalidate(g, {3, 4});
  build_partial(d, g, CompatPolicy::oneToOneOnly);
  const int added = complete_graph(d, g);
  CHECK(added == 2);
  CHECK(edge_set(g) ==
        set_union(set_union(kSurvivors, kPartialAdds), kCompleteAdds));
  // Fixpoint: a second pass finds nothing new.
  CHECK(complete_graph(d, g) == 0);
}

TEST_CASE("both policies reach the same closed graph on the crack") {
  Domain d = cracked_grid();
  CompatibilityGraph g1 = initial_graph(d);
  invalidate(g1, {3, 4});
  build_partial(d, g1, CompatPolicy::oneToOneOnly);
  complete_graph(d, g1);

  CompatibilityGraph g2 = initial_graph(d);
  invalidate(g2, {3, 4});
  build_partial(d, g2, CompatPolicy::allPairs);
  complete_graph(d, g2);
  CHECK(edge_set(g1) == edge_set(g2));
}

TEST_CASE("threaded partial rebuilds are order-identical") {
  Domain d = cracked_grid();
  CompatibilityGraph base = initial_graph(d);
  invalidate(base, {3, 4});
  for (int threads : {1, 2, 4, 8}) {
    CompatibilityGraph g = base;
    build_partial(d, g, CompatPolicy::oneToOneOnly, threads);
    CHECK(edge_set(g) == set_union(kSurvivors, kPartialAdds));
  }
}

TEST_CASE("a partial crack leaves one connected piece") {
  Domain d = cracked_grid();
  CompatibilityGraph g = initial_graph(d);
  invalidate(g, {3, 4});
  build_partial(d, g, CompatPolicy::oneToOneOnly);
  complete_graph(d, g);
  const PieceAssignment pieces = connected_pieces(d, g);
  CHECK(pieces.count == 1);
  CHECK(pieces.pieceOf.size() == 7u + 4u);
  for (const auto& [node, p] : pieces.pieceOf) CHECK(p == 0);
}

TEST_CASE("a through crack separates the grid into two pieces") {
  Domain d = make_domain(generate_uniform_grid(3, 3, 1, 3.0));
  insert_surface(d, plane_surface(Vec3(0, 1.45, 0), Vec3(0, 1, 0)));
  CompatibilityGraph g = initial_graph(d);
  invalidate(g, {3, 4, 5});
  build_partial(d, g, CompatPolicy::oneToOneOnly);
  complete_graph(d, g);
  const PieceAssignment pieces = connected_pieces(d, g);
  CHECK(pieces.count == 2);
  // The lower piece holds rows 0 and the below-fields; ids are dense in
  // first-touch (element, field) order, so piece 0 starts at element 0.
  CHECK(pieces.pieceOf.at({0, 0}) == 0);
  CHECK(pieces.pieceOf.at({3, 1}) == 0);
  CHECK(pieces.pieceOf.at({3, 2}) == 1);
  CHECK(pieces.pieceOf.at({6, 0}) == 1);
  CHECK(pieces.pieceOf.at({7, 0}) == 1);
}

TEST_CASE("unlinked twin surfaces keep pieces apart under the guarantee") {
  // Both elements carry the same geometric plane from *different* surfaces
  // with no links between them. The strict policy refuses every pair whose
  // crossing enrichment is unlinked, so each element keeps private halves.
  // The relaxed policy has no ancestor constraints to apply and glues all
  // touching pairs -- including the ones across the crack. That is exactly
  // the failure mode the strict guarantee exists to prevent.
  Domain d = make_domain(generate_uniform_grid(2, 1, 1, 2.0));
  insert_surface(d, plane_surface(Vec3(0, 0.9, 0), Vec3(0, 1, 0)),
                 [](const Vec3& x) { return x[0] < 1.0; });
  insert_surface(d, plane_surface(Vec3(0, 0.9, 0), Vec3(0, 1, 0)),
                 [](const Vec3& x) { return x[0] > 1.0; });

  CompatibilityGraph strict = initial_graph(d);
  invalidate(strict, {0, 1});
  build_partial(d, strict, CompatPolicy::oneToOneOnly);
  complete_graph(d, strict);
  CHECK(connected_pieces(d, strict).count == 4);

  CompatibilityGraph relaxed = initial_graph(d);
  invalidate(relaxed, {0, 1});
  build_partial(d, relaxed, CompatPolicy::allPairs);
  complete_graph(d, relaxed);
  CHECK(connected_pieces(d, relaxed).count == 1);
}

TEST_CASE("merged growth restores compatibility across surfaces") {
  Domain d = make_domain(generate_uniform_grid(3, 1, 1, 3.0));
  insert_surface(d, plane_surface(Vec3(0, 0.45, 0), Vec3(0, 1, 0)),
                 [](const Vec3& x) { return x[0] < 1.0; });
  insert_surface(d, plane_surface(Vec3(0, 0.45, 0), Vec3(0, 1, 0)),
                 [](const Vec3& x) { return x[0] > 2.0; });
  const GrowthReport rep =
      advance_front(d, 0, constant_normal(Vec3(0, 1, 0)), 50);
  REQUIRE(rep.merges == 1);

  CompatibilityGraph g = initial_graph(d);
  invalidate(g, {0, 1, 2});
  build_partial(d, g, CompatPolicy::oneToOneOnly);
  complete_graph(d, g);
  const PieceAssignment pieces = connected_pieces(d, g);
  CHECK(pieces.count == 2);
  CHECK(pieces.pieceOf.at({0, 1}) == pieces.pieceOf.at({2, 1}));
  CHECK(pieces.pieceOf.at({0, 2}) == pieces.pieceOf.at({2, 2}));
}

TEST_CASE("graph json lists nodes with sorted neighbors") {
  Domain d = make_domain(generate_uniform_grid(2, 1, 1, 2.0));
  CompatibilityGraph g = initial_graph(d);
  const auto j = graph_to_json(g);
  REQUIRE(j.contains("0:0"));
  REQUIRE(j.contains("1:0"));
  CHECK(j["0:0"].size() == 1u);
  CHECK(j["0:0"][0] == "1:0");
}

TEST_CASE("policy names parse strictly") {
  CHECK(policy_from_string("allPairs") == CompatPolicy::allPairs);
  CHECK(policy_from_string("oneToOneOnly") == CompatPolicy::oneToOneOnly);
  CHECK_THROWS_AS(policy_from_string("sometimes"), ScenarioError);
}

TEST_CASE("graph editing primitives keep the adjacency symmetric") {
  CompatibilityGraph g;
  g.add_node({0, 0});
  g.add_edge({0, 0}, {1, 0});
  CHECK(g.has_node({1, 0}));
  CHECK(g.has_edge({1, 0}, {0, 0}));
  CHECK(g.edge_count() == 1);
  g.add_edge({1, 0}, {2, 1});
  g.remove_element(1);
  CHECK_FALSE(g.has_node({1, 0}));
  CHECK(g.has_node({0, 0}));
  CHECK(g.has_node({2, 1}));
  CHECK(g.edge_count() == 0);
}
