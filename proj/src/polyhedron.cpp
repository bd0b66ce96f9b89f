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

#include "hhe/polyhedron.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace hhe {

namespace {

using Key = std::array<double, 3>;

Key key_of(const Vec3& p) { return {p[0], p[1], p[2]}; }

double fan_det(const Vec3& a, const Vec3& b, const Vec3& c) {
  return a.dot(b.cross(c));
}

}  // namespace

double polygon_area(const Polygon& poly) {
  const size_t n = poly.vertices.size();
  if (n < 3) return 0.0;
  Vec3 s = Vec3::Zero();
  const Vec3& v0 = poly.vertices[0];
  for (size_t i = 1; i + 1 < n; ++i)
    s += (poly.vertices[i] - v0).cross(poly.vertices[i + 1] - v0);
  return 0.5 * s.norm();
}

Vec3 polygon_centroid(const Polygon& poly) {
  Vec3 c = Vec3::Zero();
  for (const Vec3& v : poly.vertices) c += v;
  return c / (double)poly.vertices.size();
}

double polyhedron_volume(const std::vector<Polygon>& boundary) {
  double vol = 0.0;
  for (const Polygon& poly : boundary) {
    const size_t n = poly.vertices.size();
    if (n < 3) continue;
    const Vec3 c = polygon_centroid(poly);
    for (size_t i = 0; i < n; ++i)
      vol += fan_det(c, poly.vertices[i], poly.vertices[(i + 1) % n]) / 6.0;
  }
  return vol;
}

Vec3 polyhedron_centroid(const std::vector<Polygon>& boundary) {
  double vol = 0.0;
  Vec3 moment = Vec3::Zero();
  for (const Polygon& poly : boundary) {
    const size_t n = poly.vertices.size();
    if (n < 3) continue;
    const Vec3 c = polygon_centroid(poly);
    for (size_t i = 0; i < n; ++i) {
      const Vec3& a = poly.vertices[i];
      const Vec3& b = poly.vertices[(i + 1) % n];
      const double v = fan_det(c, a, b) / 6.0;
      vol += v;
      moment += v * (c + a + b) / 4.0;  // tet centroid with the origin apex
    }
  }
  if (std::abs(vol) < 1e-300) return Vec3::Zero();
  return moment / vol;
}

namespace {

struct Crossing {
  Vec3 point;
  int edgeIndex;   // polygon edge it sits on
  bool entersNeg;  // walking the polygon: sign goes + -> -
};

// One polygon's split into negative/positive sub-polygons plus the directed
// chords (negEntry -> negExit reversed: chords run from the crossing where
// the walk leaves the negative side to the one where it enters).
struct PolygonSplit {
  std::vector<Polygon> negative;
  std::vector<Polygon> positive;
  std::vector<std::pair<Vec3, Vec3>> chords;  // directed np -> pn
};

Vec3 edge_root(const Vec3& a, double fa, const Vec3& b, double fb) {
  // Canonical orientation so both polygons sharing the edge agree bitwise.
  const Key ka = key_of(a), kb = key_of(b);
  if (kb < ka) return edge_root(b, fb, a, fa);
  const double t = fa / (fa - fb);
  return a + t * (b - a);
}

PolygonSplit split_polygon(const Polygon& poly, const std::vector<double>& f,
                           const std::function<double(const Vec3&)>& level) {
  const size_t n = poly.vertices.size();
  std::vector<int> sign(n);
  for (size_t i = 0; i < n; ++i) sign[i] = f[i] > 0 ? 1 : -1;

  PolygonSplit out;
  const bool anyNeg = std::any_of(sign.begin(), sign.end(), [](int s) { return s < 0; });
  const bool anyPos = std::any_of(sign.begin(), sign.end(), [](int s) { return s > 0; });
  if (!anyPos) {
    out.negative.push_back(poly);
    return out;
  }
  if (!anyNeg) {
    out.positive.push_back(poly);
    return out;
  }

  std::vector<Crossing> crossings;
  for (size_t i = 0; i < n; ++i) {
    const size_t j = (i + 1) % n;
    if (sign[i] != sign[j]) {
      Crossing c;
      c.point = edge_root(poly.vertices[i], f[i], poly.vertices[j], f[j]);
      c.edgeIndex = (int)i;
      c.entersNeg = sign[i] > 0;
      crossings.push_back(c);
    }
  }

  std::vector<int> nps, pns;  // crossing indices by type
  for (size_t k = 0; k < crossings.size(); ++k)
    (crossings[k].entersNeg ? pns : nps).push_back((int)k);
  if (nps.size() != pns.size() || nps.empty())
    throw Error("polygon cut produced unbalanced crossings");

  // Pair each negative->positive crossing with a positive->negative one;
  // with multiple choices pick the pairing whose chord midpoints sit closest
  // to the zero set.
  std::vector<int> best(pns.size());
  std::iota(best.begin(), best.end(), 0);
  if (nps.size() > 1) {
    if (nps.size() > 6) throw Error("polygon cut too tangled");
    std::vector<int> perm(best);
    double bestCost = 1e300;
    std::sort(perm.begin(), perm.end());
    std::vector<int> chosen;
    do {
      double cost = 0;
      for (size_t k = 0; k < nps.size(); ++k) {
        const Vec3 mid =
            0.5 * (crossings[nps[k]].point + crossings[pns[perm[k]]].point);
        cost += std::abs(level(mid));
      }
      if (cost < bestCost) {
        bestCost = cost;
        chosen = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    best = chosen;
  }
  std::map<int, int> chordTo;  // np crossing index -> pn crossing index
  for (size_t k = 0; k < nps.size(); ++k) chordTo[nps[k]] = pns[best[k]];
  for (const auto& [np, pn] : chordTo)
    out.chords.push_back({crossings[np].point, crossings[pn].point});

  // Boundary runs on one side: entering crossing, vertices, exiting crossing,
  // with per-segment element-edge tags.
  struct Run {
    std::vector<Vec3> verts;
    std::vector<int> tags;
    int exitCrossing;
  };
  auto collect_runs = [&](bool negSide) {
    std::map<Key, Run> byEntry;  // keyed by entering crossing point
    for (size_t k = 0; k < crossings.size(); ++k) {
      if (crossings[k].entersNeg != negSide) continue;
      Run run;
      run.verts.push_back(crossings[k].point);
      run.tags.push_back(poly.edgeTags[crossings[k].edgeIndex]);
      size_t i = (crossings[k].edgeIndex + 1) % n;
      while (true) {
        run.verts.push_back(poly.vertices[i]);
        // find a crossing on edge i (at most one)
        int exit = -1;
        for (size_t m = 0; m < crossings.size(); ++m)
          if (crossings[m].edgeIndex == (int)i) exit = (int)m;
        if (exit >= 0) {
          run.tags.push_back(poly.edgeTags[i]);
          run.exitCrossing = exit;
          break;
        }
        run.tags.push_back(poly.edgeTags[i]);
        i = (i + 1) % n;
      }
      byEntry[key_of(crossings[k].point)] = std::move(run);
    }
    return byEntry;
  };

  auto assemble = [&](bool negSide) {
    auto runs = collect_runs(negSide);
    std::vector<Polygon> polys;
    std::set<Key> used;
    for (auto& [entryKey, firstRun] : runs) {
      if (used.count(entryKey)) continue;
      Polygon sub;
      sub.originFace = poly.originFace;
      sub.originEnrichment = poly.originEnrichment;
      Key cursor = entryKey;
      while (!used.count(cursor)) {
        used.insert(cursor);
        const Run& run = runs.at(cursor);
        for (size_t i = 0; i < run.verts.size(); ++i) {
          sub.vertices.push_back(run.verts[i]);
          sub.edgeTags.push_back(i + 1 < run.verts.size() ? run.tags[i] : -1);
        }
        // jump along the chord to the next entering crossing
        const int exit = run.exitCrossing;
        int next = negSide ? chordTo.at(exit) : -1;
        if (!negSide) {
          for (const auto& [np, pn] : chordTo)
            if (pn == exit) next = np;
        }
        // the exit crossing itself starts the chord; append it
        sub.vertices.push_back(crossings[exit].point);
        sub.edgeTags.push_back(-1);  // chord segment
        cursor = key_of(crossings[next].point);
      }
      // last chord closes back to the first entry crossing; drop the
      // duplicated entry vertex if the chain re-appended it
      polys.push_back(std::move(sub));
    }
    return polys;
  };

  out.negative = assemble(true);
  out.positive = assemble(false);
  return out;
}

}  // namespace

void split_single_polygon(const Polygon& poly,
                          const std::function<double(const Vec3&)>& level,
                          std::vector<Polygon>& negOut,
                          std::vector<Polygon>& posOut) {
  std::vector<double> f(poly.vertices.size());
  for (size_t i = 0; i < poly.vertices.size(); ++i) f[i] = level(poly.vertices[i]);
  PolygonSplit split = split_polygon(poly, f, level);
  for (auto& p : split.negative) negOut.push_back(std::move(p));
  for (auto& p : split.positive) posOut.push_back(std::move(p));
}

PolyhedronCut cut_polyhedron(const std::vector<Polygon>& boundary,
                             const std::function<double(const Vec3&)>& level,
                             int enrichmentId) {
  PolyhedronCut result;
  std::vector<std::pair<Vec3, Vec3>> chords;
  for (const Polygon& poly : boundary) {
    std::vector<double> f(poly.vertices.size());
    for (size_t i = 0; i < poly.vertices.size(); ++i) f[i] = level(poly.vertices[i]);
    PolygonSplit split = split_polygon(poly, f, level);
    for (auto& p : split.negative) result.negative.push_back(std::move(p));
    for (auto& p : split.positive) result.positive.push_back(std::move(p));
    for (auto& c : split.chords) chords.push_back(std::move(c));
  }
  result.crossed = !chords.empty();
  if (!result.crossed) return result;

  // Chain directed chords into closed loops; each crossing point is the head
  // of exactly one chord and the tail of exactly one.
  std::map<Key, std::pair<Vec3, bool>> nextOf;  // tail -> (head, consumed)
  for (const auto& [from, to] : chords) {
    if (!nextOf.emplace(key_of(from), std::make_pair(to, false)).second)
      throw Error("cut surface chords do not chain");
  }
  for (auto& [startKey, startEntry] : nextOf) {
    if (startEntry.second) continue;
    Polygon loop;
    loop.originEnrichment = enrichmentId;
    Key cursor = startKey;
    while (true) {
      auto it = nextOf.find(cursor);
      if (it == nextOf.end()) throw Error("cut surface chords do not chain");
      if (it->second.second) break;
      it->second.second = true;
      loop.vertices.emplace_back(cursor[0], cursor[1], cursor[2]);
      loop.edgeTags.push_back(-1);
      cursor = key_of(it->second.first);
    }
    // As chained, the loop's right-hand normal points into the negative
    // side: reverse it for the negative child's outward boundary and keep it
    // as-is for the positive child.
    Polygon reversed = loop;
    std::reverse(reversed.vertices.begin(), reversed.vertices.end());
    result.negative.push_back(std::move(reversed));
    result.positive.push_back(std::move(loop));
  }
  return result;
}

std::vector<TetCell> tetrahedralize(const std::vector<Polygon>& boundary,
                                    double refVolume) {
  const double total = polyhedron_volume(boundary);
  if (std::abs(total) < 1e-12 * refVolume) throw NumericalError("sliver field");

  std::vector<Vec3> apexCandidates;
  apexCandidates.push_back(polyhedron_centroid(boundary));
  {
    Vec3 mean = Vec3::Zero();
    int count = 0;
    for (const Polygon& p : boundary)
      for (const Vec3& v : p.vertices) {
        mean += v;
        ++count;
      }
    if (count > 0) apexCandidates.push_back(mean / count);
  }
  for (const Polygon& p : boundary)
    for (const Vec3& v : p.vertices) apexCandidates.push_back(v);
  for (const Polygon& p : boundary) apexCandidates.push_back(polygon_centroid(p));

  const double dropTol = 1e-14 * refVolume;
  const double negTol = 1e-12 * refVolume;
  for (const Vec3& apex : apexCandidates) {
    std::vector<TetCell> cells;
    bool ok = true;
    for (const Polygon& poly : boundary) {
      const size_t n = poly.vertices.size();
      if (n < 3) continue;
      const Vec3 c = polygon_centroid(poly);
      for (size_t i = 0; i < n && ok; ++i) {
        const Vec3& a = poly.vertices[i];
        const Vec3& b = poly.vertices[(i + 1) % n];
        const double vol = (c - apex).cross(a - apex).dot(b - apex) / 6.0;
        if (vol < -negTol) {
          ok = false;
        } else if (vol > dropTol) {
          cells.push_back({{apex, c, a, b}, vol});
        }
      }
      if (!ok) break;
    }
    if (ok && !cells.empty()) return cells;
  }
  throw NumericalError("tetrahedralization failed for non-star-shaped field");
}

}  // namespace hhe
