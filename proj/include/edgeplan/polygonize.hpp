#pragma once

// Edge-to-polygon conversion. Consecutive directed edges are resolved into
// shared vertices by intersecting their supporting lines; pairs whose
// intersection falls too far outside both segments are bridged endpoint to
// endpoint so the loop stays connected.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "edgeplan/core.hpp"

namespace edgeplan {

inline constexpr double kParallelCrossTol = 1e-12;
inline constexpr double kVertexMergeTol = 1e-9;
inline constexpr double kDefaultPolygonEps = 0.1;

enum class IntersectionKind { type_i, type_ii, type_iii, type_iv, parallel };

inline const char* to_string(IntersectionKind k) {
  switch (k) {
    case IntersectionKind::type_i: return "TypeI";
    case IntersectionKind::type_ii: return "TypeII";
    case IntersectionKind::type_iii: return "TypeIII";
    case IntersectionKind::type_iv: return "TypeIV";
    case IntersectionKind::parallel: return "Parallel";
  }
  return "Unknown";
}

struct IntersectionOutcome {
  IntersectionKind kind = IntersectionKind::type_iv;
  Point2 vertex[2];
  std::size_t vertex_count = 0;
};

// Line parameters (t1, t2) of the supporting-line intersection, where t in
// [0,1] means the point lies on the segment. Empty when the directions are
// parallel within kParallelCrossTol.
inline std::optional<std::pair<double, double>> line_parameters(const DirectedEdge& e1,
                                                                const DirectedEdge& e2) {
  const Point2 d1 = e1.direction();
  const Point2 d2 = e2.direction();
  const double denom = cross(d1, d2);
  if (std::abs(denom) < kParallelCrossTol) return std::nullopt;
  const Point2 offset = e2.p1 - e1.p1;
  return std::make_pair(cross(offset, d2) / denom, cross(offset, d1) / denom);
}

inline std::optional<Point2> line_intersection(const DirectedEdge& e1, const DirectedEdge& e2) {
  const auto params = line_parameters(e1, e2);
  if (!params) return std::nullopt;
  return e1.p1 + params->first * e1.direction();
}

// Classification of a consecutive edge pair with slack eps, measured as a
// fraction of each edge's own length:
//   Type I   both parameters on-segment (shared corner or crossing);
//   Type II  one parameter within the slack extension of its segment;
//   Type III both parameters within the slack extension (short mutual gap);
//   Type IV  no usable intersection; bridge e1's end to e2's start.
// Types I-III contribute the intersection point; Parallel covers collinear
// continuation where the bridge collapses to the shared endpoint.
inline IntersectionOutcome classify_intersection(const DirectedEdge& e1, const DirectedEdge& e2,
                                                 double eps) {
  if (e1.degenerate() || e2.degenerate())
    throw Error(Errc::degenerate_edge, "cannot classify a degenerate edge");
  if (eps < 0.0) throw Error(Errc::invalid_config, "eps must be >= 0");

  IntersectionOutcome out;
  const auto params = line_parameters(e1, e2);
  if (!params) {
    if (distance(e1.p2, e2.p1) < kVertexMergeTol) {
      out.kind = IntersectionKind::parallel;
      out.vertex[0] = e1.p2;
      out.vertex_count = 1;
    } else {
      out.kind = IntersectionKind::type_iv;
      out.vertex[0] = e1.p2;
      out.vertex[1] = e2.p1;
      out.vertex_count = 2;
    }
    return out;
  }

  const auto [t1, t2] = *params;
  const auto within_slack = [eps](double t) { return t >= -eps && t <= 1.0 + eps; };
  if (!within_slack(t1) || !within_slack(t2)) {
    out.kind = IntersectionKind::type_iv;
    out.vertex[0] = e1.p2;
    out.vertex[1] = e2.p1;
    out.vertex_count = 2;
    return out;
  }

  const bool on1 = t1 >= 0.0 && t1 <= 1.0;
  const bool on2 = t2 >= 0.0 && t2 <= 1.0;
  out.kind = (on1 && on2)   ? IntersectionKind::type_i
             : (!on1 && !on2) ? IntersectionKind::type_iii
                              : IntersectionKind::type_ii;
  out.vertex[0] = e1.p1 + t1 * e1.direction();
  out.vertex_count = 1;
  return out;
}

namespace detail {

inline std::vector<Point2> merge_consecutive(std::vector<Point2> verts) {
  std::vector<Point2> merged;
  merged.reserve(verts.size());
  for (const auto& v : verts) {
    if (merged.empty() || distance(merged.back(), v) >= kVertexMergeTol) merged.push_back(v);
  }
  while (merged.size() > 1 && distance(merged.front(), merged.back()) < kVertexMergeTol)
    merged.pop_back();
  return merged;
}

}  // namespace detail

// Deterministic conversion of a room's valid edges into a closed polygon.
// Consecutive pairs (including last-with-first) each contribute one or two
// vertices; consecutive duplicates are merged.
inline PolygonVertices edges_to_polygon(const RoomEdgeSequence& room, double eps = kDefaultPolygonEps) {
  const auto edges = valid_edges(room);
  if (edges.size() < 2)
    throw Error(Errc::too_few_edges, "polygonization needs at least 2 valid edges, got " +
                                         std::to_string(edges.size()));
  std::vector<Point2> verts;
  verts.reserve(2 * edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto outcome = classify_intersection(edges[i], edges[(i + 1) % edges.size()], eps);
    for (std::size_t k = 0; k < outcome.vertex_count; ++k) verts.push_back(outcome.vertex[k]);
  }
  auto merged = detail::merge_consecutive(std::move(verts));
  if (merged.size() < 3)
    throw Error(Errc::empty_result, "polygon collapsed to " + std::to_string(merged.size()) + " vertices");
  return PolygonVertices{std::move(merged)};
}

// Per-room conversion over a whole plan. Mock rooms are skipped; rooms that
// fail to polygonize are skipped with a warning.
inline std::vector<PolygonVertices> floorplan_to_polygons(const Floorplan& fp,
                                                          double eps = kDefaultPolygonEps,
                                                          std::vector<std::string>* warnings = nullptr) {
  std::vector<PolygonVertices> polys;
  for (std::size_t m = 0; m < fp.rooms.size(); ++m) {
    const auto& room = fp.rooms[m];
    if (room.mock()) continue;
    if (room.valid_count < 2) {
      if (warnings) warnings->push_back("room " + std::to_string(m) + ": too few valid edges, skipped");
      continue;
    }
    try {
      polys.push_back(edges_to_polygon(room, eps));
    } catch (const Error& e) {
      if (warnings) warnings->push_back("room " + std::to_string(m) + ": " + e.what() + ", skipped");
    }
  }
  return polys;
}

}  // namespace edgeplan
