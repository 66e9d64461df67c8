#pragma once

// Core data model: normalized 2-D points, directed edges, validity-tagged
// edge tokens, fixed-capacity room sequences and floorplans.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace edgeplan {

enum class Errc {
  too_many_edges,
  degenerate_edge,
  too_few_vertices,
  too_many_rooms,
  empty_cloud,
  degenerate_bounds,
  out_of_extent,
  too_few_edges,
  empty_result,
  length_mismatch,
  capacity_mismatch,
  dimension_mismatch,
  invalid_config,
  parse_error,
  schema_violation,
  capacity_exceeded,
  io_error,
  bad_magic,
};

inline const char* to_string(Errc c) {
  switch (c) {
    case Errc::too_many_edges: return "TooManyEdges";
    case Errc::degenerate_edge: return "DegenerateEdge";
    case Errc::too_few_vertices: return "TooFewVertices";
    case Errc::too_many_rooms: return "TooManyRooms";
    case Errc::empty_cloud: return "EmptyCloud";
    case Errc::degenerate_bounds: return "DegenerateBounds";
    case Errc::out_of_extent: return "OutOfExtent";
    case Errc::too_few_edges: return "TooFewEdges";
    case Errc::empty_result: return "EmptyResult";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::capacity_mismatch: return "CapacityMismatch";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::invalid_config: return "InvalidConfig";
    case Errc::parse_error: return "ParseError";
    case Errc::schema_violation: return "SchemaViolation";
    case Errc::capacity_exceeded: return "CapacityExceeded";
    case Errc::io_error: return "IoError";
    case Errc::bad_magic: return "BadMagic";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }

inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double l1_distance(Point2 a, Point2 b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }
inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

inline bool in_unit_range(Point2 p) {
  return p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0;
}

inline Point2 clamp_unit(Point2 p) {
  auto clamp01 = [](double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); };
  return {clamp01(p.x), clamp01(p.y)};
}

// Wall segment as an ordered endpoint pair; the order encodes polygon
// traversal direction.
struct DirectedEdge {
  Point2 p1;
  Point2 p2;

  bool degenerate() const { return p1 == p2; }
  Point2 direction() const { return p2 - p1; }
  double length() const { return distance(p1, p2); }

  friend bool operator==(const DirectedEdge&, const DirectedEdge&) = default;
};

inline DirectedEdge reversed(const DirectedEdge& e) { return {e.p2, e.p1}; }

// Directed edge plus a binary validity flag. Tokens with valid == false are
// padding; their geometry is ignored by every geometric operation.
struct EdgeToken {
  DirectedEdge edge;
  bool valid = false;

  friend bool operator==(const EdgeToken&, const EdgeToken&) = default;
};

// Closed vertex loop; the last vertex connects back to the first.
struct PolygonVertices {
  std::vector<Point2> vertices;

  std::size_t size() const { return vertices.size(); }
  friend bool operator==(const PolygonVertices&, const PolygonVertices&) = default;
};

struct ModelCapacity {
  std::size_t max_rooms = 20;
  std::size_t max_edges_per_room = 40;
};

inline void check_capacity(const ModelCapacity& cap) {
  if (cap.max_rooms < 1 || cap.max_edges_per_room < 3)
    throw Error(Errc::invalid_config, "capacity requires max_rooms >= 1 and max_edges_per_room >= 3");
}

// Fixed-length token sequence for one room. Valid tokens occupy the front,
// padding fills the tail up to capacity (canonical form).
struct RoomEdgeSequence {
  std::vector<EdgeToken> tokens;
  std::size_t valid_count = 0;

  bool mock() const { return valid_count == 0; }
  std::size_t size() const { return tokens.size(); }

  friend bool operator==(const RoomEdgeSequence&, const RoomEdgeSequence&) = default;
};

struct Floorplan {
  std::vector<RoomEdgeSequence> rooms;
  std::string metadata;

  std::size_t room_capacity() const { return rooms.size(); }
  std::size_t edge_capacity() const { return rooms.empty() ? 0 : rooms.front().tokens.size(); }
};

inline RoomEdgeSequence make_room(const std::vector<DirectedEdge>& edges, const ModelCapacity& cap) {
  check_capacity(cap);
  if (edges.size() > cap.max_edges_per_room)
    throw Error(Errc::too_many_edges, std::to_string(edges.size()) + " edges exceed capacity " +
                                          std::to_string(cap.max_edges_per_room));
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (edges[i].degenerate())
      throw Error(Errc::degenerate_edge, "edge " + std::to_string(i) + " has p1 == p2");
  }
  RoomEdgeSequence room;
  room.tokens.resize(cap.max_edges_per_room);
  for (std::size_t i = 0; i < edges.size(); ++i) room.tokens[i] = {edges[i], true};
  room.valid_count = edges.size();
  return room;
}

inline RoomEdgeSequence make_mock_room(const ModelCapacity& cap) { return make_room({}, cap); }

inline Floorplan make_floorplan(std::vector<RoomEdgeSequence> rooms, const ModelCapacity& cap,
                                std::string metadata = {}) {
  check_capacity(cap);
  if (rooms.size() > cap.max_rooms)
    throw Error(Errc::too_many_rooms, std::to_string(rooms.size()) + " rooms exceed capacity " +
                                          std::to_string(cap.max_rooms));
  for (const auto& r : rooms) {
    if (r.tokens.size() != cap.max_edges_per_room)
      throw Error(Errc::capacity_mismatch, "room token count differs from capacity");
  }
  Floorplan fp;
  fp.rooms = std::move(rooms);
  fp.rooms.resize(cap.max_rooms, make_mock_room(cap));
  fp.metadata = std::move(metadata);
  return fp;
}

// Ground-truth ingestion: turn a corner loop into directed edges,
// edge i = (v_i, v_{i+1 mod k}).
inline std::vector<DirectedEdge> edges_from_vertex_loop(const PolygonVertices& loop) {
  const std::size_t k = loop.vertices.size();
  if (k < 3)
    throw Error(Errc::too_few_vertices, "vertex loop needs at least 3 vertices, got " + std::to_string(k));
  std::vector<DirectedEdge> edges;
  edges.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const Point2 a = loop.vertices[i];
    const Point2 b = loop.vertices[(i + 1) % k];
    if (distance(a, b) < 1e-12)
      throw Error(Errc::degenerate_edge, "consecutive vertices " + std::to_string(i) + " coincide");
    edges.push_back({a, b});
  }
  return edges;
}

enum class ViolationKind {
  out_of_range,
  degenerate_valid_edge,
  non_canonical_padding,
  ragged_room,
};

inline const char* to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::out_of_range: return "OutOfRange";
    case ViolationKind::degenerate_valid_edge: return "DegenerateEdge";
    case ViolationKind::non_canonical_padding: return "NonCanonicalPadding";
    case ViolationKind::ragged_room: return "RaggedRoom";
  }
  return "Unknown";
}

struct Violation {
  ViolationKind kind;
  std::size_t room = 0;
  std::size_t token = 0;
  std::string detail;
};

// Diagnostic pass; an empty result means the plan is well-formed.
inline std::vector<Violation> validate_floorplan(const Floorplan& fp) {
  std::vector<Violation> out;
  const std::size_t n = fp.edge_capacity();
  for (std::size_t m = 0; m < fp.rooms.size(); ++m) {
    const auto& room = fp.rooms[m];
    if (room.tokens.size() != n) {
      out.push_back({ViolationKind::ragged_room, m, 0,
                     "room has " + std::to_string(room.tokens.size()) + " tokens, expected " + std::to_string(n)});
      continue;
    }
    std::size_t seen_valid = 0;
    for (std::size_t i = 0; i < room.tokens.size(); ++i) {
      const auto& t = room.tokens[i];
      if (t.valid) {
        ++seen_valid;
        if (i >= room.valid_count)
          out.push_back({ViolationKind::non_canonical_padding, m, i, "valid token after padding region"});
        if (t.edge.degenerate())
          out.push_back({ViolationKind::degenerate_valid_edge, m, i, "valid edge with p1 == p2"});
        if (!in_unit_range(t.edge.p1) || !in_unit_range(t.edge.p2))
          out.push_back({ViolationKind::out_of_range, m, i, "endpoint outside [0,1]^2"});
      }
    }
    if (seen_valid != room.valid_count)
      out.push_back({ViolationKind::non_canonical_padding, m, 0,
                     "valid_count " + std::to_string(room.valid_count) + " disagrees with " +
                         std::to_string(seen_valid) + " valid tokens"});
  }
  return out;
}

// Cyclic rotation of the valid prefix; padding stays fixed at the tail.
// Position n of the result holds valid token (n + r) mod valid_count.
inline RoomEdgeSequence rotate_valid(const RoomEdgeSequence& room, std::size_t r) {
  RoomEdgeSequence out = room;
  const std::size_t vc = room.valid_count;
  if (vc == 0) return out;
  for (std::size_t n = 0; n < vc; ++n) out.tokens[n] = room.tokens[(n + r) % vc];
  return out;
}

// Reversed traversal: edge order reversed and every edge's endpoints swapped.
inline RoomEdgeSequence reverse_valid(const RoomEdgeSequence& room) {
  RoomEdgeSequence out = room;
  const std::size_t vc = room.valid_count;
  for (std::size_t n = 0; n < vc; ++n) out.tokens[n] = {reversed(room.tokens[vc - 1 - n].edge), true};
  return out;
}

inline std::vector<int> validity_labels(const RoomEdgeSequence& room) {
  std::vector<int> labels(room.tokens.size());
  for (std::size_t i = 0; i < room.tokens.size(); ++i) labels[i] = room.tokens[i].valid ? 1 : 0;
  return labels;
}

inline std::vector<DirectedEdge> valid_edges(const RoomEdgeSequence& room) {
  std::vector<DirectedEdge> edges;
  edges.reserve(room.valid_count);
  for (const auto& t : room.tokens)
    if (t.valid) edges.push_back(t.edge);
  return edges;
}

}  // namespace edgeplan
