#pragma once

// Serialization: JSON documents for floorplans, predictions and polygon
// lists; binary PGM (P5) for density maps with bounds and max-count kept in
// comment headers; whitespace ASCII x-y-z point clouds.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "edgeplan/core.hpp"
#include "edgeplan/matching.hpp"
#include "edgeplan/polygonize.hpp"
#include "edgeplan/projection.hpp"

namespace edgeplan::io {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

enum class DocumentKind { floorplan, prediction, polygons };

namespace detail {

inline json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(Errc::parse_error, path + ": " + e.what());
  }
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot open " + path + " for writing");
  out << text;
  if (!out) throw Error(Errc::io_error, "failed writing " + path);
}

inline void require(bool cond, const std::string& where, const std::string& what) {
  if (!cond) throw Error(Errc::schema_violation, where + ": " + what);
}

// shortest decimal representation that parses back to the same double
inline std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double coordinate(const json& v, const std::string& where) {
  require(v.is_number(), where, "coordinate must be a number");
  const double d = v.get<double>();
  require(d >= 0.0 && d <= 1.0, where, "OutOfRange coordinate " + v.dump());
  return d;
}

inline json common_header(DocumentKind kind) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  switch (kind) {
    case DocumentKind::floorplan: doc["kind"] = "floorplan"; break;
    case DocumentKind::prediction: doc["kind"] = "prediction"; break;
    case DocumentKind::polygons: doc["kind"] = "polygons"; break;
  }
  return doc;
}

inline void check_header(const json& doc, const std::string& path) {
  require(doc.is_object(), path, "document root must be an object");
  require(doc.contains("schema_version") && doc["schema_version"].is_number_integer(), path,
          "missing schema_version");
  require(doc["schema_version"].get<int>() == kSchemaVersion, path,
          "unsupported schema_version " + doc["schema_version"].dump());
  require(doc.contains("kind") && doc["kind"].is_string(), path, "missing kind");
}

inline ModelCapacity read_capacity(const json& doc, const std::string& path) {
  require(doc.contains("capacity") && doc["capacity"].is_object(), path, "missing capacity");
  const auto& cap = doc["capacity"];
  require(cap.contains("rooms") && cap["rooms"].is_number_unsigned(), path, "capacity.rooms");
  require(cap.contains("edges_per_room") && cap["edges_per_room"].is_number_unsigned(), path,
          "capacity.edges_per_room");
  return {cap["rooms"].get<std::size_t>(), cap["edges_per_room"].get<std::size_t>()};
}

}  // namespace detail

inline DocumentKind peek_kind(const std::string& path) {
  const json doc = detail::parse_file(path);
  detail::check_header(doc, path);
  const std::string kind = doc["kind"].get<std::string>();
  if (kind == "floorplan") return DocumentKind::floorplan;
  if (kind == "prediction") return DocumentKind::prediction;
  if (kind == "polygons") return DocumentKind::polygons;
  throw Error(Errc::schema_violation, path + ": unknown kind '" + kind + "'");
}

// Floorplan documents store each room's valid prefix as [x1, y1, x2, y2, valid]
// records; padding and trailing mock rooms are implied by the capacity.
inline void save_floorplan(const Floorplan& fp, const std::string& path) {
  json doc = detail::common_header(DocumentKind::floorplan);
  doc["capacity"] = {{"rooms", fp.room_capacity()}, {"edges_per_room", fp.edge_capacity()}};
  doc["metadata"] = {{"scene", fp.metadata}};
  json rooms = json::array();
  std::size_t last_real = 0;
  for (std::size_t m = 0; m < fp.rooms.size(); ++m)
    if (!fp.rooms[m].mock()) last_real = m + 1;
  for (std::size_t m = 0; m < last_real; ++m) {
    json room = json::array();
    for (std::size_t n = 0; n < fp.rooms[m].valid_count; ++n) {
      const auto& e = fp.rooms[m].tokens[n].edge;
      room.push_back({e.p1.x, e.p1.y, e.p2.x, e.p2.y, 1});
    }
    rooms.push_back(std::move(room));
  }
  doc["rooms"] = std::move(rooms);
  detail::write_file(path, doc.dump(2) + "\n");
}

inline Floorplan load_floorplan(const std::string& path) {
  const json doc = detail::parse_file(path);
  detail::check_header(doc, path);
  detail::require(doc["kind"] == "floorplan", path, "expected kind 'floorplan'");
  const ModelCapacity cap = detail::read_capacity(doc, path);
  check_capacity(cap);
  detail::require(doc.contains("rooms") && doc["rooms"].is_array(), path, "missing rooms array");
  const auto& rooms_json = doc["rooms"];
  if (rooms_json.size() > cap.max_rooms)
    throw Error(Errc::capacity_exceeded, path + ": " + std::to_string(rooms_json.size()) +
                                             " rooms exceed capacity " + std::to_string(cap.max_rooms));
  std::vector<RoomEdgeSequence> rooms;
  for (std::size_t m = 0; m < rooms_json.size(); ++m) {
    const std::string where = path + ": rooms[" + std::to_string(m) + "]";
    detail::require(rooms_json[m].is_array(), where, "room must be an array of edge records");
    if (rooms_json[m].size() > cap.max_edges_per_room)
      throw Error(Errc::capacity_exceeded,
                  where + ": " + std::to_string(rooms_json[m].size()) + " edges exceed capacity " +
                      std::to_string(cap.max_edges_per_room));
    std::vector<DirectedEdge> edges;
    for (std::size_t n = 0; n < rooms_json[m].size(); ++n) {
      const auto& rec = rooms_json[m][n];
      const std::string at = where + "[" + std::to_string(n) + "]";
      detail::require(rec.is_array() && rec.size() == 5, at, "edge record must be [x1,y1,x2,y2,valid]");
      detail::require(rec[4].is_number_integer() && (rec[4] == 0 || rec[4] == 1), at,
                      "valid flag must be 0 or 1");
      if (rec[4] == 0) continue;  // stored padding is legal but carries nothing
      edges.push_back({{detail::coordinate(rec[0], at), detail::coordinate(rec[1], at)},
                       {detail::coordinate(rec[2], at), detail::coordinate(rec[3], at)}});
    }
    try {
      rooms.push_back(make_room(edges, cap));
    } catch (const Error& e) {
      throw Error(Errc::schema_violation, where + ": " + e.what());
    }
  }
  std::string scene;
  if (doc.contains("metadata") && doc["metadata"].is_object() && doc["metadata"].contains("scene"))
    scene = doc["metadata"]["scene"].get<std::string>();
  return make_floorplan(std::move(rooms), cap, scene);
}

// Prediction documents store every token slot as [x1, y1, x2, y2, confidence];
// an optional "groups" field marks concatenated aligned copies.
inline void save_prediction(const PredictionSet& pred, const std::string& path, std::size_t groups = 1) {
  json doc = detail::common_header(DocumentKind::prediction);
  const std::size_t rooms_per_group = groups > 0 ? pred.rooms.size() / groups : pred.rooms.size();
  doc["capacity"] = {{"rooms", rooms_per_group}, {"edges_per_room", pred.edge_capacity()}};
  doc["groups"] = groups;
  doc["metadata"] = {{"scene", pred.metadata}};
  json rooms = json::array();
  for (const auto& room : pred.rooms) {
    json r = json::array();
    for (const auto& t : room.tokens)
      r.push_back({t.edge.p1.x, t.edge.p1.y, t.edge.p2.x, t.edge.p2.y, t.confidence});
    rooms.push_back(std::move(r));
  }
  doc["rooms"] = std::move(rooms);
  detail::write_file(path, doc.dump(2) + "\n");
}

inline PredictionSet load_prediction(const std::string& path, std::size_t* groups_out = nullptr) {
  const json doc = detail::parse_file(path);
  detail::check_header(doc, path);
  detail::require(doc["kind"] == "prediction", path, "expected kind 'prediction'");
  const ModelCapacity cap = detail::read_capacity(doc, path);
  std::size_t groups = 1;
  if (doc.contains("groups")) {
    detail::require(doc["groups"].is_number_unsigned() && doc["groups"].get<std::size_t>() >= 1, path,
                    "groups must be a positive integer");
    groups = doc["groups"].get<std::size_t>();
  }
  detail::require(doc.contains("rooms") && doc["rooms"].is_array(), path, "missing rooms array");
  const auto& rooms_json = doc["rooms"];
  if (rooms_json.size() > groups * cap.max_rooms)
    throw Error(Errc::capacity_exceeded, path + ": room count exceeds groups * capacity");

  PredictionSet pred;
  for (std::size_t m = 0; m < rooms_json.size(); ++m) {
    const std::string where = path + ": rooms[" + std::to_string(m) + "]";
    detail::require(rooms_json[m].is_array(), where, "room must be an array of token records");
    if (rooms_json[m].size() > cap.max_edges_per_room)
      throw Error(Errc::capacity_exceeded, where + ": edge count exceeds capacity");
    PredictedRoom room;
    room.tokens.resize(cap.max_edges_per_room);
    for (std::size_t n = 0; n < rooms_json[m].size(); ++n) {
      const auto& rec = rooms_json[m][n];
      const std::string at = where + "[" + std::to_string(n) + "]";
      detail::require(rec.is_array() && rec.size() == 5, at,
                      "token record must be [x1,y1,x2,y2,confidence]");
      detail::require(rec[4].is_number(), at, "confidence must be a number");
      const double conf = rec[4].get<double>();
      detail::require(conf >= 0.0 && conf <= 1.0, at, "OutOfRange confidence " + rec[4].dump());
      room.tokens[n] = {conf,
                        {{detail::coordinate(rec[0], at), detail::coordinate(rec[1], at)},
                         {detail::coordinate(rec[2], at), detail::coordinate(rec[3], at)}}};
    }
    pred.rooms.push_back(std::move(room));
  }
  // pad to full group capacity with zero-confidence tokens
  PredictedRoom blank;
  blank.tokens.resize(cap.max_edges_per_room);
  pred.rooms.resize(groups * cap.max_rooms, blank);
  if (doc.contains("metadata") && doc["metadata"].is_object() && doc["metadata"].contains("scene"))
    pred.metadata = doc["metadata"]["scene"].get<std::string>();
  if (groups_out) *groups_out = groups;
  return pred;
}

inline void save_polygons(const std::vector<PolygonVertices>& polys, const std::string& path,
                          const std::string& scene = {}) {
  json doc = detail::common_header(DocumentKind::polygons);
  doc["metadata"] = {{"scene", scene}};
  json arr = json::array();
  for (const auto& poly : polys) {
    json p = json::array();
    for (const auto& v : poly.vertices) p.push_back({v.x, v.y});
    arr.push_back(std::move(p));
  }
  doc["polygons"] = std::move(arr);
  detail::write_file(path, doc.dump(2) + "\n");
}

inline std::vector<PolygonVertices> load_polygons(const std::string& path) {
  const json doc = detail::parse_file(path);
  detail::check_header(doc, path);
  detail::require(doc["kind"] == "polygons", path, "expected kind 'polygons'");
  detail::require(doc.contains("polygons") && doc["polygons"].is_array(), path, "missing polygons array");
  std::vector<PolygonVertices> out;
  for (std::size_t p = 0; p < doc["polygons"].size(); ++p) {
    const auto& pj = doc["polygons"][p];
    const std::string where = path + ": polygons[" + std::to_string(p) + "]";
    detail::require(pj.is_array() && pj.size() >= 3, where, "polygon needs >= 3 vertices");
    PolygonVertices poly;
    for (std::size_t v = 0; v < pj.size(); ++v) {
      const auto& vj = pj[v];
      detail::require(vj.is_array() && vj.size() == 2, where, "vertex must be [x, y]");
      poly.vertices.push_back(
          {detail::coordinate(vj[0], where), detail::coordinate(vj[1], where)});
    }
    out.push_back(std::move(poly));
  }
  return out;
}

// Polygon lists for any loadable document: polygons pass through, floorplans
// and thresholded predictions go through edge-to-polygon conversion.
inline std::vector<PolygonVertices> load_as_polygons(const std::string& path, double eps,
                                                     double confidence_min = kDefaultConfidenceMin,
                                                     std::vector<std::string>* warnings = nullptr) {
  switch (peek_kind(path)) {
    case DocumentKind::polygons: return load_polygons(path);
    case DocumentKind::floorplan: return floorplan_to_polygons(load_floorplan(path), eps, warnings);
    case DocumentKind::prediction:
      return floorplan_to_polygons(as_floorplan(load_prediction(path), confidence_min), eps, warnings);
  }
  throw Error(Errc::schema_violation, path + ": unsupported document kind");
}

// --- density maps ----------------------------------------------------------

inline void write_density_pgm(const DensityMap& map, const std::string& path) {
  std::ostringstream out;
  out << "P5\n";
  out << "# bounds " << detail::format_number(map.bounds.min_x) << ' '
      << detail::format_number(map.bounds.min_y) << ' ' << detail::format_number(map.bounds.max_x)
      << ' ' << detail::format_number(map.bounds.max_y) << "\n";
  out << "# max_count " << detail::format_number(map.max_count) << "\n";
  out << map.width << ' ' << map.height << "\n255\n";
  std::string bytes;
  bytes.reserve(map.values.size());
  for (double v : map.values) {
    if (v < 0.0 || v > 1.0) throw Error(Errc::schema_violation, "density value outside [0,1]");
    bytes.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
  }
  detail::write_file(path, out.str() + bytes);
}

inline DensityMap read_density_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5") throw Error(Errc::bad_magic, path + ": expected P5, got '" + magic + "'");

  DensityMap map;
  bool have_bounds = false;
  std::vector<std::size_t> dims;
  in.get();  // consume separator after magic
  while (dims.size() < 3) {
    if (in.peek() == '#') {
      std::string line;
      std::getline(in, line);
      std::istringstream ls(line.substr(1));
      std::string tag;
      ls >> tag;
      if (tag == "bounds") {
        ls >> map.bounds.min_x >> map.bounds.min_y >> map.bounds.max_x >> map.bounds.max_y;
        have_bounds = !ls.fail();
      } else if (tag == "max_count") {
        ls >> map.max_count;
      }
      continue;
    }
    std::size_t v = 0;
    if (!(in >> v)) throw Error(Errc::parse_error, path + ": malformed PGM header");
    dims.push_back(v);
    in.get();  // single whitespace after each header token
    while (in.peek() == '#' && dims.size() < 3) {
      std::string line;
      std::getline(in, line);
    }
  }
  if (dims[2] != 255) throw Error(Errc::parse_error, path + ": expected maxval 255");
  map.width = dims[0];
  map.height = dims[1];
  if (!have_bounds) map.bounds = {0.0, 0.0, 1.0, 1.0};

  std::string bytes(map.width * map.height, '\0');
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
    throw Error(Errc::parse_error, path + ": truncated pixel data");
  map.values.resize(bytes.size());
  map.counts.resize(bytes.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    map.values[i] = static_cast<double>(static_cast<unsigned char>(bytes[i])) / 255.0;
    map.counts[i] = map.max_count > 0.0
                        ? static_cast<std::uint32_t>(std::lround(map.values[i] * map.max_count))
                        : 0;
  }
  return map;
}

// --- point clouds -----------------------------------------------------------

inline PointCloud read_xyz(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open " + path);
  PointCloud cloud;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    Point3 p;
    if (!(ls >> p.x >> p.y >> p.z))
      throw Error(Errc::parse_error, path + ":" + std::to_string(lineno) + ": expected 'x y z'");
    std::string rest;
    if (ls >> rest)
      throw Error(Errc::parse_error,
                  path + ":" + std::to_string(lineno) + ": trailing content '" + rest + "'");
    cloud.points.push_back(p);
  }
  return cloud;
}

}  // namespace edgeplan::io
