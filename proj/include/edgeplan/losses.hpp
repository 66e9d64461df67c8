#pragma once

// Forward evaluation of the supervision terms: binary cross-entropy over
// validity, L1 endpoint regression, and a Dice overlap term on scanline
// rasterized polygon masks. Values only; nothing here is differentiable.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "edgeplan/core.hpp"
#include "edgeplan/matching.hpp"
#include "edgeplan/polygonize.hpp"

namespace edgeplan {

inline constexpr double kConfidenceClamp = 1e-7;
inline constexpr std::size_t kDefaultRasterResolution = 256;

struct RasterMask {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> occupancy;  // row-major, {0,1}

  bool at(std::size_t x, std::size_t y) const { return occupancy[y * width + x] != 0; }
  std::size_t count() const {
    std::size_t n = 0;
    for (auto v : occupancy) n += v;
    return n;
  }
};

struct LossWeights {
  double cls = 0.6;
  double edge = 6.0;
  double ras = 1.0;
  double cls_dn = 0.6;
  double edge_dn = 6.0;
};

struct LossBreakdown {
  double cls = 0.0;
  double edge = 0.0;
  double ras = 0.0;
  double cls_dn = 0.0;
  double edge_dn = 0.0;
  double total = 0.0;
};

// Mean binary cross-entropy with confidences clamped away from {0,1}.
inline double bce_cls_loss(std::span<const int> labels, std::span<const double> confidences) {
  if (labels.size() != confidences.size())
    throw Error(Errc::length_mismatch, "labels and confidences differ in length");
  if (labels.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t n = 0; n < labels.size(); ++n) {
    const double c = std::clamp(confidences[n], kConfidenceClamp, 1.0 - kConfidenceClamp);
    sum += labels[n] ? std::log(c) : std::log(1.0 - c);
  }
  return -sum / static_cast<double>(labels.size());
}

// L1 endpoint distance over the ground-truth valid prefix, averaged by the
// valid count. The ground-truth room must already be rotation-aligned.
inline double edge_l1_loss(const RoomEdgeSequence& gt_aligned, const PredictedRoom& pred) {
  if (gt_aligned.tokens.size() != pred.tokens.size())
    throw Error(Errc::length_mismatch, "room lengths differ");
  if (gt_aligned.mock()) return 0.0;
  double sum = 0.0;
  for (std::size_t n = 0; n < gt_aligned.valid_count; ++n) {
    const DirectedEdge& g = gt_aligned.tokens[n].edge;
    const DirectedEdge& p = pred.tokens[n].edge;
    sum += l1_distance(g.p1, p.p1) + l1_distance(g.p2, p.p2);
  }
  return sum / static_cast<double>(gt_aligned.valid_count);
}

// Even-odd scanline fill. A pixel is set iff its center lies inside the
// polygon; vertices are in normalized coordinates and scale to pixel space.
inline RasterMask rasterize(const PolygonVertices& poly, std::size_t width, std::size_t height) {
  if (poly.size() < 3)
    throw Error(Errc::too_few_vertices, "rasterization needs at least 3 vertices");
  RasterMask mask;
  mask.width = width;
  mask.height = height;
  mask.occupancy.assign(width * height, 0);

  const std::size_t k = poly.size();
  std::vector<Point2> pts(k);
  for (std::size_t i = 0; i < k; ++i)
    pts[i] = {poly.vertices[i].x * static_cast<double>(width),
              poly.vertices[i].y * static_cast<double>(height)};

  std::vector<double> crossings;
  for (std::size_t row = 0; row < height; ++row) {
    const double yc = static_cast<double>(row) + 0.5;
    crossings.clear();
    for (std::size_t i = 0; i < k; ++i) {
      const Point2 a = pts[i];
      const Point2 b = pts[(i + 1) % k];
      if ((a.y <= yc) == (b.y <= yc)) continue;  // half-open in y; horizontals drop out
      crossings.push_back(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
    }
    std::sort(crossings.begin(), crossings.end());
    for (std::size_t c = 0; c + 1 < crossings.size(); c += 2) {
      // pixels whose center x satisfies crossings[c] <= x < crossings[c+1]
      auto lo = static_cast<long long>(std::ceil(crossings[c] - 0.5));
      auto hi = static_cast<long long>(std::ceil(crossings[c + 1] - 0.5)) - 1;
      lo = std::max<long long>(lo, 0);
      hi = std::min<long long>(hi, static_cast<long long>(width) - 1);
      for (long long x = lo; x <= hi; ++x) mask.occupancy[row * width + static_cast<std::size_t>(x)] = 1;
    }
  }
  return mask;
}

// 1 - 2|A intersect B| / (|A| + |B|); two empty masks are a perfect match.
inline double dice_loss(const RasterMask& a, const RasterMask& b) {
  if (a.width != b.width || a.height != b.height)
    throw Error(Errc::dimension_mismatch, "mask dimensions differ");
  std::size_t inter = 0, total = 0;
  for (std::size_t i = 0; i < a.occupancy.size(); ++i) {
    inter += static_cast<std::size_t>(a.occupancy[i] & b.occupancy[i]);
    total += static_cast<std::size_t>(a.occupancy[i]) + b.occupancy[i];
  }
  if (total == 0) return 0.0;
  return 1.0 - 2.0 * static_cast<double>(inter) / static_cast<double>(total);
}

struct LossOptions {
  LossWeights weights;
  std::size_t raster_resolution = kDefaultRasterResolution;
  double eps = kDefaultPolygonEps;
  double confidence_min = kDefaultConfidenceMin;
};

namespace detail {

inline std::vector<double> confidences(const PredictedRoom& room) {
  std::vector<double> c(room.tokens.size());
  for (std::size_t i = 0; i < room.tokens.size(); ++i) c[i] = room.tokens[i].confidence;
  return c;
}

inline RasterMask room_mask(const RoomEdgeSequence& room, const LossOptions& opts) {
  RasterMask empty;
  empty.width = opts.raster_resolution;
  empty.height = opts.raster_resolution;
  empty.occupancy.assign(opts.raster_resolution * opts.raster_resolution, 0);
  if (room.valid_count < 2) return empty;
  try {
    return rasterize(edges_to_polygon(room, opts.eps), opts.raster_resolution, opts.raster_resolution);
  } catch (const Error&) {
    return empty;
  }
}

inline RasterMask predicted_mask(const PredictedRoom& room, const LossOptions& opts) {
  RoomEdgeSequence seq;
  seq.tokens.resize(room.tokens.size());
  for (const auto& t : room.tokens) {
    if (t.confidence >= opts.confidence_min && !t.edge.degenerate())
      seq.tokens[seq.valid_count++] = {t.edge, true};
  }
  return room_mask(seq, opts);
}

}  // namespace detail

// Weighted sum over matched rooms (classification, endpoint L1, mask Dice)
// plus optional index-aligned denoising terms applied without matching.
// dn_queries may carry several aligned copies; copy i pairs with target
// room i mod M.
inline LossBreakdown total_loss(const Floorplan& gt, const PredictionSet& pred, const MatchResult& match,
                                const LossOptions& opts = {}, const Floorplan* dn_targets = nullptr,
                                const PredictionSet* dn_queries = nullptr) {
  const std::size_t m_cap = gt.rooms.size();
  if (pred.rooms.size() != m_cap || match.assignment.size() != m_cap)
    throw Error(Errc::capacity_mismatch, "plan, prediction and match sizes disagree");
  if ((dn_targets == nullptr) != (dn_queries == nullptr))
    throw Error(Errc::invalid_config, "denoising targets and queries must be given together");

  LossBreakdown out;
  for (std::size_t m = 0; m < m_cap; ++m) {
    const auto& gt_room = gt.rooms[m];
    const auto& pred_room = pred.rooms[match.assignment[m]];
    const auto labels = validity_labels(gt_room);
    const auto confs = detail::confidences(pred_room);
    out.cls += bce_cls_loss(labels, confs);
    if (gt_room.mock()) continue;

    RoomEdgeSequence aligned = match.pair_reversed.size() > m && match.pair_reversed[m]
                                   ? reverse_valid(gt_room)
                                   : gt_room;
    aligned = rotate_valid(aligned, match.best_rotation[m]);
    out.edge += edge_l1_loss(aligned, pred_room);
    out.ras += dice_loss(detail::room_mask(gt_room, opts), detail::predicted_mask(pred_room, opts));
  }

  if (dn_targets && dn_queries) {
    const std::size_t m_dn = dn_targets->rooms.size();
    if (m_dn == 0 || dn_queries->rooms.size() % m_dn != 0)
      throw Error(Errc::capacity_mismatch, "denoising query count is not a multiple of the target count");
    for (std::size_t i = 0; i < dn_queries->rooms.size(); ++i) {
      const auto& target = dn_targets->rooms[i % m_dn];
      const auto& query = dn_queries->rooms[i];
      out.cls_dn += bce_cls_loss(validity_labels(target), detail::confidences(query));
      if (!target.mock()) out.edge_dn += edge_l1_loss(target, query);
    }
  }

  const LossWeights& w = opts.weights;
  out.total = w.cls * out.cls + w.edge * out.edge + w.ras * out.ras + w.cls_dn * out.cls_dn +
              w.edge_dn * out.edge_dn;
  return out;
}

}  // namespace edgeplan
