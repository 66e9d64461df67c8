#pragma once

// Evaluation protocol: precision/recall/F1 at the room (region overlap),
// corner (vertex proximity) and angle (interior-angle agreement) levels,
// plus mean per-room IoU for single-room scenes. Matching is greedy and
// one-to-one; counts are kept so dataset scores micro-average.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "edgeplan/core.hpp"
#include "edgeplan/losses.hpp"
#include "edgeplan/matching.hpp"
#include "edgeplan/polygonize.hpp"

namespace edgeplan {

struct MetricThresholds {
  double room_iou_min = 0.7;
  double corner_dist_max = 10.0;  // pixels at raster_resolution
  double angle_tol_deg = 5.0;
  std::size_t raster_resolution = kDefaultRasterResolution;
  bool optimal_room_matching = false;  // Hungarian instead of greedy room pairing
};

struct LevelScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricCounts {
  std::size_t gt_rooms = 0;
  std::size_t pred_rooms = 0;
  std::size_t room_matches = 0;
  std::size_t gt_corners = 0;
  std::size_t pred_corners = 0;
  std::size_t corner_matches = 0;
  std::size_t angle_correct = 0;
  double iou_sum = 0.0;       // per ground-truth room, best IoU against any prediction
  std::size_t iou_count = 0;

  MetricCounts& operator+=(const MetricCounts& o) {
    gt_rooms += o.gt_rooms;
    pred_rooms += o.pred_rooms;
    room_matches += o.room_matches;
    gt_corners += o.gt_corners;
    pred_corners += o.pred_corners;
    corner_matches += o.corner_matches;
    angle_correct += o.angle_correct;
    iou_sum += o.iou_sum;
    iou_count += o.iou_count;
    return *this;
  }
};

struct MetricsReport {
  LevelScore room;
  LevelScore corner;
  LevelScore angle;
  double room_iou = 0.0;
  MetricCounts counts;
};

inline double polygon_iou(const PolygonVertices& a, const PolygonVertices& b, std::size_t resolution) {
  const RasterMask ma = rasterize(a, resolution, resolution);
  const RasterMask mb = rasterize(b, resolution, resolution);
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < ma.occupancy.size(); ++i) {
    inter += static_cast<std::size_t>(ma.occupancy[i] & mb.occupancy[i]);
    uni += static_cast<std::size_t>(ma.occupancy[i] | mb.occupancy[i]);
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

namespace detail {

// Empty-set convention: a ratio with zero denominator is 1 when the other
// side is empty too, else 0.
inline LevelScore score_from(std::size_t matches, std::size_t n_gt, std::size_t n_pred) {
  LevelScore s;
  s.precision = n_pred > 0 ? static_cast<double>(matches) / static_cast<double>(n_pred)
                           : (n_gt == 0 ? 1.0 : 0.0);
  s.recall = n_gt > 0 ? static_cast<double>(matches) / static_cast<double>(n_gt)
                      : (n_pred == 0 ? 1.0 : 0.0);
  s.f1 = (s.precision + s.recall) > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

struct CornerRef {
  std::size_t poly = 0;
  std::size_t vertex = 0;
  Point2 pixel;  // normalized coordinates scaled by the raster resolution
};

inline std::vector<CornerRef> collect_corners(const std::vector<PolygonVertices>& polys,
                                              std::size_t resolution) {
  std::vector<CornerRef> out;
  for (std::size_t p = 0; p < polys.size(); ++p)
    for (std::size_t v = 0; v < polys[p].size(); ++v)
      out.push_back({p, v,
                     {polys[p].vertices[v].x * static_cast<double>(resolution),
                      polys[p].vertices[v].y * static_cast<double>(resolution)}});
  return out;
}

// Interior angle in degrees at vertex v of a loop normalized to
// counter-clockwise orientation; reflex vertices exceed 180.
inline double interior_angle_deg(const PolygonVertices& poly, std::size_t v) {
  const std::size_t k = poly.size();
  double area2 = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    area2 += cross(poly.vertices[i], poly.vertices[(i + 1) % k]);
  const bool ccw = area2 >= 0.0;
  const Point2 cur = poly.vertices[v];
  const Point2 prev = poly.vertices[(v + k - 1) % k];
  const Point2 next = poly.vertices[(v + 1) % k];
  const Point2 into = (ccw ? next : prev) - cur;
  const Point2 outof = (ccw ? prev : next) - cur;
  double deg = std::atan2(cross(into, outof), dot(into, outof)) * 180.0 / std::numbers::pi;
  if (deg < 0.0) deg += 360.0;
  return deg;
}

struct RoomMatchStats {
  std::size_t matches = 0;
  double iou_sum = 0.0;
  std::size_t iou_count = 0;
};

inline RoomMatchStats match_rooms(const std::vector<PolygonVertices>& gt,
                                  const std::vector<PolygonVertices>& pred,
                                  const MetricThresholds& t) {
  RoomMatchStats stats;
  if (gt.empty() && pred.empty()) return stats;
  std::vector<double> iou(gt.size() * pred.size(), 0.0);
  std::vector<RasterMask> gt_masks, pred_masks;
  gt_masks.reserve(gt.size());
  pred_masks.reserve(pred.size());
  for (const auto& p : gt) gt_masks.push_back(rasterize(p, t.raster_resolution, t.raster_resolution));
  for (const auto& p : pred) pred_masks.push_back(rasterize(p, t.raster_resolution, t.raster_resolution));
  for (std::size_t i = 0; i < gt.size(); ++i) {
    for (std::size_t j = 0; j < pred.size(); ++j) {
      std::size_t inter = 0, uni = 0;
      const auto& a = gt_masks[i].occupancy;
      const auto& b = pred_masks[j].occupancy;
      for (std::size_t px = 0; px < a.size(); ++px) {
        inter += static_cast<std::size_t>(a[px] & b[px]);
        uni += static_cast<std::size_t>(a[px] | b[px]);
      }
      iou[i * pred.size() + j] = uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
    }
  }

  for (std::size_t i = 0; i < gt.size(); ++i) {
    double best = 0.0;
    for (std::size_t j = 0; j < pred.size(); ++j) best = std::max(best, iou[i * pred.size() + j]);
    stats.iou_sum += best;
    ++stats.iou_count;
  }

  if (t.optimal_room_matching && !gt.empty() && !pred.empty()) {
    const std::size_t n = std::max(gt.size(), pred.size());
    CostMatrix costs;
    costs.size = n;
    costs.values.assign(n * n, 1.0);  // padded slots carry IoU 0
    for (std::size_t i = 0; i < gt.size(); ++i)
      for (std::size_t j = 0; j < pred.size(); ++j) costs.at(i, j) = 1.0 - iou[i * pred.size() + j];
    const MatchResult mr = hungarian(costs);
    for (std::size_t i = 0; i < gt.size(); ++i) {
      const std::size_t j = mr.assignment[i];
      if (j < pred.size() && iou[i * pred.size() + j] >= t.room_iou_min) ++stats.matches;
    }
    return stats;
  }

  struct Candidate {
    double iou;
    std::size_t i, j;
  };
  std::vector<Candidate> cands;
  for (std::size_t i = 0; i < gt.size(); ++i)
    for (std::size_t j = 0; j < pred.size(); ++j)
      if (iou[i * pred.size() + j] >= t.room_iou_min) cands.push_back({iou[i * pred.size() + j], i, j});
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });
  std::vector<char> gt_used(gt.size(), 0), pred_used(pred.size(), 0);
  for (const auto& c : cands) {
    if (gt_used[c.i] || pred_used[c.j]) continue;
    gt_used[c.i] = pred_used[c.j] = 1;
    ++stats.matches;
  }
  return stats;
}

struct CornerMatch {
  std::size_t gt_index;    // into the flattened gt corner list
  std::size_t pred_index;  // into the flattened pred corner list
};

inline std::vector<CornerMatch> match_corners(const std::vector<CornerRef>& gt,
                                              const std::vector<CornerRef>& pred, double max_dist) {
  struct Candidate {
    double dist;
    std::size_t i, j;
  };
  std::vector<Candidate> cands;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    for (std::size_t j = 0; j < pred.size(); ++j) {
      const double d = distance(gt[i].pixel, pred[j].pixel);
      if (d <= max_dist) cands.push_back({d, i, j});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });
  std::vector<char> gt_used(gt.size(), 0), pred_used(pred.size(), 0);
  std::vector<CornerMatch> matches;
  for (const auto& c : cands) {
    if (gt_used[c.i] || pred_used[c.j]) continue;
    gt_used[c.i] = pred_used[c.j] = 1;
    matches.push_back({c.i, c.j});
  }
  return matches;
}

}  // namespace detail

inline MetricCounts evaluate_polygon_counts(const std::vector<PolygonVertices>& gt_polys,
                                            const std::vector<PolygonVertices>& pred_polys,
                                            const MetricThresholds& t) {
  MetricCounts counts;
  counts.gt_rooms = gt_polys.size();
  counts.pred_rooms = pred_polys.size();

  const auto room_stats = detail::match_rooms(gt_polys, pred_polys, t);
  counts.room_matches = room_stats.matches;
  counts.iou_sum = room_stats.iou_sum;
  counts.iou_count = room_stats.iou_count;

  const auto gt_corners = detail::collect_corners(gt_polys, t.raster_resolution);
  const auto pred_corners = detail::collect_corners(pred_polys, t.raster_resolution);
  counts.gt_corners = gt_corners.size();
  counts.pred_corners = pred_corners.size();
  const auto matches = detail::match_corners(gt_corners, pred_corners, t.corner_dist_max);
  counts.corner_matches = matches.size();
  for (const auto& m : matches) {
    const auto& g = gt_corners[m.gt_index];
    const auto& p = pred_corners[m.pred_index];
    const double ga = detail::interior_angle_deg(gt_polys[g.poly], g.vertex);
    const double pa = detail::interior_angle_deg(pred_polys[p.poly], p.vertex);
    if (std::abs(ga - pa) <= t.angle_tol_deg) ++counts.angle_correct;
  }
  return counts;
}

inline MetricsReport report_from_counts(const MetricCounts& c) {
  MetricsReport r;
  r.counts = c;
  r.room = detail::score_from(c.room_matches, c.gt_rooms, c.pred_rooms);
  r.corner = detail::score_from(c.corner_matches, c.gt_corners, c.pred_corners);
  r.angle = detail::score_from(c.angle_correct, c.gt_corners, c.pred_corners);
  r.room_iou = c.iou_count > 0 ? c.iou_sum / static_cast<double>(c.iou_count) : 0.0;
  return r;
}

inline LevelScore room_metrics(const std::vector<PolygonVertices>& gt_polys,
                               const std::vector<PolygonVertices>& pred_polys,
                               const MetricThresholds& t = {}) {
  const auto stats = detail::match_rooms(gt_polys, pred_polys, t);
  return detail::score_from(stats.matches, gt_polys.size(), pred_polys.size());
}

inline LevelScore corner_metrics(const std::vector<PolygonVertices>& gt_polys,
                                 const std::vector<PolygonVertices>& pred_polys,
                                 const MetricThresholds& t = {}) {
  const auto gt_corners = detail::collect_corners(gt_polys, t.raster_resolution);
  const auto pred_corners = detail::collect_corners(pred_polys, t.raster_resolution);
  const auto matches = detail::match_corners(gt_corners, pred_corners, t.corner_dist_max);
  return detail::score_from(matches.size(), gt_corners.size(), pred_corners.size());
}

inline LevelScore angle_metrics(const std::vector<PolygonVertices>& gt_polys,
                                const std::vector<PolygonVertices>& pred_polys,
                                const MetricThresholds& t = {}) {
  const auto counts = evaluate_polygon_counts(gt_polys, pred_polys, t);
  return detail::score_from(counts.angle_correct, counts.gt_corners, counts.pred_corners);
}

inline MetricsReport evaluate_polygons(const std::vector<PolygonVertices>& gt_polys,
                                       const std::vector<PolygonVertices>& pred_polys,
                                       const MetricThresholds& t = {}) {
  return report_from_counts(evaluate_polygon_counts(gt_polys, pred_polys, t));
}

inline MetricsReport evaluate_scene(const Floorplan& gt, const std::vector<PolygonVertices>& pred_polys,
                                    double eps = kDefaultPolygonEps, const MetricThresholds& t = {}) {
  return evaluate_polygons(floorplan_to_polygons(gt, eps), pred_polys, t);
}

inline MetricsReport evaluate_scene(const Floorplan& gt, const PredictionSet& pred,
                                    double eps = kDefaultPolygonEps, const MetricThresholds& t = {},
                                    double confidence_min = kDefaultConfidenceMin) {
  const Floorplan pred_plan = as_floorplan(pred, confidence_min);
  return evaluate_polygons(floorplan_to_polygons(gt, eps), floorplan_to_polygons(pred_plan, eps), t);
}

}  // namespace edgeplan
