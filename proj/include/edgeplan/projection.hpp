#pragma once

// Vertical projection of 3-D point clouds into normalized 2-D density maps.
// Z is dropped; (x, y) bins into half-open pixel cells and per-pixel counts
// are divided by the maximum count.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "edgeplan/core.hpp"

namespace edgeplan {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct PointCloud {
  std::vector<Point3> points;
};

struct Bounds {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
};

struct DensityMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;        // row-major, [0,1]
  std::vector<std::uint32_t> counts; // raw per-pixel tallies
  Bounds bounds;
  double max_count = 0.0;

  double value_at(std::size_t px, std::size_t py) const { return values[py * width + px]; }
};

inline constexpr double kDefaultBoundsMargin = 0.05;

// Tight (x, y) bounding box of the cloud expanded by a fractional margin on
// each side.
inline Bounds cloud_bounds(const PointCloud& cloud, double margin = kDefaultBoundsMargin) {
  if (cloud.points.empty()) throw Error(Errc::empty_cloud, "cannot bound an empty cloud");
  Bounds b{cloud.points[0].x, cloud.points[0].y, cloud.points[0].x, cloud.points[0].y};
  for (const auto& p : cloud.points) {
    b.min_x = std::min(b.min_x, p.x);
    b.min_y = std::min(b.min_y, p.y);
    b.max_x = std::max(b.max_x, p.x);
    b.max_y = std::max(b.max_y, p.y);
  }
  // Degenerate extents (single point, axis-aligned line) get a unit pad so
  // the linear scaling stays well defined.
  const double pad_x = b.width() > 0.0 ? margin * b.width() : 0.5;
  const double pad_y = b.height() > 0.0 ? margin * b.height() : 0.5;
  b.min_x -= pad_x;
  b.max_x += pad_x;
  b.min_y -= pad_y;
  b.max_y += pad_y;
  return b;
}

inline DensityMap project(const PointCloud& cloud, std::size_t width = 256, std::size_t height = 256,
                          std::optional<Bounds> bounds = std::nullopt) {
  if (cloud.points.empty()) throw Error(Errc::empty_cloud, "projection needs a non-empty cloud");
  if (width == 0 || height == 0) throw Error(Errc::invalid_config, "raster dimensions must be positive");
  const Bounds b = bounds ? *bounds : cloud_bounds(cloud);
  if (!(b.width() > 0.0) || !(b.height() > 0.0))
    throw Error(Errc::degenerate_bounds, "bounds must have positive extent on both axes");

  DensityMap map;
  map.width = width;
  map.height = height;
  map.bounds = b;
  map.counts.assign(width * height, 0);

  const double sx = static_cast<double>(width) / b.width();
  const double sy = static_cast<double>(height) / b.height();
  for (const auto& p : cloud.points) {
    const double fx = (p.x - b.min_x) * sx;
    const double fy = (p.y - b.min_y) * sy;
    if (fx < 0.0 || fy < 0.0) continue;
    const auto px = static_cast<std::size_t>(fx);
    const auto py = static_cast<std::size_t>(fy);
    if (px >= width || py >= height) continue;
    ++map.counts[py * width + px];
  }

  const std::uint32_t max_count = *std::max_element(map.counts.begin(), map.counts.end());
  if (max_count == 0) throw Error(Errc::empty_cloud, "no points fall inside the given bounds");
  map.max_count = static_cast<double>(max_count);
  map.values.resize(map.counts.size());
  for (std::size_t i = 0; i < map.counts.size(); ++i)
    map.values[i] = static_cast<double>(map.counts[i]) / map.max_count;
  return map;
}

// Pixel center in the normalized [0,1]^2 coordinate frame.
inline Point2 pixel_to_normalized(std::size_t px, std::size_t py, const DensityMap& map) {
  if (px >= map.width || py >= map.height)
    throw Error(Errc::out_of_extent, "pixel (" + std::to_string(px) + ", " + std::to_string(py) +
                                         ") outside " + std::to_string(map.width) + "x" +
                                         std::to_string(map.height));
  return {(static_cast<double>(px) + 0.5) / static_cast<double>(map.width),
          (static_cast<double>(py) + 0.5) / static_cast<double>(map.height)};
}

// Nearest bin for a normalized point; inverse of pixel_to_normalized up to
// half a pixel.
inline std::pair<std::size_t, std::size_t> normalized_to_pixel(Point2 p, const DensityMap& map) {
  const auto bin = [](double v, std::size_t n) {
    const auto i = static_cast<long long>(std::floor(v * static_cast<double>(n)));
    return static_cast<std::size_t>(std::clamp<long long>(i, 0, static_cast<long long>(n) - 1));
  };
  return {bin(p.x, map.width), bin(p.y, map.height)};
}

}  // namespace edgeplan
