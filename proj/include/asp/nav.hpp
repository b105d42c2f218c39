#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <vector>

#include "asp/common.hpp"
#include "asp/config.hpp"
#include "asp/geom.hpp"

namespace asp {

struct OccupancyGrid {
  double resolution = 0.05;  // meters per cell
  Point2 origin;             // world position of cell (0,0) corner
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> cells;  // row-major, 255 = lethal

  static OccupancyGrid make(double resolution, Point2 origin, int width, int height,
                            std::uint8_t fill = 0) {
    OccupancyGrid g;
    g.resolution = resolution;
    g.origin = origin;
    g.width = width;
    g.height = height;
    g.cells.assign(static_cast<std::size_t>(width) * height, fill);
    return g;
  }

  bool in_bounds(int ix, int iy) const {
    return ix >= 0 && ix < width && iy >= 0 && iy < height;
  }

  std::uint8_t at(int ix, int iy) const {
    return cells[static_cast<std::size_t>(iy) * width + ix];
  }

  void set(int ix, int iy, std::uint8_t cost) {
    cells[static_cast<std::size_t>(iy) * width + ix] = cost;
  }

  int cell_x(double x) const {
    return static_cast<int>(std::floor((x - origin.x) / resolution));
  }

  int cell_y(double y) const {
    return static_cast<int>(std::floor((y - origin.y) / resolution));
  }

  Point2 cell_center(int ix, int iy) const {
    return {origin.x + (ix + 0.5) * resolution, origin.y + (iy + 0.5) * resolution};
  }

  void fill_rect(double x0, double y0, double x1, double y1, std::uint8_t cost) {
    for (int iy = 0; iy < height; ++iy)
      for (int ix = 0; ix < width; ++ix) {
        Point2 c = cell_center(ix, iy);
        if (c.x >= x0 && c.x <= x1 && c.y >= y0 && c.y <= y1) set(ix, iy, cost);
      }
  }
};

struct Footprint {
  double half_x = 0.30;
  double half_y = 0.25;
};

// Mean cell cost under the oriented footprint rectangle. Any lethal cell or
// any part of the footprint falling outside the grid makes the pose a
// collision (+inf).
inline double footprint_cost(const OccupancyGrid& grid, const Pose2D& pose,
                             const Footprint& fp, int lethal_threshold = 254) {
  const double inf = std::numeric_limits<double>::infinity();
  const double c = std::cos(pose.theta), s = std::sin(pose.theta);
  const double reach = std::hypot(fp.half_x, fp.half_y);
  int ix0 = grid.cell_x(pose.position.x - reach);
  int ix1 = grid.cell_x(pose.position.x + reach);
  int iy0 = grid.cell_y(pose.position.y - reach);
  int iy1 = grid.cell_y(pose.position.y + reach);
  double sum = 0.0;
  std::size_t count = 0;
  for (int iy = iy0; iy <= iy1; ++iy) {
    for (int ix = ix0; ix <= ix1; ++ix) {
      Point2 center = grid.cell_center(ix, iy);
      double dx = center.x - pose.position.x;
      double dy = center.y - pose.position.y;
      // into robot frame
      double lx = c * dx + s * dy;
      double ly = -s * dx + c * dy;
      if (std::abs(lx) > fp.half_x || std::abs(ly) > fp.half_y) continue;
      if (!grid.in_bounds(ix, iy)) return inf;
      int cost = grid.at(ix, iy);
      if (cost >= lethal_threshold) return inf;
      sum += cost;
      ++count;
    }
  }
  if (count == 0) return inf;  // footprint smaller than a cell or outside
  return sum / static_cast<double>(count);
}

// Outward viewing position: the affordance normal, sign-fixed to point away
// from the object centroid, projected to the horizontal plane and followed
// for r meters from the object.
inline Point2 preferred_view_position(const PointCloud& aff_cloud,
                                      const Point3& obj_centroid, double r,
                                      double min_horizontal = 0.1) {
  Point3 n = dominant_normal(aff_cloud);
  Point3 aff_c = centroid(aff_cloud);
  if (n.dot(aff_c - obj_centroid) < 0.0) n = n * -1.0;
  double nxy = std::hypot(n.x, n.y);
  if (nxy < min_horizontal)
    throw Error(ErrorCode::NoHorizontalNormal,
                "affordance normal has no horizontal component");
  return {obj_centroid.x + r * n.x / nxy, obj_centroid.y + r * n.y / nxy};
}

struct NavCandidate {
  Pose2D pose;
  double footprint = 0.0;  // F term
  double score = 0.0;      // F + lambda * |p - p_aff|
  double radius = 0.0;
  int angular_index = 0;
};

// All collision-free candidates on the circle of the given radius, heading
// chosen to face the object.
inline std::vector<NavCandidate> nav_candidates_on_radius(
    const OccupancyGrid& grid, const Point2& obj_xy,
    const std::optional<Point2>& p_aff, double radius, const NavConfig& cfg) {
  std::vector<NavCandidate> out;
  const int steps = static_cast<int>(std::floor(2.0 * std::numbers::pi / cfg.angular_step));
  Footprint fp{cfg.footprint_half_x, cfg.footprint_half_y};
  for (int i = 0; i < steps; ++i) {
    double phi = i * cfg.angular_step;
    Point2 p{obj_xy.x + radius * std::cos(phi), obj_xy.y + radius * std::sin(phi)};
    double theta = normalize_angle(std::atan2(obj_xy.y - p.y, obj_xy.x - p.x));
    Pose2D pose{p, theta};
    double f = footprint_cost(grid, pose, fp, cfg.lethal_threshold);
    if (!std::isfinite(f)) continue;
    double score = f;
    if (p_aff) score += cfg.lambda_aff * distance(p, *p_aff);
    out.push_back({pose, f, score, radius, i});
  }
  return out;
}

// Searches the relaxation schedule and returns the minimizer of
// F + lambda_aff * |p - p_aff| on the first radius with any valid candidate.
// Ties keep the smaller angular index.
inline Pose2D select_nav_goal(const OccupancyGrid& grid, const Point3& obj_centroid,
                              const std::optional<Point2>& p_aff,
                              const NavConfig& cfg) {
  Point2 obj_xy{obj_centroid.x, obj_centroid.y};
  for (double radius : cfg.radius_schedule) {
    auto candidates = nav_candidates_on_radius(grid, obj_xy, p_aff, radius, cfg);
    if (candidates.empty()) continue;
    const NavCandidate* best = &candidates.front();
    for (const auto& cand : candidates)
      if (cand.score < best->score) best = &cand;
    return best->pose;
  }
  throw Error(ErrorCode::NoValidPose,
              "no collision-free pose on any radius of the relaxation schedule");
}

// Grid path check used as the navigation stand-in: 8-connected search over
// non-lethal cells.
inline bool grid_path_exists(const OccupancyGrid& grid, const Point2& from,
                             const Point2& to, int lethal_threshold = 254) {
  int sx = grid.cell_x(from.x), sy = grid.cell_y(from.y);
  int gx = grid.cell_x(to.x), gy = grid.cell_y(to.y);
  if (!grid.in_bounds(sx, sy) || !grid.in_bounds(gx, gy)) return false;
  if (grid.at(sx, sy) >= lethal_threshold || grid.at(gx, gy) >= lethal_threshold)
    return false;
  std::vector<char> seen(static_cast<std::size_t>(grid.width) * grid.height, 0);
  std::queue<std::pair<int, int>> frontier;
  frontier.push({sx, sy});
  seen[static_cast<std::size_t>(sy) * grid.width + sx] = 1;
  while (!frontier.empty()) {
    auto [x, y] = frontier.front();
    frontier.pop();
    if (x == gx && y == gy) return true;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        int nx = x + dx, ny = y + dy;
        if (!grid.in_bounds(nx, ny)) continue;
        std::size_t idx = static_cast<std::size_t>(ny) * grid.width + nx;
        if (seen[idx] || grid.at(nx, ny) >= lethal_threshold) continue;
        seen[idx] = 1;
        frontier.push({nx, ny});
      }
  }
  return false;
}

}  // namespace asp
