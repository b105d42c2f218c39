#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "asp/geom.hpp"
#include "asp/nav.hpp"
#include "asp/sim.hpp"

namespace asp {

struct Graymap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, top row first

  void set(int x, int y, std::uint8_t value) {
    if (x < 0 || x >= width || y < 0 || y >= height) return;
    pixels[static_cast<std::size_t>(y) * width + x] = value;
  }

  void splat(int x, int y, int radius, std::uint8_t value) {
    for (int dy = -radius; dy <= radius; ++dy)
      for (int dx = -radius; dx <= radius; ++dx) set(x + dx, y + dy, value);
  }

  std::string to_pgm() const {
    std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) +
                      "\n255\n";
    out.append(reinterpret_cast<const char*>(pixels.data()), pixels.size());
    return out;
  }
};

// Overhead orthographic view of the world: brightness encodes point height.
inline Graymap render_scene_graymap(const SimWorld& world, int width = 480) {
  PointCloud all;
  for (std::size_t i = 0; i < world.object_count(); ++i) {
    PointCloud cloud = world.object_cloud(i);
    all.insert(all.end(), cloud.begin(), cloud.end());
  }
  Graymap img;
  if (all.empty()) return img;
  Aabb box = Aabb::of(all);
  double span_x = std::max(box.hi.x - box.lo.x, 1e-3);
  double span_y = std::max(box.hi.y - box.lo.y, 1e-3);
  double scale = (width - 20) / std::max(span_x, span_y);
  img.width = width;
  img.height = static_cast<int>(span_y * scale) + 20;
  img.pixels.assign(static_cast<std::size_t>(img.width) * img.height, 0);
  double span_z = std::max(box.hi.z - box.lo.z, 1e-3);
  for (const auto& p : all) {
    int x = 10 + static_cast<int>((p.x - box.lo.x) * scale);
    int y = img.height - 10 - static_cast<int>((p.y - box.lo.y) * scale);
    auto shade = static_cast<std::uint8_t>(80 + 175 * (p.z - box.lo.z) / span_z);
    img.set(x, y, std::max(img.pixels[static_cast<std::size_t>(y) * img.width + x], shade));
  }
  return img;
}

// Grid costs with the sampled candidates and the chosen pose overlaid.
inline Graymap render_nav_graymap(const OccupancyGrid& grid,
                                  const std::vector<NavCandidate>& candidates,
                                  const std::optional<Pose2D>& chosen,
                                  const std::optional<Point2>& p_aff) {
  Graymap img;
  img.width = grid.width;
  img.height = grid.height;
  img.pixels.assign(static_cast<std::size_t>(grid.width) * grid.height, 0);
  for (int y = 0; y < grid.height; ++y)
    for (int x = 0; x < grid.width; ++x) {
      std::uint8_t cost = grid.at(x, y);
      std::uint8_t shade = cost >= 254 ? 20 : static_cast<std::uint8_t>(90 - cost / 4);
      img.set(x, grid.height - 1 - y, shade);
    }
  for (const auto& cand : candidates) {
    int x = grid.cell_x(cand.pose.position.x);
    int y = grid.cell_y(cand.pose.position.y);
    img.set(x, grid.height - 1 - y, 170);
  }
  if (p_aff) {
    img.splat(grid.cell_x(p_aff->x), grid.height - 1 - grid.cell_y(p_aff->y), 1, 220);
  }
  if (chosen) {
    img.splat(grid.cell_x(chosen->position.x),
              grid.height - 1 - grid.cell_y(chosen->position.y), 2, 255);
  }
  return img;
}

inline void write_pgm(const Graymap& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidParameter, "cannot write image: " + path);
  out << img.to_pgm();
}

}  // namespace asp
