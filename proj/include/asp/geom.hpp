#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "asp/common.hpp"

namespace asp {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Point3() = default;
  Point3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  Point3 operator+(const Point3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Point3 operator-(const Point3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Point3 operator*(double s) const { return {x * s, y * s, z * s}; }

  double dot(const Point3& o) const { return x * o.x + y * o.y + z * o.z; }
  double squared_norm() const { return dot(*this); }
  double norm() const { return std::sqrt(squared_norm()); }

  Point3 normalized() const {
    double n = norm();
    if (n < 1e-12)
      throw Error(ErrorCode::DegenerateGeometry, "cannot normalize zero vector");
    return {x / n, y / n, z / n};
  }

  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
};

inline double distance(const Point3& a, const Point3& b) { return (a - b).norm(); }

using PointCloud = std::vector<Point3>;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  double norm() const { return std::hypot(x, y); }
};

inline double distance(const Point2& a, const Point2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

// Heading normalized into [0, 2pi).
inline double normalize_angle(double theta) {
  const double two_pi = 2.0 * std::numbers::pi;
  double t = std::fmod(theta, two_pi);
  if (t < 0.0) t += two_pi;
  if (t >= two_pi) t = 0.0;
  return t;
}

struct Pose2D {
  Point2 position;
  double theta = 0.0;  // [0, 2pi)

  static Pose2D make(double x, double y, double heading) {
    return Pose2D{{x, y}, normalize_angle(heading)};
  }
};

struct Quaternion {
  double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

  Quaternion normalized() const {
    double n = norm();
    if (n < 1e-12)
      throw Error(ErrorCode::DegenerateGeometry, "zero quaternion");
    return {w / n, x / n, y / n, z / n};
  }

  static Quaternion from_yaw(double yaw) {
    return {std::cos(yaw / 2.0), 0.0, 0.0, std::sin(yaw / 2.0)};
  }

  static Quaternion from_pitch(double pitch) {
    return {std::cos(pitch / 2.0), 0.0, std::sin(pitch / 2.0), 0.0};
  }

  Quaternion operator*(const Quaternion& o) const {
    return {w * o.w - x * o.x - y * o.y - z * o.z,
            w * o.x + x * o.w + y * o.z - z * o.y,
            w * o.y - x * o.z + y * o.w + z * o.x,
            w * o.z + x * o.y - y * o.x + z * o.w};
  }

  // Rotation taking local +x onto the given direction (yaw then pitch).
  static Quaternion facing(const Point3& dir) {
    Point3 d = dir.normalized();
    double yaw = std::atan2(d.y, d.x);
    double pitch = -std::asin(std::clamp(d.z, -1.0, 1.0));
    return (from_yaw(yaw) * from_pitch(pitch)).normalized();
  }

  Point3 rotate(const Point3& v) const {
    // q v q^-1 for unit quaternion
    Point3 u{x, y, z};
    Point3 uv{u.y * v.z - u.z * v.y, u.z * v.x - u.x * v.z, u.x * v.y - u.y * v.x};
    Point3 uuv{u.y * uv.z - u.z * uv.y, u.z * uv.x - u.x * uv.z, u.x * uv.y - u.y * uv.x};
    return v + (uv * (2.0 * w)) + uuv * 2.0;
  }
};

struct Pose3D {
  Point3 position;
  Quaternion orientation;  // unit norm

  Point3 transform(const Point3& local) const {
    return orientation.rotate(local) + position;
  }
};

inline void require_non_empty(const PointCloud& pc, const char* what) {
  if (pc.empty())
    throw Error(ErrorCode::EmptyCloud, std::string(what) + ": empty point cloud");
}

inline Point3 centroid(const PointCloud& pc) {
  require_non_empty(pc, "centroid");
  Point3 sum;
  for (const auto& p : pc) sum = sum + p;
  return sum * (1.0 / static_cast<double>(pc.size()));
}

inline std::array<double, 3> aabb_extents(const PointCloud& pc) {
  require_non_empty(pc, "aabb_extents");
  Point3 lo = pc.front(), hi = pc.front();
  for (const auto& p : pc) {
    lo.x = std::min(lo.x, p.x); lo.y = std::min(lo.y, p.y); lo.z = std::min(lo.z, p.z);
    hi.x = std::max(hi.x, p.x); hi.y = std::max(hi.y, p.y); hi.z = std::max(hi.z, p.z);
  }
  return {hi.x - lo.x, hi.y - lo.y, hi.z - lo.z};
}

struct Aabb {
  Point3 lo, hi;

  static Aabb of(const PointCloud& pc) {
    require_non_empty(pc, "aabb");
    Aabb box{pc.front(), pc.front()};
    for (const auto& p : pc) {
      box.lo.x = std::min(box.lo.x, p.x); box.lo.y = std::min(box.lo.y, p.y);
      box.lo.z = std::min(box.lo.z, p.z);
      box.hi.x = std::max(box.hi.x, p.x); box.hi.y = std::max(box.hi.y, p.y);
      box.hi.z = std::max(box.hi.z, p.z);
    }
    return box;
  }

  Aabb inflated(double margin) const {
    return {{lo.x - margin, lo.y - margin, lo.z - margin},
            {hi.x + margin, hi.y + margin, hi.z + margin}};
  }

  bool contains(const Point3& p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y &&
           p.z >= lo.z && p.z <= hi.z;
  }

  Point3 center() const { return (lo + hi) * 0.5; }
};

namespace detail {

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const {
    std::uint64_t h = fnv1a(&k.x, sizeof(k.x));
    h = fnv1a(&k.y, sizeof(k.y), h);
    h = fnv1a(&k.z, sizeof(k.z), h);
    return static_cast<std::size_t>(h);
  }
};

inline CellKey cell_of(const Point3& p, double cell) {
  return {static_cast<std::int64_t>(std::floor(p.x / cell)),
          static_cast<std::int64_t>(std::floor(p.y / cell)),
          static_cast<std::int64_t>(std::floor(p.z / cell))};
}

}  // namespace detail

// Uniform-grid index for fixed-radius neighbor queries. Cell size equals the
// query radius so a lookup only touches the 27 surrounding cells.
class NeighborGrid {
 public:
  NeighborGrid(const PointCloud& pc, double radius)
      : points_(pc), radius_(radius) {
    if (radius <= 0.0)
      throw Error(ErrorCode::InvalidParameter, "neighbor radius must be > 0");
    cells_.reserve(pc.size());
    for (std::size_t i = 0; i < pc.size(); ++i)
      cells_[detail::cell_of(pc[i], radius_)].push_back(i);
  }

  bool has_neighbor(const Point3& query) const {
    const double r2 = radius_ * radius_;
    auto c = detail::cell_of(query, radius_);
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy)
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          auto it = cells_.find({c.x + dx, c.y + dy, c.z + dz});
          if (it == cells_.end()) continue;
          for (std::size_t idx : it->second) {
            if ((points_[idx] - query).squared_norm() <= r2) return true;
          }
        }
    return false;
  }

  double min_squared_distance(const Point3& query) const {
    // Exact within one ring of cells; falls back to a scan when the ring is
    // empty, so the result is always the true minimum.
    double best = std::numeric_limits<double>::infinity();
    auto c = detail::cell_of(query, radius_);
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy)
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          auto it = cells_.find({c.x + dx, c.y + dy, c.z + dz});
          if (it == cells_.end()) continue;
          for (std::size_t idx : it->second)
            best = std::min(best, (points_[idx] - query).squared_norm());
        }
    if (!std::isfinite(best)) {
      for (const auto& p : points_) best = std::min(best, (p - query).squared_norm());
    }
    return best;
  }

 private:
  PointCloud points_;
  double radius_;
  std::unordered_map<detail::CellKey, std::vector<std::size_t>, detail::CellKeyHash> cells_;
};

inline double min_distance_to_cloud(const Point3& p, const PointCloud& pc) {
  require_non_empty(pc, "min_distance_to_cloud");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& q : pc) best = std::min(best, (p - q).squared_norm());
  return std::sqrt(best);
}

// One representative point (cell centroid) per occupied voxel.
inline PointCloud voxel_downsample(const PointCloud& pc, double voxel) {
  if (voxel <= 0.0)
    throw Error(ErrorCode::InvalidParameter, "voxel size must be > 0");
  struct Acc {
    Point3 sum;
    std::size_t count = 0;
    std::size_t first = 0;
  };
  std::unordered_map<detail::CellKey, Acc, detail::CellKeyHash> cells;
  for (std::size_t i = 0; i < pc.size(); ++i) {
    auto& acc = cells[detail::cell_of(pc[i], voxel)];
    if (acc.count == 0) acc.first = i;
    acc.sum = acc.sum + pc[i];
    ++acc.count;
  }
  // Order representatives by first-seen input index so the result does not
  // depend on hash-map iteration order.
  std::vector<std::pair<std::size_t, Point3>> reps;
  reps.reserve(cells.size());
  for (const auto& [key, acc] : cells)
    reps.emplace_back(acc.first, acc.sum * (1.0 / static_cast<double>(acc.count)));
  std::sort(reps.begin(), reps.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  PointCloud out;
  out.reserve(reps.size());
  for (auto& [first, p] : reps) out.push_back(p);
  return out;
}

inline double directed_overlap(const PointCloud& from, const NeighborGrid& to_grid) {
  std::size_t hits = 0;
  for (const auto& p : from)
    if (to_grid.has_neighbor(p)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(from.size());
}

// Fraction of points with a cross-cloud neighbor within radius, symmetrized
// by taking the max of both directions.
inline double overlap_ratio(const PointCloud& a, const PointCloud& b, double radius) {
  require_non_empty(a, "overlap_ratio");
  require_non_empty(b, "overlap_ratio");
  if (radius <= 0.0)
    throw Error(ErrorCode::InvalidParameter, "overlap radius must be > 0");
  NeighborGrid grid_b(b, radius);
  NeighborGrid grid_a(a, radius);
  return std::max(directed_overlap(a, grid_b), directed_overlap(b, grid_a));
}

inline double iou_3d(const PointCloud& a, const PointCloud& b, double voxel) {
  require_non_empty(a, "iou_3d");
  require_non_empty(b, "iou_3d");
  if (voxel <= 0.0)
    throw Error(ErrorCode::InvalidParameter, "voxel size must be > 0");
  std::unordered_set<detail::CellKey, detail::CellKeyHash> cells_a, cells_b;
  for (const auto& p : a) cells_a.insert(detail::cell_of(p, voxel));
  for (const auto& p : b) cells_b.insert(detail::cell_of(p, voxel));
  std::size_t inter = 0;
  for (const auto& c : cells_a) inter += cells_b.count(c);
  std::size_t uni = cells_a.size() + cells_b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

// Unit eigenvector of the point covariance with the smallest eigenvalue.
// Sign is unspecified; callers orient it.
inline Point3 dominant_normal(const PointCloud& pc) {
  if (pc.size() < 3)
    throw Error(ErrorCode::DegenerateGeometry, "dominant_normal needs >= 3 points");
  Point3 c = centroid(pc);
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : pc) {
    Eigen::Vector3d d(p.x - c.x, p.y - c.y, p.z - c.z);
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(pc.size());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  const auto& evals = solver.eigenvalues();  // ascending
  // Rank < 2 means the two largest directions are not both populated.
  if (evals[1] <= 1e-12 * std::max(evals[2], 1e-12) || evals[2] <= 1e-18)
    throw Error(ErrorCode::DegenerateGeometry, "point cloud is rank-deficient");
  Eigen::Vector3d n = solver.eigenvectors().col(0);
  return Point3{n.x(), n.y(), n.z()};
}

}  // namespace asp
