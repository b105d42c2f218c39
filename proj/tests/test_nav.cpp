#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <queue>
#include <random>

#include "asp/nav.hpp"

using namespace asp;

namespace {

OccupancyGrid free_grid(int w = 80, int h = 80, double res = 0.05,
                        Point2 origin = {-2.0, -2.0}) {
  return OccupancyGrid::make(res, origin, w, h, 0);
}

// independent re-derivation of the footprint mean: enumerate integer cells in
// the oriented rectangle's bounding box, test centers, accumulate row-major
double oracle_footprint(const OccupancyGrid& grid, const Pose2D& pose,
                        const Footprint& fp, int lethal) {
  const double inf = std::numeric_limits<double>::infinity();
  double c = std::cos(pose.theta), s = std::sin(pose.theta);
  double reach = std::hypot(fp.half_x, fp.half_y);
  int ix0 = grid.cell_x(pose.position.x - reach);
  int ix1 = grid.cell_x(pose.position.x + reach);
  int iy0 = grid.cell_y(pose.position.y - reach);
  int iy1 = grid.cell_y(pose.position.y + reach);
  double sum = 0.0;
  std::size_t n = 0;
  for (int iy = iy0; iy <= iy1; ++iy)
    for (int ix = ix0; ix <= ix1; ++ix) {
      Point2 center = grid.cell_center(ix, iy);
      double dx = center.x - pose.position.x, dy = center.y - pose.position.y;
      double lx = c * dx + s * dy, ly = -s * dx + c * dy;
      if (std::abs(lx) > fp.half_x || std::abs(ly) > fp.half_y) continue;
      if (!grid.in_bounds(ix, iy)) return inf;
      if (grid.at(ix, iy) >= lethal) return inf;
      sum += grid.at(ix, iy);
      ++n;
    }
  return n == 0 ? inf : sum / n;
}

// exhaustive candidate search mirroring the spec definition
std::optional<Pose2D> oracle_nav_goal(const OccupancyGrid& grid, const Point3& obj,
                                      const std::optional<Point2>& p_aff,
                                      const NavConfig& cfg) {
  Footprint fp{cfg.footprint_half_x, cfg.footprint_half_y};
  for (double r : cfg.radius_schedule) {
    int steps = static_cast<int>(std::floor(2.0 * std::numbers::pi / cfg.angular_step));
    std::optional<Pose2D> best;
    double best_score = 0.0;
    for (int i = 0; i < steps; ++i) {
      double phi = i * cfg.angular_step;
      Point2 p{obj.x + r * std::cos(phi), obj.y + r * std::sin(phi)};
      double theta = normalize_angle(std::atan2(obj.y - p.y, obj.x - p.x));
      Pose2D pose{p, theta};
      double f = oracle_footprint(grid, pose, fp, cfg.lethal_threshold);
      if (!std::isfinite(f)) continue;
      double score = f;
      if (p_aff) score += cfg.lambda_aff * std::hypot(p.x - p_aff->x, p.y - p_aff->y);
      if (!best || score < best_score) {
        best = pose;
        best_score = score;
      }
    }
    if (best) return best;
  }
  return std::nullopt;
}

PointCloud vertical_disc(Point3 center, double ry, double rz, Point3 normal_axis) {
  // disc perpendicular to normal_axis (axis must be +-x or +-y or +-z here)
  PointCloud pc;
  for (int i = -6; i <= 6; ++i)
    for (int j = -6; j <= 6; ++j) {
      double a = ry * i / 6.0, b = rz * j / 6.0;
      if ((a * a) / (ry * ry) + (b * b) / (rz * rz) > 1.0) continue;
      if (std::abs(normal_axis.x) > 0.5) pc.push_back(center + Point3{0, a, b});
      else if (std::abs(normal_axis.y) > 0.5) pc.push_back(center + Point3{a, 0, b});
      else pc.push_back(center + Point3{a, b, 0});
    }
  return pc;
}

}  // namespace

TEST_CASE("footprint_cost basics") {
  OccupancyGrid grid = free_grid();
  Footprint fp{0.30, 0.25};

  CHECK(footprint_cost(grid, Pose2D::make(0, 0, 0.3), fp) == 0.0);

  // lethal cell under the footprint
  OccupancyGrid blocked = grid;
  blocked.set(blocked.cell_x(0.0), blocked.cell_y(0.0), 255);
  CHECK(std::isinf(footprint_cost(blocked, Pose2D::make(0, 0, 0), fp)));

  // half the footprint over cost-100 cells
  OccupancyGrid half = grid;
  half.fill_rect(0.0, -2.0, 2.0, 2.0, 100);
  double cost = footprint_cost(half, Pose2D::make(0, 0, 0), fp);
  CHECK(cost == Catch::Approx(50.0).margin(6.0));
  CHECK(cost == oracle_footprint(half, Pose2D::make(0, 0, 0), fp, 254));

  // footprint sticking out of the grid is a collision
  CHECK(std::isinf(footprint_cost(grid, Pose2D::make(-1.95, 0, 0), fp)));
}

TEST_CASE("footprint_cost matches the cell-enumeration oracle") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> pos(-1.2, 1.2), angle(0.0, 6.28);
  std::uniform_int_distribution<int> cost(0, 255);
  OccupancyGrid grid = free_grid();
  for (int i = 0; i < 600; ++i)
    grid.set(static_cast<int>(rng() % grid.width), static_cast<int>(rng() % grid.height),
             static_cast<std::uint8_t>(cost(rng)));
  Footprint fp{0.30, 0.25};
  for (int trial = 0; trial < 200; ++trial) {
    Pose2D pose = Pose2D::make(pos(rng), pos(rng), angle(rng));
    double mine = footprint_cost(grid, pose, fp);
    double theirs = oracle_footprint(grid, pose, fp, 254);
    if (std::isinf(theirs)) CHECK(std::isinf(mine));
    else CHECK(mine == theirs);
  }
}

TEST_CASE("preferred_view_position") {
  SECTION("outward +x face at r = 0.85") {
    PointCloud face = vertical_disc({0.1, 0, 0.5}, 0.1, 0.08, {1, 0, 0});
    Point2 p = preferred_view_position(face, {0, 0, 0.5}, 0.85);
    CHECK(p.x == Catch::Approx(0.85).margin(1e-6));
    CHECK(p.y == Catch::Approx(0.0).margin(1e-6));
  }

  SECTION("outward -y face") {
    PointCloud face = vertical_disc({0, -0.1, 0.5}, 0.1, 0.08, {0, 1, 0});
    Point2 p = preferred_view_position(face, {0, 0, 0.5}, 0.85);
    CHECK(p.x == Catch::Approx(0.0).margin(1e-6));
    CHECK(p.y == Catch::Approx(-0.85).margin(1e-6));
  }

  SECTION("upward-facing affordance has no horizontal direction") {
    PointCloud top = vertical_disc({0, 0, 0.9}, 0.1, 0.08, {0, 0, 1});
    CHECK_THROWS_AS(preferred_view_position(top, {0, 0, 0.5}, 0.85), Error);
  }
}

TEST_CASE("select_nav_goal analytic cases") {
  NavConfig cfg;

  SECTION("free space with p_aff lands at p_aff facing the object") {
    OccupancyGrid grid = free_grid();
    Pose2D goal = select_nav_goal(grid, {0, 0, 0.5}, Point2{0.85, 0.0}, cfg);
    CHECK(goal.position.x == Catch::Approx(0.85).margin(1e-9));
    CHECK(goal.position.y == Catch::Approx(0.0).margin(1e-9));
    CHECK(goal.theta == Catch::Approx(std::numbers::pi).margin(1e-9));
    auto oracle = oracle_nav_goal(grid, {0, 0, 0.5}, Point2{0.85, 0.0}, cfg);
    REQUIRE(oracle.has_value());
    CHECK(goal.position.x == oracle->position.x);
    CHECK(goal.position.y == oracle->position.y);
  }

  SECTION("wall on the p_aff side pushes the goal elsewhere") {
    OccupancyGrid grid = free_grid();
    grid.fill_rect(0.45, -2.0, 1.4, 2.0, 255);  // block the +x side
    Pose2D goal = select_nav_goal(grid, {0, 0, 0.5}, Point2{0.85, 0.0}, cfg);
    CHECK(goal.position.x < 0.45);
    auto oracle = oracle_nav_goal(grid, {0, 0, 0.5}, Point2{0.85, 0.0}, cfg);
    CHECK(goal.position.x == oracle->position.x);
    CHECK(goal.position.y == oracle->position.y);

    // with lambda = 0 the choice ignores p_aff entirely: pure min F
    NavConfig no_aff = cfg;
    no_aff.lambda_aff = 0.0;
    Pose2D free_goal = select_nav_goal(grid, {0, 0, 0.5}, std::nullopt, no_aff);
    auto free_oracle = oracle_nav_goal(grid, {0, 0, 0.5}, std::nullopt, no_aff);
    CHECK(free_goal.position.x == free_oracle->position.x);
    CHECK(free_goal.position.y == free_oracle->position.y);
  }

  SECTION("fully enclosed r0 relaxes to the next radius") {
    OccupancyGrid grid = free_grid();
    // lethal ring just beyond r0 so every r0 footprint collides
    for (int iy = 0; iy < grid.height; ++iy)
      for (int ix = 0; ix < grid.width; ++ix) {
        Point2 c = grid.cell_center(ix, iy);
        double d = std::hypot(c.x, c.y);
        if (d > 0.55 && d < 1.05) grid.set(ix, iy, 255);
      }
    Pose2D goal = select_nav_goal(grid, {0, 0, 0.5}, std::nullopt, cfg);
    double r = std::hypot(goal.position.x, goal.position.y);
    CHECK(r > 1.0);  // not the first radius
    auto oracle = oracle_nav_goal(grid, {0, 0, 0.5}, std::nullopt, cfg);
    CHECK(goal.position.x == oracle->position.x);
  }

  SECTION("no valid pose anywhere raises NoValidPose") {
    OccupancyGrid grid = OccupancyGrid::make(0.05, {-2, -2}, 80, 80, 255);
    CHECK_THROWS_AS(select_nav_goal(grid, {0, 0, 0.5}, std::nullopt, cfg), Error);
  }
}

TEST_CASE("select_nav_goal matches the exhaustive oracle on random grids") {
  NavConfig cfg;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    OccupancyGrid grid = free_grid();
    // random rectangular obstacles and soft-cost patches
    for (int k = 0; k < 6; ++k) {
      double x0 = -2.0 + 3.6 * u01(rng), y0 = -2.0 + 3.6 * u01(rng);
      double w = 0.2 + 0.7 * u01(rng), h = 0.2 + 0.7 * u01(rng);
      grid.fill_rect(x0, y0, x0 + w, y0 + h,
                     u01(rng) < 0.5 ? 255 : static_cast<std::uint8_t>(40 + 150 * u01(rng)));
    }
    std::optional<Point2> p_aff;
    if (u01(rng) < 0.7) {
      double a = 2.0 * std::numbers::pi * u01(rng);
      p_aff = Point2{0.85 * std::cos(a), 0.85 * std::sin(a)};
    }
    auto oracle = oracle_nav_goal(grid, {0, 0, 0.5}, p_aff, cfg);
    if (!oracle) {
      CHECK_THROWS_AS(select_nav_goal(grid, {0, 0, 0.5}, p_aff, cfg), Error);
      continue;
    }
    Pose2D goal = select_nav_goal(grid, {0, 0, 0.5}, p_aff, cfg);
    CHECK(goal.position.x == oracle->position.x);
    CHECK(goal.position.y == oracle->position.y);
    CHECK(goal.theta == oracle->theta);
    // returned goals are collision-free and face the object
    Footprint fp{cfg.footprint_half_x, cfg.footprint_half_y};
    CHECK(std::isfinite(footprint_cost(grid, goal, fp, cfg.lethal_threshold)));
    double heading = std::atan2(0.0 - goal.position.y, 0.0 - goal.position.x);
    double diff = std::abs(normalize_angle(heading) - goal.theta);
    CHECK(std::min(diff, 2.0 * std::numbers::pi - diff) < cfg.angular_step);
    ++checked;
  }
  CHECK(checked > 30);
}

TEST_CASE("lambda_aff monotonicity") {
  // larger lambda never increases the distance to p_aff on a fixed grid
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    OccupancyGrid grid = free_grid();
    for (int k = 0; k < 5; ++k) {
      double x0 = -1.8 + 3.0 * u01(rng), y0 = -1.8 + 3.0 * u01(rng);
      grid.fill_rect(x0, y0, x0 + 0.5, y0 + 0.5,
                     static_cast<std::uint8_t>(60 + 180 * u01(rng)));
    }
    Point2 p_aff{0.85, 0.0};
    double prev = std::numeric_limits<double>::infinity();
    for (double lambda : {0.0, 0.5, 1.0, 2.0, 5.0, 20.0}) {
      NavConfig cfg;
      cfg.lambda_aff = lambda;
      Pose2D goal = select_nav_goal(grid, {0, 0, 0.5}, p_aff, cfg);
      double d = std::hypot(goal.position.x - p_aff.x, goal.position.y - p_aff.y);
      if (std::isfinite(prev)) CHECK(d <= prev + 1e-12);
      prev = d;
    }
  }
}

TEST_CASE("grid_path_exists") {
  OccupancyGrid grid = free_grid();

  SECTION("free grid connects everything") {
    CHECK(grid_path_exists(grid, {-1.5, -1.5}, {1.5, 1.5}));
  }

  SECTION("a closed room is unreachable") {
    OccupancyGrid walled = grid;
    // box around the goal
    walled.fill_rect(0.5, 0.5, 1.5, 0.6, 255);
    walled.fill_rect(0.5, 1.4, 1.5, 1.5, 255);
    walled.fill_rect(0.5, 0.5, 0.6, 1.5, 255);
    walled.fill_rect(1.4, 0.5, 1.5, 1.5, 255);
    CHECK_FALSE(grid_path_exists(walled, {-1.5, -1.5}, {1.0, 1.0}));
  }

  SECTION("matches a reference search around an obstacle") {
    OccupancyGrid blocked = grid;
    blocked.fill_rect(-0.2, -2.0, 0.2, 1.5, 255);  // wall with a gap at the top
    CHECK(grid_path_exists(blocked, {-1.5, 0.0}, {1.5, 0.0}));

    // reference: plain BFS reimplementation
    auto reference = [&](Point2 from, Point2 to) {
      int sx = blocked.cell_x(from.x), sy = blocked.cell_y(from.y);
      int gx = blocked.cell_x(to.x), gy = blocked.cell_y(to.y);
      std::vector<char> seen(blocked.width * blocked.height, 0);
      std::queue<std::pair<int, int>> q;
      q.push({sx, sy});
      seen[sy * blocked.width + sx] = 1;
      while (!q.empty()) {
        auto [x, y] = q.front();
        q.pop();
        if (x == gx && y == gy) return true;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            int nx = x + dx, ny = y + dy;
            if ((dx == 0 && dy == 0) || !blocked.in_bounds(nx, ny)) continue;
            if (seen[ny * blocked.width + nx] || blocked.at(nx, ny) >= 254) continue;
            seen[ny * blocked.width + nx] = 1;
            q.push({nx, ny});
          }
      }
      return false;
    };
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> pos(-1.8, 1.8);
    for (int i = 0; i < 50; ++i) {
      Point2 a{pos(rng), pos(rng)}, b{pos(rng), pos(rng)};
      if (blocked.at(blocked.cell_x(a.x), blocked.cell_y(a.y)) >= 254) continue;
      if (blocked.at(blocked.cell_x(b.x), blocked.cell_y(b.y)) >= 254) continue;
      CHECK(grid_path_exists(blocked, a, b) == reference(a, b));
    }
  }
}

TEST_CASE("select_nav_goal is deterministic") {
  OccupancyGrid grid = free_grid();
  grid.fill_rect(0.3, -0.4, 1.2, 0.4, 120);
  NavConfig cfg;
  Pose2D a = select_nav_goal(grid, {0, 0, 0.5}, Point2{0.85, 0.0}, cfg);
  Pose2D b = select_nav_goal(grid, {0, 0, 0.5}, Point2{0.85, 0.0}, cfg);
  CHECK(a.position.x == b.position.x);
  CHECK(a.position.y == b.position.y);
  CHECK(a.theta == b.theta);
}
