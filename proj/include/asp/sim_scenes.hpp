#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "asp/common.hpp"
#include "asp/geom.hpp"
#include "asp/nav.hpp"
#include "asp/sim.hpp"

namespace asp {
namespace clouds {

inline void add_grid_face(PointCloud& out, int fixed_axis, double fixed_value,
                          double a0, double a1, double b0, double b1, double spacing) {
  int na = std::max(2, static_cast<int>(std::round((a1 - a0) / spacing)) + 1);
  int nb = std::max(2, static_cast<int>(std::round((b1 - b0) / spacing)) + 1);
  for (int i = 0; i < na; ++i) {
    for (int j = 0; j < nb; ++j) {
      double a = a0 + (a1 - a0) * i / (na - 1);
      double b = b0 + (b1 - b0) * j / (nb - 1);
      switch (fixed_axis) {
        case 0: out.push_back({fixed_value, a, b}); break;
        case 1: out.push_back({a, fixed_value, b}); break;
        default: out.push_back({a, b, fixed_value}); break;
      }
    }
  }
}

inline PointCloud box_surface(double hx, double hy, double hz, double spacing,
                              bool with_top = true, bool with_bottom = true) {
  PointCloud out;
  add_grid_face(out, 0, -hx, -hy, hy, -hz, hz, spacing);
  add_grid_face(out, 0, +hx, -hy, hy, -hz, hz, spacing);
  add_grid_face(out, 1, -hy, -hx, hx, -hz, hz, spacing);
  add_grid_face(out, 1, +hy, -hx, hx, -hz, hz, spacing);
  if (with_bottom) add_grid_face(out, 2, -hz, -hx, hx, -hy, hy, spacing);
  if (with_top) add_grid_face(out, 2, +hz, -hx, hx, -hy, hy, spacing);
  return out;
}

inline PointCloud sphere_surface(double r, int n) {
  // Fibonacci sphere
  PointCloud out;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    double z = 1.0 - 2.0 * (i + 0.5) / n;
    double rad = std::sqrt(std::max(0.0, 1.0 - z * z));
    double phi = golden * i;
    out.push_back({r * rad * std::cos(phi), r * rad * std::sin(phi), r * z});
  }
  return out;
}

inline PointCloud cylinder_surface(double r, double h, double spacing,
                                   bool with_top = true, bool with_bottom = false) {
  PointCloud out;
  int rings = std::max(2, static_cast<int>(std::round(h / spacing)) + 1);
  int around = std::max(8, static_cast<int>(std::round(2.0 * std::numbers::pi * r / spacing)));
  for (int i = 0; i < rings; ++i) {
    double z = h * i / (rings - 1);
    for (int j = 0; j < around; ++j) {
      double a = 2.0 * std::numbers::pi * j / around;
      out.push_back({r * std::cos(a), r * std::sin(a), z});
    }
  }
  auto add_disc = [&](double z) {
    int nr = std::max(1, static_cast<int>(std::round(r / spacing)));
    for (int i = 1; i <= nr; ++i) {
      double rr = r * i / nr;
      int na = std::max(6, static_cast<int>(std::round(2.0 * std::numbers::pi * rr / spacing)));
      for (int j = 0; j < na; ++j) {
        double a = 2.0 * std::numbers::pi * j / na;
        out.push_back({rr * std::cos(a), rr * std::sin(a), z});
      }
    }
    out.push_back({0, 0, z});
  };
  if (with_top) add_disc(h);
  if (with_bottom) add_disc(0.0);
  return out;
}

// Elliptical slab in the yz plane (thin along x).
inline PointCloud disc_yz(double ry, double rz, double spacing, double thickness = 0.002) {
  PointCloud out;
  int ny = std::max(3, static_cast<int>(std::round(2.0 * ry / spacing)) + 1);
  int nz = std::max(3, static_cast<int>(std::round(2.0 * rz / spacing)) + 1);
  for (int i = 0; i < ny; ++i) {
    for (int j = 0; j < nz; ++j) {
      double y = -ry + 2.0 * ry * i / (ny - 1);
      double z = -rz + 2.0 * rz * j / (nz - 1);
      if ((y * y) / (ry * ry) + (z * z) / (rz * rz) > 1.0) continue;
      out.push_back({-thickness / 2.0, y, z});
      out.push_back({+thickness / 2.0, y, z});
    }
  }
  return out;
}

inline PointCloud shaft_x(double x0, double x1, double r, int rings, int around) {
  PointCloud out;
  for (int i = 0; i < rings; ++i) {
    double x = x0 + (x1 - x0) * i / std::max(1, rings - 1);
    for (int j = 0; j < around; ++j) {
      double a = 2.0 * std::numbers::pi * j / around;
      out.push_back({x, r * std::cos(a), r * std::sin(a)});
    }
  }
  return out;
}

// C-shaped mug handle in the xz plane on the +x side of the body.
inline PointCloud mug_handle(double body_r, double z_lo, double z_hi, double spacing) {
  PointCloud out;
  double cx = body_r + 0.018;
  double cz = (z_lo + z_hi) / 2.0;
  double arc_r = (z_hi - z_lo) / 2.0;
  int n = std::max(8, static_cast<int>(std::round(std::numbers::pi * arc_r / spacing)));
  for (int i = 0; i <= n; ++i) {
    double a = -std::numbers::pi / 2.0 + std::numbers::pi * i / n;
    Point3 center{cx + 0.012 * std::cos(a), 0.0, cz + arc_r * std::sin(a)};
    // small tube cross-section
    for (int j = 0; j < 6; ++j) {
      double b = 2.0 * std::numbers::pi * j / 6;
      out.push_back({center.x + 0.003 * std::cos(b), center.y + 0.003 * std::sin(b),
                     center.z});
    }
  }
  return out;
}

inline PointCloud translated(PointCloud pc, const Point3& t) {
  for (auto& p : pc) p = p + t;
  return pc;
}

inline PointCloud merged(std::initializer_list<PointCloud> parts) {
  PointCloud out;
  for (const auto& pc : parts) out.insert(out.end(), pc.begin(), pc.end());
  return out;
}

}  // namespace clouds

namespace scenes {

inline Pose3D ground_pose(double x, double y, double yaw = 0.0) {
  return Pose3D{{x, y, 0.0}, Quaternion::from_yaw(yaw)};
}

struct SlotSampler {
  std::vector<Point2> slots;
  std::mt19937_64 rng;

  SlotSampler(std::vector<Point2> s, std::uint64_t seed) : slots(std::move(s)), rng(seed) {
    std::shuffle(slots.begin(), slots.end(), rng);
  }

  Point2 next() {
    Point2 p = slots.back();
    slots.pop_back();
    return p;
  }
};

inline SceneObject make_table() {
  SceneObject table;
  table.label = "table";
  table.pose = Pose3D{{0.45, 0.0, -0.02}, Quaternion{}};
  table.point_cloud = clouds::box_surface(0.50, 0.40, 0.02, 0.035);
  table.fixed = true;
  return table;
}

inline SceneObject make_ball(const std::string& label, double r, Point2 at) {
  SceneObject obj;
  obj.label = label;
  obj.pose = Pose3D{{at.x, at.y, r}, Quaternion{}};
  obj.point_cloud = clouds::sphere_surface(r, 220);
  return obj;
}

inline SceneObject make_box_obj(const std::string& label, double hx, double hy, double hz,
                                Point2 at, double yaw = 0.0) {
  SceneObject obj;
  obj.label = label;
  obj.pose = Pose3D{{at.x, at.y, hz}, Quaternion::from_yaw(yaw)};
  obj.point_cloud = clouds::box_surface(hx, hy, hz, 0.008);
  return obj;
}

inline SceneObject make_mug(Point2 at, double yaw) {
  SceneObject mug;
  mug.label = "blue mug";
  mug.pose = Pose3D{{at.x, at.y, 0.0}, Quaternion::from_yaw(yaw)};
  PointCloud body = clouds::cylinder_surface(0.035, 0.10, 0.008, false, true);
  PointCloud handle = clouds::mug_handle(0.035, 0.020, 0.055, 0.006);
  mug.point_cloud = clouds::merged({body, handle});
  ScenePart part;
  part.name = "handle";
  part.skill = SkillKind::kGraspPart;
  part.point_cloud = handle;
  mug.parts.push_back(std::move(part));
  return mug;
}

inline SceneObject make_bowl(const std::string& label, Point2 at, double r = 0.07) {
  SceneObject bowl;
  bowl.label = label;
  bowl.pose = Pose3D{{at.x, at.y, 0.0}, Quaternion{}};
  bowl.point_cloud = clouds::cylinder_surface(r, 0.05, 0.009, false, true);
  bowl.container = true;
  return bowl;
}

inline SceneObject make_duckie(const std::string& label, double r, Point2 at, double yaw) {
  SceneObject duck;
  duck.label = label;
  duck.pose = Pose3D{{at.x, at.y, r}, Quaternion::from_yaw(yaw)};
  PointCloud body = clouds::sphere_surface(r, 260);
  PointCloud head = clouds::translated(clouds::sphere_surface(0.55 * r, 120),
                                       {0.6 * r, 0.0, 1.05 * r});
  duck.point_cloud = clouds::merged({body, head});
  return duck;
}

inline SceneObject make_keyboard(Point2 at, double yaw) {
  SceneObject kb;
  kb.label = "computer keyboard";
  kb.pose = Pose3D{{at.x, at.y, 0.010}, Quaternion::from_yaw(yaw)};
  PointCloud body = clouds::box_surface(0.15, 0.06, 0.010, 0.008);
  auto add_key = [&](const std::string& name, double cx, double cy, double hx, double hy) {
    ScenePart key;
    key.name = name;
    key.skill = SkillKind::kTipPush;
    key.pressable = true;
    key.point_cloud = clouds::translated(
        clouds::box_surface(hx, hy, 0.002, 0.004, true, false), {cx, cy, 0.012});
    kb.parts.push_back(key);
  };
  add_key("space bar", 0.0, -0.045, 0.045, 0.009);
  add_key("enter key", 0.105, 0.030, 0.014, 0.009);
  add_key("escape key", -0.125, 0.048, 0.010, 0.007);
  PointCloud all = body;
  for (const auto& part : kb.parts)
    all.insert(all.end(), part.point_cloud.begin(), part.point_cloud.end());
  kb.point_cloud = std::move(all);
  return kb;
}

inline SceneObject make_bell(Point2 at) {
  SceneObject bell;
  bell.label = "desk bell";
  bell.pose = Pose3D{{at.x, at.y, 0.0}, Quaternion{}};
  PointCloud dome;
  auto sphere = clouds::sphere_surface(0.04, 500);
  for (const auto& p : sphere)
    if (p.z > 0.0) dome.push_back(p);
  ScenePart button;
  button.name = "top button";
  button.skill = SkillKind::kTipPush;
  button.pressable = true;
  button.point_cloud = clouds::translated(
      clouds::cylinder_surface(0.010, 0.008, 0.004, true, false), {0.0, 0.0, 0.038});
  bell.point_cloud = clouds::merged({dome, button.point_cloud});
  bell.parts.push_back(std::move(button));
  return bell;
}

// Vertical corkboard with a pinned thumbtack. The tack head is the pinch
// part; its outward axis points back toward the robot (-x).
inline void add_thumbtack(std::vector<SceneObject>& objects, Point2 board_at) {
  SceneObject board;
  board.label = "cork board";
  board.fixed = true;
  board.pose = Pose3D{{board_at.x, board_at.y, 0.16}, Quaternion{}};
  board.point_cloud = clouds::box_surface(0.008, 0.15, 0.13, 0.012);
  int board_index = static_cast<int>(objects.size());
  objects.push_back(board);

  SceneObject tack;
  tack.label = "red thumbtack";
  double face_x = board_at.x - 0.008;
  tack.pose = Pose3D{{face_x - 0.016, board_at.y + 0.07, 0.18}, Quaternion{}};
  PointCloud head = clouds::disc_yz(0.010, 0.008, 0.0022, 0.002);
  PointCloud shaft = clouds::shaft_x(0.002, 0.016, 0.0015, 10, 6);
  tack.point_cloud = clouds::merged({head, shaft});
  ScenePart head_part;
  head_part.name = "head";
  head_part.skill = SkillKind::kPinchPull;
  head_part.point_cloud = head;
  tack.parts.push_back(std::move(head_part));
  tack.removable = true;
  tack.removal_axis = {-1.0, 0.0, 0.0};
  tack.supported_by = board_index;
  objects.push_back(std::move(tack));
}

inline void add_power_adapter(std::vector<SceneObject>& objects, Point2 at) {
  SceneObject strip;
  strip.label = "power strip";
  strip.fixed = true;
  strip.pose = Pose3D{{at.x, at.y, 0.06}, Quaternion{}};
  strip.point_cloud = clouds::box_surface(0.015, 0.06, 0.06, 0.010);
  int strip_index = static_cast<int>(objects.size());
  objects.push_back(strip);

  SceneObject plug;
  plug.label = "power adapter";
  double face_x = at.x - 0.015;
  plug.pose = Pose3D{{face_x - 0.012, at.y, 0.06}, Quaternion{}};
  PointCloud body = clouds::box_surface(0.010, 0.016, 0.011, 0.0035);
  PointCloud prongs = clouds::merged(
      {clouds::shaft_x(0.010, 0.024, 0.0015, 8, 6),
       clouds::translated(clouds::shaft_x(0.010, 0.024, 0.0015, 8, 6), {0, 0.008, 0}),
       clouds::translated(clouds::shaft_x(0.010, 0.024, 0.0015, 8, 6), {0, -0.008, 0})});
  PointCloud face = clouds::translated(clouds::disc_yz(0.014, 0.009, 0.0030, 0.002),
                                       {-0.011, 0.0, 0.0});
  plug.point_cloud = clouds::merged({body, prongs, face});
  ScenePart face_part;
  face_part.name = "plug";
  face_part.skill = SkillKind::kPinchPull;
  face_part.point_cloud = face;
  plug.parts.push_back(std::move(face_part));
  plug.removable = true;
  plug.removal_axis = {-1.0, 0.0, 0.0};
  plug.supported_by = strip_index;
  objects.push_back(std::move(plug));
}

// Cabinet with one prismatic drawer. The local +x face carries the drawer
// front and a flat pull handle.
inline SceneObject make_drawer_cabinet(const std::string& label, Point3 at, double yaw,
                                       double hx, double hy, double hz, double handle_z,
                                       double range) {
  SceneObject cab;
  cab.label = label;
  cab.fixed = true;
  cab.pose = Pose3D{{at.x, at.y, at.z + hz}, Quaternion::from_yaw(yaw)};
  PointCloud body = clouds::box_surface(hx, hy, hz, 0.02);
  PointCloud panel = clouds::translated(
      clouds::box_surface(0.002, hy * 0.85, hz * 0.6, 0.015), {hx + 0.004, 0.0, 0.0});
  ScenePart handle;
  handle.name = "handle";
  handle.skill = SkillKind::kPinchPull;
  handle.moves_with_joint = true;
  handle.point_cloud = clouds::translated(clouds::disc_yz(0.030, 0.012, 0.004, 0.002),
                                          {hx + 0.015, 0.0, handle_z});
  cab.point_cloud = clouds::merged({body, panel, handle.point_cloud});
  cab.parts.push_back(std::move(handle));
  PrismaticJoint joint;
  joint.axis = {1.0, 0.0, 0.0};
  joint.range = range;
  joint.moving_region = Aabb{{hx - 0.002, -hy, -hz}, {hx + 0.2, hy, hz}};
  cab.joint = joint;
  return cab;
}

}  // namespace scenes

inline SceneSpec generate_scene(const std::string& template_name, std::uint64_t seed);

namespace scenes {

inline void finish_tabletop(SceneSpec& spec) {
  spec.arm_base = {0.0, 0.0, 0.0};
  spec.home_camera = camera_look_at({-0.05, 0.0, 0.85}, {0.45, 0.0, 0.0});
  spec.start_base = Pose2D::make(0.0, 0.0, 0.0);
  for (std::size_t i = 1; i < spec.objects.size(); ++i)
    if (spec.objects[i].supported_by == -1 && spec.objects[i].label != "table")
      spec.objects[i].supported_by = 0;  // table is object 0 in tabletop scenes
}

inline SceneSpec tabletop_pick(std::uint64_t seed) {
  SceneSpec spec;
  spec.template_name = "tabletop-pick";
  spec.seed = seed;
  spec.objects.push_back(make_table());
  SlotSampler slots({{0.30, -0.22}, {0.32, 0.20}, {0.50, -0.05}, {0.55, 0.24},
                     {0.62, -0.25}, {0.66, 0.08}},
                    seed * 977 + 13);
  spec.objects.push_back(make_ball("red ball", 0.030, slots.next()));
  spec.objects.push_back(make_mug(slots.next(), 0.4));
  spec.objects.push_back(make_bowl("white bowl", slots.next()));
  spec.objects.push_back(make_box_obj("toy carrot", 0.055, 0.014, 0.014, slots.next(), 0.3));
  spec.objects.push_back(make_box_obj("yellow box", 0.030, 0.030, 0.030, slots.next()));
  finish_tabletop(spec);

  TaskSpec pick;
  pick.name = "pick-red-ball";
  pick.query = "pick up the red ball";
  pick.goals.push_back({Goal::Kind::kHeld, 1, -1, "", 0.0});
  spec.tasks.push_back(pick);

  TaskSpec place;
  place.name = "ball-in-bowl";
  place.query = "put the red ball in the white bowl";
  place.goals.push_back({Goal::Kind::kContained, 1, 3, "", 0.0});
  spec.tasks.push_back(place);

  TaskSpec mug_task;
  mug_task.name = "pick-mug-by-handle";
  mug_task.query = "pick up the mug by the handle";
  mug_task.goals.push_back({Goal::Kind::kHeld, 2, -1, "", 0.0});
  spec.tasks.push_back(mug_task);
  return spec;
}

inline SceneSpec duckie_pair(std::uint64_t seed) {
  SceneSpec spec;
  spec.template_name = "duckie-pair";
  spec.seed = seed;
  spec.objects.push_back(make_table());
  SlotSampler slots({{0.32, -0.20}, {0.34, 0.18}, {0.55, -0.06}, {0.60, 0.22},
                     {0.63, -0.24}},
                    seed * 1409 + 29);
  spec.objects.push_back(make_duckie("rubber duckie", 0.055, slots.next(), 0.2));
  spec.objects.push_back(make_duckie("rubber duckie", 0.032, slots.next(), -0.5));
  spec.objects.push_back(make_box_obj("toy carrot", 0.055, 0.014, 0.014, slots.next(), 1.1));
  finish_tabletop(spec);

  TaskSpec larger;
  larger.name = "pick-larger-duckie";
  larger.query = "pick up the larger duckie";
  larger.goals.push_back({Goal::Kind::kHeld, 1, -1, "", 0.0});
  spec.tasks.push_back(larger);

  TaskSpec smaller;
  smaller.name = "pick-smaller-duckie";
  smaller.query = "pick up the smaller duckie";
  smaller.goals.push_back({Goal::Kind::kHeld, 2, -1, "", 0.0});
  spec.tasks.push_back(smaller);
  return spec;
}

inline SceneSpec keyboard_scene(std::uint64_t seed) {
  SceneSpec spec;
  spec.template_name = "keyboard";
  spec.seed = seed;
  spec.objects.push_back(make_table());
  SlotSampler slots({{0.42, -0.16}, {0.45, 0.10}, {0.50, -0.02}}, seed * 331 + 7);
  Point2 kb_at = slots.next();
  spec.objects.push_back(make_keyboard(kb_at, 0.0));
  SlotSampler far_slots({{0.28, 0.26}, {0.30, -0.28}, {0.66, 0.26}}, seed * 523 + 3);
  spec.objects.push_back(make_ball("red ball", 0.030, far_slots.next()));
  finish_tabletop(spec);

  TaskSpec press;
  press.name = "press-space-bar";
  press.query = "press the space bar on the keyboard";
  press.goals.push_back({Goal::Kind::kPressed, 1, -1, "space bar", 0.0});
  spec.tasks.push_back(press);
  return spec;
}

inline SceneSpec desk_bell(std::uint64_t seed) {
  SceneSpec spec;
  spec.template_name = "desk-bell";
  spec.seed = seed;
  spec.objects.push_back(make_table());
  SlotSampler slots({{0.35, -0.15}, {0.40, 0.15}, {0.52, 0.0}}, seed * 613 + 11);
  spec.objects.push_back(make_bell(slots.next()));
  spec.objects.push_back(make_box_obj("yellow box", 0.030, 0.030, 0.030, slots.next()));
  finish_tabletop(spec);

  TaskSpec ring;
  ring.name = "ring-bell";
  ring.query = "ring the desk bell";
  ring.goals.push_back({Goal::Kind::kPressed, 1, -1, "top button", 0.0});
  spec.tasks.push_back(ring);
  return spec;
}

inline SceneSpec thumbtack_scene(std::uint64_t seed) {
  SceneSpec spec;
  spec.template_name = "thumbtack";
  spec.seed = seed;
  spec.objects.push_back(make_table());
  std::mt19937_64 rng(seed * 769 + 5);
  double y = std::uniform_real_distribution<double>(-0.12, 0.12)(rng);
  add_thumbtack(spec.objects, {0.58, y});
  finish_tabletop(spec);

  TaskSpec remove;
  remove.name = "remove-thumbtack";
  remove.query = "remove the thumbtack";
  remove.goals.push_back({Goal::Kind::kDetached, 2, -1, "", 0.0});
  spec.tasks.push_back(remove);
  return spec;
}

inline SceneSpec power_adapter(std::uint64_t seed) {
  SceneSpec spec;
  spec.template_name = "power-adapter";
  spec.seed = seed;
  spec.objects.push_back(make_table());
  std::mt19937_64 rng(seed * 881 + 17);
  double y = std::uniform_real_distribution<double>(-0.15, 0.15)(rng);
  add_power_adapter(spec.objects, {0.52, y});
  finish_tabletop(spec);

  TaskSpec unplug;
  unplug.name = "unplug-adapter";
  unplug.query = "unplug the power adapter";
  unplug.goals.push_back({Goal::Kind::kDetached, 2, -1, "", 0.0});
  spec.tasks.push_back(unplug);
  return spec;
}

inline SceneSpec drawer_scene(std::uint64_t seed) {
  SceneSpec spec;
  spec.template_name = "drawer";
  spec.seed = seed;
  spec.objects.push_back(make_table());
  std::mt19937_64 rng(seed * 449 + 23);
  double y = std::uniform_real_distribution<double>(-0.10, 0.10)(rng);
  // drawer front faces the robot (local +x rotated by pi)
  spec.objects.push_back(make_drawer_cabinet("drawer cabinet", {0.60, y, 0.0},
                                             std::numbers::pi, 0.15, 0.12, 0.125,
                                             0.02, 0.30));
  finish_tabletop(spec);

  TaskSpec open;
  open.name = "open-drawer";
  open.query = "open the drawer";
  open.goals.push_back({Goal::Kind::kOpenAtLeast, 1, -1, "", 0.4});
  spec.tasks.push_back(open);
  return spec;
}

// Room-scale scene: metal cabinet with a seeded facing direction, a phone on
// a desk, a floor bin, and two item tables for pick / spatial queries.
inline SceneSpec mobile_room(std::uint64_t seed) {
  SceneSpec spec;
  spec.template_name = "mobile-room";
  spec.seed = seed;
  std::mt19937_64 rng(seed * 2749 + 101);

  const double room_w = 6.0, room_h = 5.0;

  // floor-standing furniture
  SceneObject desk;
  desk.label = "wooden desk";
  desk.fixed = true;
  desk.pose = Pose3D{{5.25, 1.0, 0.36}, Quaternion{}};
  desk.point_cloud = clouds::box_surface(0.30, 0.60, 0.36, 0.05);
  int desk_index = static_cast<int>(spec.objects.size());
  spec.objects.push_back(desk);

  SceneObject phone;
  phone.label = "office phone";
  phone.pose = Pose3D{{5.15, 1.0, 0.75}, Quaternion::from_yaw(std::numbers::pi)};
  PointCloud phone_body = clouds::box_surface(0.055, 0.085, 0.028, 0.007);
  ScenePart keypad;
  keypad.name = "number keypad";
  keypad.skill = SkillKind::kTipPush;
  keypad.pressable = true;
  keypad.point_cloud = clouds::translated(
      clouds::box_surface(0.028, 0.034, 0.002, 0.005, true, false), {0.012, 0.0, 0.030});
  phone.point_cloud = clouds::merged({phone_body, keypad.point_cloud});
  phone.parts.push_back(std::move(keypad));
  phone.supported_by = desk_index;
  int phone_index = static_cast<int>(spec.objects.size());
  spec.objects.push_back(std::move(phone));

  // cabinet position and facing vary per seed
  std::vector<Point2> cab_slots{{2.2, 2.4}, {3.2, 3.4}, {3.8, 2.0}, {2.6, 3.1}};
  Point2 cab_at = cab_slots[rng() % cab_slots.size()];
  double cab_yaw = (rng() % 8) * std::numbers::pi / 4.0;
  spec.objects.push_back(make_drawer_cabinet("metal cabinet", {cab_at.x, cab_at.y, 0.0},
                                             cab_yaw, 0.20, 0.25, 0.40, 0.22, 0.35));
  int cabinet_index = static_cast<int>(spec.objects.size()) - 1;

  SceneObject bin;
  bin.label = "white bin";
  bin.fixed = true;
  std::vector<Point2> bin_slots{{1.0, 2.6}, {1.4, 1.6}, {4.6, 3.6}};
  Point2 bin_at = bin_slots[rng() % bin_slots.size()];
  bin.pose = Pose3D{{bin_at.x, bin_at.y, 0.0}, Quaternion{}};
  bin.point_cloud = clouds::box_surface(0.16, 0.16, 0.14, 0.018, false, true);
  for (auto& p : bin.point_cloud) p.z += 0.14;  // shell sits on the floor
  bin.container = true;
  int bin_index = static_cast<int>(spec.objects.size());
  spec.objects.push_back(std::move(bin));

  auto add_small_table = [&](const std::string& label, Point2 at) {
    SceneObject t;
    t.label = label;
    t.fixed = true;
    t.pose = Pose3D{{at.x, at.y, 0.25}, Quaternion{}};
    t.point_cloud = clouds::box_surface(0.35, 0.35, 0.25, 0.045);
    spec.objects.push_back(std::move(t));
    return static_cast<int>(spec.objects.size()) - 1;
  };
  int table_a = add_small_table("side table", {1.3, 3.9});
  int table_b = add_small_table("side table", {4.8, 4.1});

  auto on_table = [&](SceneObject obj, int table_index, Point2 offset) {
    const auto& table_pose = spec.objects[table_index].pose;
    obj.pose.position.x = table_pose.position.x + offset.x;
    obj.pose.position.y = table_pose.position.y + offset.y;
    obj.pose.position.z += 0.50;
    obj.supported_by = table_index;
    spec.objects.push_back(std::move(obj));
    return static_cast<int>(spec.objects.size()) - 1;
  };

  // double-pick targets and distractors
  struct ItemDef {
    const char* label;
    double r;
  };
  // labels are pairwise token-disjoint so scripted retrieval is one-to-one
  std::vector<ItemDef> pool{{"panda plushie", 0.050}, {"green penguin", 0.045},
                            {"black headphones", 0.042}, {"red screwdriver", 0.030},
                            {"orange carrot", 0.035},    {"rubber duck", 0.038}};
  std::shuffle(pool.begin(), pool.end(), rng);
  std::vector<Point2> item_offsets{{-0.17, -0.17}, {0.17, -0.17}, {-0.17, 0.17}, {0.17, 0.17}};
  std::shuffle(item_offsets.begin(), item_offsets.end(), rng);
  int pick_a = on_table(make_ball(pool[0].label, pool[0].r, {0, 0}), table_a, item_offsets[0]);
  int pick_b = on_table(make_ball(pool[1].label, pool[1].r, {0, 0}), table_a, item_offsets[1]);
  on_table(make_ball(pool[2].label, pool[2].r, {0, 0}), table_a, item_offsets[2]);

  // spatial-disambiguation items: two eggs, an anchor, and a pan
  bool near_first = rng() % 2 == 0;
  int egg_1 = on_table(make_ball("toy egg", 0.024, {0, 0}), table_b, {-0.18, -0.18});
  int egg_2 = on_table(make_ball("toy egg", 0.024, {0, 0}), table_b, {0.18, 0.18});
  int near_egg = near_first ? egg_1 : egg_2;
  Point2 anchor_offset = near_first ? Point2{-0.18, 0.02} : Point2{0.18, -0.02};
  on_table(make_ball("toy tomato", 0.028, {0, 0}), table_b, anchor_offset);
  SceneObject pan;
  pan.label = "frying pan";
  pan.pose = Pose3D{{0, 0, 0.0}, Quaternion{}};
  pan.point_cloud = clouds::cylinder_surface(0.10, 0.035, 0.012, false, true);
  pan.container = true;
  int pan_index = on_table(std::move(pan), table_a, item_offsets[3]);

  // seeded crate obstacles, kept away from the cabinet's approach ring
  std::vector<Point2> crate_slots{{2.0, 1.0}, {4.4, 1.2}, {0.9, 4.2}, {3.4, 4.3}, {5.2, 2.8}};
  std::shuffle(crate_slots.begin(), crate_slots.end(), rng);
  int crates = 1 + static_cast<int>(rng() % 2);
  for (int i = 0, placed = 0; i < static_cast<int>(crate_slots.size()) && placed < crates; ++i) {
    Point2 at = crate_slots[i];
    if (std::hypot(at.x - cab_at.x, at.y - cab_at.y) < 1.7) continue;
    SceneObject crate;
    crate.label = "storage crate";
    crate.fixed = true;
    crate.pose = Pose3D{{at.x, at.y, 0.20}, Quaternion{}};
    crate.point_cloud = clouds::box_surface(0.20, 0.20, 0.20, 0.04);
    spec.objects.push_back(std::move(crate));
    ++placed;
  }

  // occupancy grid: walls plus floor-standing footprints
  OccupancyGrid grid = OccupancyGrid::make(0.05, {0.0, 0.0},
                                           static_cast<int>(room_w / 0.05),
                                           static_cast<int>(room_h / 0.05), 0);
  auto fill_border = [&grid]() {
    for (int x = 0; x < grid.width; ++x) {
      for (int k = 0; k < 2; ++k) {
        grid.set(x, k, 255);
        grid.set(x, grid.height - 1 - k, 255);
      }
    }
    for (int y = 0; y < grid.height; ++y) {
      for (int k = 0; k < 2; ++k) {
        grid.set(k, y, 255);
        grid.set(grid.width - 1 - k, y, 255);
      }
    }
  };
  fill_border();
  for (const auto& obj : spec.objects) {
    if (obj.supported_by != -1) continue;  // only floor furniture blocks
    Aabb box = Aabb::of(obj.point_cloud);
    double cx = obj.pose.position.x, cy = obj.pose.position.y;
    double half = std::max({box.hi.x, -box.lo.x, box.hi.y, -box.lo.y});
    grid.fill_rect(cx - half, cy - half, cx + half, cy + half, 255);
  }
  // soft-cost band near walls
  for (int y = 2; y < grid.height - 2; ++y)
    for (int x = 2; x < grid.width - 2; ++x) {
      if (grid.at(x, y) == 255) continue;
      bool near_lethal = false;
      for (int dy = -2; dy <= 2 && !near_lethal; ++dy)
        for (int dx = -2; dx <= 2 && !near_lethal; ++dx)
          if (grid.in_bounds(x + dx, y + dy) && grid.at(x + dx, y + dy) == 255)
            near_lethal = true;
      if (near_lethal) grid.set(x, y, 60);
    }
  spec.grid = grid;

  spec.start_base = Pose2D::make(0.8, 0.8, 0.5);
  spec.arm_base = {0.8, 0.8, 0.0};
  // four teleop keyframes jointly covering the furniture, both item tables,
  // and every crate/bin slot
  spec.keyframes.push_back(camera_look_at({0.8, 0.8, 1.35}, {3.6, 2.2, 0.4}));
  spec.keyframes.push_back(camera_look_at({5.4, 4.4, 1.35}, {2.2, 2.0, 0.4}));
  spec.keyframes.push_back(camera_look_at({3.0, 4.6, 1.35}, {1.2, 3.6, 0.5}));
  spec.keyframes.push_back(camera_look_at({3.6, 4.6, 1.35}, {4.8, 4.0, 0.5}));
  spec.home_camera = spec.keyframes.front();

  TaskSpec open_cab;
  open_cab.name = "open-cabinet";
  open_cab.query = "open the metal cabinet";
  open_cab.goals.push_back({Goal::Kind::kOpenAtLeast, cabinet_index, -1, "", 0.4});
  spec.tasks.push_back(open_cab);

  TaskSpec dial;
  dial.name = "dial-phone";
  dial.query = "dial a number on the phone";
  dial.goals.push_back({Goal::Kind::kPressed, phone_index, -1, "number keypad", 0.0});
  spec.tasks.push_back(dial);

  TaskSpec double_pick;
  double_pick.name = "double-pick";
  double_pick.query = std::string("put the ") + pool[0].label + " and the " +
                      pool[1].label + " in the white bin";
  double_pick.scoring = TaskSpec::Scoring::kPerContainedObject;
  double_pick.goals.push_back({Goal::Kind::kContained, pick_a, bin_index, "", 0.0});
  double_pick.goals.push_back({Goal::Kind::kContained, pick_b, bin_index, "", 0.0});
  spec.tasks.push_back(double_pick);

  TaskSpec spatial;
  spatial.name = "spatial-disambiguation";
  spatial.query = "place the egg that is near the tomato in the pan";
  spatial.goals.push_back({Goal::Kind::kContained, near_egg, pan_index, "", 0.0});
  spec.tasks.push_back(spatial);
  return spec;
}

}  // namespace scenes

inline SceneSpec generate_scene(const std::string& template_name, std::uint64_t seed) {
  if (template_name == "tabletop-pick") return scenes::tabletop_pick(seed);
  if (template_name == "duckie-pair") return scenes::duckie_pair(seed);
  if (template_name == "keyboard") return scenes::keyboard_scene(seed);
  if (template_name == "desk-bell") return scenes::desk_bell(seed);
  if (template_name == "thumbtack") return scenes::thumbtack_scene(seed);
  if (template_name == "power-adapter") return scenes::power_adapter(seed);
  if (template_name == "drawer") return scenes::drawer_scene(seed);
  if (template_name == "mobile-room") return scenes::mobile_room(seed);
  throw Error(ErrorCode::UnknownTemplate, "unknown scene template: " + template_name);
}

inline std::vector<std::string> scene_template_names() {
  return {"tabletop-pick", "duckie-pair", "keyboard",      "desk-bell",
          "thumbtack",     "power-adapter", "drawer",      "mobile-room"};
}

}  // namespace asp
