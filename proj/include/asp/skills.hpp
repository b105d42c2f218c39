#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "asp/affordance.hpp"
#include "asp/common.hpp"
#include "asp/config.hpp"
#include "asp/geom.hpp"
#include "asp/sim.hpp"
#include "asp/sim_backends.hpp"

namespace asp {

struct SkillResult {
  bool success = false;
  std::string reason;
  int attempts = 0;               // grasp candidates tried
  std::optional<Pose3D> goal;
  bool triggered_remap = false;
  bool picked = false;            // held_object should be set
  bool released = false;          // held_object should be cleared
};

struct SkillContext {
  SimWorld& world;
  GraspProposer& proposer;
  MotionChecker& checker;
  SkillConfig cfg;
};

inline bool verify_held(const SimWorld& world) { return world.gripper_holds_anything(); }

// Maps a perceived object cloud onto a world object. Objects further than
// the association tolerance are treated as moved (location unknown).
inline std::optional<std::size_t> resolve_world_target(const SimWorld& world,
                                                       const Point3& map_centroid,
                                                       double tol) {
  std::optional<std::size_t> best_index;
  double best = tol;
  for (std::size_t i = 0; i < world.object_count(); ++i) {
    if (world.state(i).attached_to_gripper) continue;
    double d = (world.object_centroid(i) - map_centroid).norm();
    if (d < best) {
      best = d;
      best_index = i;
    }
  }
  return best_index;
}

namespace detail {

// Shared grasp loop: filter proposals near the filter cloud, then walk the
// top candidates until the motion check accepts one.
inline SkillResult grasp_with_filter(SkillContext& ctx, std::size_t target,
                                     const PointCloud& context_cloud,
                                     const PointCloud& filter_cloud) {
  SkillResult result;
  const auto& obj = ctx.world.spec().objects[target];
  if (obj.fixed) {
    result.reason = "object cannot be lifted: it is fixed in place";
    return result;
  }
  if (obj.removable && !ctx.world.state(target).detached) {
    result.reason = "object is secured and must be pulled free first";
    return result;
  }
  auto candidates = ctx.proposer.propose(context_cloud);
  NeighborGrid near_filter(filter_cloud, ctx.cfg.proximity_filter);
  std::vector<GraspCandidate> kept;
  for (const auto& cand : candidates)
    if (near_filter.has_neighbor(cand.pose.position)) kept.push_back(cand);
  if (kept.empty()) {
    result.reason = "no grasp candidates near the target geometry";
    return result;
  }
  std::size_t limit = std::min(kept.size(), ctx.cfg.max_grasp_attempts);
  for (std::size_t i = 0; i < limit; ++i) {
    ++result.attempts;
    auto check = ctx.checker.feasible(kept[i].pose);
    if (!check.feasible) continue;
    ctx.world.set_gripper_pose(kept[i].pose);
    result.goal = kept[i].pose;
    if (!ctx.world.try_attach(target)) {
      result.reason = "grasp slipped: the object moved and its location is unknown";
      result.triggered_remap = true;
      return result;
    }
    if (!verify_held(ctx.world)) {
      result.reason = "gripper is empty after the grasp";
      result.triggered_remap = true;
      return result;
    }
    result.success = true;
    result.picked = true;
    return result;
  }
  result.reason = "no feasible grasp: motion planning failed for the top candidates";
  return result;
}

inline Point3 horizontal_pull_axis(const PointCloud& aff_cloud,
                                   const Point3& obj_centroid, double min_horizontal) {
  Point3 n = dominant_normal(aff_cloud);
  if (n.dot(centroid(aff_cloud) - obj_centroid) < 0.0) n = n * -1.0;
  double nxy = std::hypot(n.x, n.y);
  if (nxy < min_horizontal)
    throw Error(ErrorCode::DegenerateGeometry, "no horizontal pulling direction");
  return {n.x / nxy, n.y / nxy, 0.0};
}

}  // namespace detail

inline SkillResult skill_grasp(SkillContext& ctx, std::size_t target,
                               const PointCloud& object_cloud,
                               const PointCloud& context_cloud) {
  return detail::grasp_with_filter(ctx, target, context_cloud, object_cloud);
}

inline SkillResult skill_grasp_part(SkillContext& ctx, std::size_t target,
                                    const Affordance& aff,
                                    const PointCloud& context_cloud) {
  return detail::grasp_with_filter(ctx, target, context_cloud, aff.point_cloud);
}

inline SkillResult skill_place(SkillContext& ctx, std::size_t target, double clearance) {
  SkillResult result;
  auto held = ctx.world.attached_object();
  if (!held) {
    result.reason = "nothing is held";
    return result;
  }
  PointCloud target_cloud = ctx.world.object_cloud(target);
  Aabb box = Aabb::of(target_cloud);
  Pose3D goal{{box.center().x, box.center().y, box.hi.z + clearance + 0.03},
              Quaternion{}};
  auto check = ctx.checker.feasible(goal);
  if (!check.feasible) {
    result.reason = "release goal infeasible: " + check.reason;
    return result;
  }
  ctx.world.set_gripper_pose(goal);
  ctx.world.release_on(target);
  result.goal = goal;
  result.success = true;
  result.released = true;
  return result;
}

inline SkillResult skill_drop(SkillContext& ctx, std::size_t target, double drop_height) {
  return skill_place(ctx, target, drop_height);
}

inline SkillResult skill_tip_push(SkillContext& ctx, std::size_t target,
                                  const Affordance& aff, const Point3& obj_centroid) {
  SkillResult result;
  Point3 goal_point = centroid(aff.point_cloud);
  Point3 approach{0, 0, -1};
  try {
    Point3 n = dominant_normal(aff.point_cloud);
    if (n.dot(goal_point - obj_centroid) < 0.0) n = n * -1.0;
    approach = n * -1.0;  // push against the outward normal
  } catch (const Error&) {
    // fall back to a top-down push on degenerate part geometry
  }
  Pose3D goal{goal_point, Quaternion::facing(approach)};
  auto check = ctx.checker.feasible(goal);
  if (!check.feasible) {
    result.reason = "push goal infeasible: " + check.reason;
    return result;
  }
  ctx.world.set_gripper_pose(goal);
  ctx.world.press_at(target, goal_point, ctx.cfg.press_tol);
  result.goal = goal;
  result.success = true;
  return result;
}

namespace detail {

inline SkillResult pull_skill(SkillContext& ctx, std::size_t target,
                              const Affordance& aff, const Point3& obj_centroid,
                              bool pinch) {
  SkillResult result;
  Point3 attach = centroid(aff.point_cloud);
  PointCloud target_cloud = ctx.world.object_cloud(target);
  if (min_distance_to_cloud(attach, target_cloud) > ctx.cfg.pinch_attach_tol) {
    result.reason = "nothing to pinch at the goal pose";
    return result;
  }
  Point3 axis;
  try {
    axis = horizontal_pull_axis(aff.point_cloud, obj_centroid,
                                0.1 /* min horizontal component */);
  } catch (const Error& e) {
    result.reason = e.what();
    return result;
  }
  // pinch: gripper axis horizontal facing the part; hook: fingers vertical
  // from above
  Pose3D goal{attach, pinch ? Quaternion::facing(axis * -1.0)
                            : Quaternion::facing({0, 0, -1})};
  auto check = ctx.checker.feasible(goal);
  if (!check.feasible) {
    result.reason = "pull goal infeasible: " + check.reason;
    return result;
  }
  ctx.world.set_gripper_pose(goal);
  result.goal = goal;

  if (pinch) {
    ctx.world.pinch_part(target, aff.part);
    if (ctx.world.pinch_slipped()) {
      result.reason = "pinch slipped off the part";
      result.triggered_remap = true;
      return result;
    }
  }
  auto pull = ctx.world.pull(target, axis, ctx.cfg.pull_distance, ctx.cfg.axis_align_min);
  if (pull.detached) {
    if (!verify_held(ctx.world)) {
      result.reason = "gripper is empty after the pull";
      result.triggered_remap = true;
      return result;
    }
    result.success = true;
    result.picked = true;
    return result;
  }
  if (pinch) ctx.world.release_pinch();
  if (!pull.moved) {
    const auto& obj = ctx.world.spec().objects[target];
    if (pinch && obj.removable) {
      // the pull direction missed the removal axis and the part stayed put
      result.reason = "pull did not free the part";
      result.triggered_remap = true;
      return result;
    }
    result.reason = "pulling direction did not move the part";
    return result;
  }
  result.success = true;
  return result;
}

}  // namespace detail

inline SkillResult skill_pinch_pull(SkillContext& ctx, std::size_t target,
                                    const Affordance& aff, const Point3& obj_centroid) {
  return detail::pull_skill(ctx, target, aff, obj_centroid, true);
}

inline SkillResult skill_hook_pull(SkillContext& ctx, std::size_t target,
                                   const Affordance& aff, const Point3& obj_centroid) {
  return detail::pull_skill(ctx, target, aff, obj_centroid, false);
}

}  // namespace asp

