#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "asp/common.hpp"
#include "asp/config.hpp"
#include "asp/geom.hpp"
#include "asp/nav.hpp"
#include "asp/scene_types.hpp"

namespace asp {

// Prismatic articulation. Base-cloud points and parts inside the moving
// region translate along the axis as the joint opens.
struct PrismaticJoint {
  Point3 axis;  // object frame, unit
  double range = 0.3;
  Aabb moving_region;
};

struct ScenePart {
  std::string name;
  PointCloud point_cloud;  // object frame
  SkillKind skill = SkillKind::kGrasp;
  bool pressable = false;
  bool moves_with_joint = false;
};

struct SceneObject {
  std::string label;
  Pose3D pose;             // object -> scene
  PointCloud point_cloud;  // object frame, includes part geometry
  std::vector<ScenePart> parts;
  std::optional<PrismaticJoint> joint;
  bool container = false;
  bool removable = false;
  bool fixed = false;      // furniture; cannot be lifted
  Point3 removal_axis;     // object frame, outward; meaningful when removable
  int supported_by = -1;   // scene object index, -1 = ground
};

struct Goal {
  enum class Kind { kContained, kPressed, kOpenAtLeast, kHeld, kDetached, kPlacedOn };
  Kind kind = Kind::kHeld;
  int object_index = -1;
  int target_index = -1;
  std::string part_name;
  double tau = 0.0;
};

struct TaskSpec {
  enum class Scoring { kAllOrNothing, kPerContainedObject };
  std::string name;
  std::string query;
  Scoring scoring = Scoring::kAllOrNothing;
  std::vector<Goal> goals;
};

struct SceneSpec {
  std::string template_name;
  std::uint64_t seed = 0;
  std::vector<SceneObject> objects;
  std::optional<OccupancyGrid> grid;
  std::vector<Pose3D> keyframes;
  Pose3D home_camera;
  Pose2D start_base;
  Point3 arm_base;
  std::vector<TaskSpec> tasks;

  const TaskSpec* find_task(const std::string& query) const {
    for (const auto& task : tasks)
      if (task.query == query) return &task;
    return nullptr;
  }
};

struct ObjectState {
  Pose3D pose;
  int supported_by = -1;
  int contained_in = -1;
  bool attached_to_gripper = false;
  double open_fraction = 0.0;
  std::set<std::string> pressed;
  bool detached = false;
};

inline Pose3D make_camera(const Point3& position, double yaw, double pitch) {
  return Pose3D{position,
                (Quaternion::from_yaw(yaw) * Quaternion::from_pitch(pitch)).normalized()};
}

inline Pose3D camera_look_at(const Point3& from, const Point3& at) {
  Point3 d = at - from;
  double yaw = std::atan2(d.y, d.x);
  double pitch = -std::asin(std::clamp(d.z / std::max(d.norm(), 1e-9), -1.0, 1.0));
  return make_camera(from, yaw, pitch);
}

// Deterministic per-event noise draw: hashing keeps rendering pure.
inline double hash_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = fnv1a(&seed, sizeof(seed));
  h = fnv1a(&a, sizeof(a), h);
  h = fnv1a(&b, sizeof(b), h);
  return static_cast<double>(h >> 11) / static_cast<double>(1ull << 53);
}

// Pinhole used for segment metadata: 640x480, f = 400.
struct CameraModel {
  static constexpr double kWidth = 640.0;
  static constexpr double kHeight = 480.0;
  static constexpr double kFocal = 400.0;
  static constexpr double kNear = 0.05;
  static constexpr double kFar = 8.0;
};

// Deterministic kinematic world. Skills are the only mutators; rendering and
// judging never change state.
class SimWorld {
 public:
  SimWorld(SceneSpec spec, std::uint64_t seed, NoiseConfig noise = {})
      : spec_(std::move(spec)), seed_(seed), noise_(noise), rng_(seed ^ 0x9e3779b97f4a7c15ull) {
    states_.resize(spec_.objects.size());
    for (std::size_t i = 0; i < spec_.objects.size(); ++i) {
      states_[i].pose = spec_.objects[i].pose;
      states_[i].supported_by = spec_.objects[i].supported_by;
    }
    base_pose_ = spec_.start_base;
    gripper_pose_ = home_gripper_pose();
  }

  const SceneSpec& spec() const { return spec_; }
  std::uint64_t seed() const { return seed_; }
  const NoiseConfig& noise() const { return noise_; }
  std::size_t object_count() const { return spec_.objects.size(); }
  const ObjectState& state(std::size_t i) const { return states_[i]; }
  const Pose2D& base_pose() const { return base_pose_; }
  const Pose3D& gripper_pose() const { return gripper_pose_; }

  Pose3D home_gripper_pose() const {
    if (spec_.grid) {
      // mobile: gripper rides ahead of the base
      double c = std::cos(base_pose_.theta), s = std::sin(base_pose_.theta);
      return Pose3D{{base_pose_.position.x + 0.30 * c, base_pose_.position.y + 0.30 * s, 0.55},
                    Quaternion::from_yaw(base_pose_.theta)};
    }
    return Pose3D{spec_.arm_base + Point3{0.20, 0.0, 0.45}, Quaternion{}};
  }

  void set_base_pose(const Pose2D& pose) {
    base_pose_ = pose;
    gripper_pose_ = home_gripper_pose();
    sync_attached();
  }

  void set_gripper_pose(const Pose3D& pose) {
    gripper_pose_ = pose;
    sync_attached();
  }

  // Current world-frame cloud, articulation applied.
  PointCloud object_cloud(std::size_t i) const {
    const auto& obj = spec_.objects[i];
    const auto& st = states_[i];
    PointCloud out;
    out.reserve(obj.point_cloud.size());
    Point3 shift = joint_shift(obj, st);
    for (const auto& p : obj.point_cloud) {
      Point3 local = p;
      if (obj.joint && obj.joint->moving_region.contains(p)) local = local + shift;
      out.push_back(st.pose.transform(local));
    }
    return out;
  }

  PointCloud part_cloud(std::size_t i, const ScenePart& part) const {
    const auto& obj = spec_.objects[i];
    const auto& st = states_[i];
    Point3 shift = part.moves_with_joint ? joint_shift(obj, st) : Point3{};
    PointCloud out;
    out.reserve(part.point_cloud.size());
    for (const auto& p : part.point_cloud) out.push_back(st.pose.transform(p + shift));
    return out;
  }

  Point3 object_centroid(std::size_t i) const { return centroid(object_cloud(i)); }

  std::optional<std::size_t> attached_object() const {
    for (std::size_t i = 0; i < states_.size(); ++i)
      if (states_[i].attached_to_gripper) return i;
    return std::nullopt;
  }

  bool gripper_holds_anything() const {
    return attached_object().has_value() || pinched_part_.has_value();
  }

  // Closes the gripper on an object. Slip noise displaces the object and
  // leaves the gripper empty.
  bool try_attach(std::size_t i) {
    if (attached_object())
      throw Error(ErrorCode::InvalidParameter, "gripper already holds an object");
    if (noise_.grasp_slip_probability > 0.0 &&
        uniform() < noise_.grasp_slip_probability) {
      double angle = uniform() * 2.0 * std::numbers::pi;
      double dist = 0.03 + 0.05 * uniform();
      states_[i].pose.position.x += dist * std::cos(angle);
      states_[i].pose.position.y += dist * std::sin(angle);
      return false;
    }
    states_[i].attached_to_gripper = true;
    states_[i].supported_by = -1;
    states_[i].contained_in = -1;
    states_[i].pose.position = gripper_pose_.position;
    return true;
  }

  void pinch_part(std::size_t i, const std::string& part_name) {
    pinched_part_ = std::make_pair(i, part_name);
  }

  void release_pinch() { pinched_part_.reset(); }

  bool pinch_slipped() {
    if (noise_.grasp_slip_probability > 0.0 &&
        uniform() < noise_.grasp_slip_probability) {
      pinched_part_.reset();
      return true;
    }
    return false;
  }

  // Opens the hand and rests the held object on the target: bottom on the
  // support top (or the container floor), supported/contained relations
  // updated instantaneously.
  void release_on(std::size_t target) {
    auto held = attached_object();
    if (!held) throw Error(ErrorCode::InvalidParameter, "nothing to release");
    std::size_t i = *held;
    states_[i].attached_to_gripper = false;
    PointCloud target_cloud = object_cloud(target);
    Aabb target_box = Aabb::of(target_cloud);
    Point3 target_top_center{target_box.center().x, target_box.center().y, target_box.hi.z};

    Aabb held_box = Aabb::of(object_cloud(i));
    double half_below = states_[i].pose.position.z - held_box.lo.z;
    const auto& target_obj = spec_.objects[target];
    double rest_z;
    if (target_obj.container) {
      rest_z = target_box.lo.z + 0.005 + half_below;
      states_[i].contained_in = static_cast<int>(target);
    } else {
      rest_z = target_box.hi.z + half_below;
      states_[i].contained_in = -1;
    }
    states_[i].pose.position = {target_top_center.x, target_top_center.y, rest_z};
    states_[i].supported_by = static_cast<int>(target);
  }

  // Press event at a world point: the nearest pressable part within the
  // tolerance toggles its pressed flag.
  std::optional<std::string> press_at(std::size_t i, const Point3& point, double tol) {
    const auto& obj = spec_.objects[i];
    const ScenePart* best = nullptr;
    double best_dist = tol;
    for (const auto& part : obj.parts) {
      if (!part.pressable) continue;
      double d = min_distance_to_cloud(point, part_cloud(i, part));
      if (d <= best_dist) {
        best_dist = d;
        best = &part;
      }
    }
    if (!best) return std::nullopt;
    states_[i].pressed.insert(best->name);
    return best->name;
  }

  // Pull along a world-frame axis. Prismatic joints accumulate open_fraction
  // from the axis-aligned displacement; removables detach into the gripper.
  struct PullResult {
    bool moved = false;
    bool detached = false;
    double open_fraction = 0.0;
  };

  PullResult pull(std::size_t i, const Point3& axis_world, double distance,
                  double align_min) {
    PullResult result;
    const auto& obj = spec_.objects[i];
    auto& st = states_[i];
    if (obj.joint) {
      Point3 joint_axis_world = st.pose.orientation.rotate(obj.joint->axis);
      double along = axis_world.dot(joint_axis_world);
      if (along >= align_min) {
        double delta = distance * along / obj.joint->range;
        st.open_fraction = std::clamp(st.open_fraction + delta, 0.0, 1.0);
        result.moved = true;
      }
      result.open_fraction = st.open_fraction;
      return result;
    }
    if (obj.removable && !st.detached) {
      Point3 out_world = st.pose.orientation.rotate(obj.removal_axis);
      if (axis_world.dot(out_world) >= align_min) {
        st.detached = true;
        st.supported_by = -1;
        st.contained_in = -1;
        st.attached_to_gripper = true;
        st.pose.position = gripper_pose_.position;
        pinched_part_.reset();
        result.moved = true;
        result.detached = true;
      }
      return result;
    }
    return result;
  }

  SegmentedFrame render_segmented_frame(const Pose3D& camera, int frame_id,
                                        const NoiseConfig& noise) const {
    SegmentedFrame frame;
    frame.camera_pose = camera;
    frame.frame_id = frame_id;
    Point3 fwd = camera.orientation.rotate({1, 0, 0});
    Point3 left = camera.orientation.rotate({0, 1, 0});
    Point3 up = camera.orientation.rotate({0, 0, 1});

    struct Visible {
      std::size_t index;
      double depth;
      double u, v;
    };
    std::vector<Visible> visible;
    for (std::size_t i = 0; i < spec_.objects.size(); ++i) {
      if (states_[i].attached_to_gripper) continue;  // in-hand objects are not mapped
      Point3 c = object_centroid(i);
      Point3 d = c - camera.position;
      double depth = d.dot(fwd);
      if (depth < CameraModel::kNear || depth > CameraModel::kFar) continue;
      double u = CameraModel::kWidth / 2.0 - CameraModel::kFocal * d.dot(left) / depth;
      double v = CameraModel::kHeight / 2.0 - CameraModel::kFocal * d.dot(up) / depth;
      if (u < 0.0 || u >= CameraModel::kWidth || v < 0.0 || v >= CameraModel::kHeight)
        continue;
      visible.push_back({i, depth, u, v});
    }
    // simple z-test: a nearer centroid projecting close by occludes
    std::vector<Visible> kept;
    for (const auto& a : visible) {
      bool occluded = false;
      for (const auto& b : visible) {
        if (a.index == b.index) continue;
        if (b.depth < a.depth - 0.05 &&
            std::hypot(a.u - b.u, a.v - b.v) < 15.0)
          occluded = true;
      }
      if (!occluded) kept.push_back(a);
    }

    int mask_id = 0;
    for (const auto& vis : kept) {
      PointCloud cloud = object_cloud(vis.index);
      bool oversegment =
          noise.p_oversegment > 0.0 &&
          hash_uniform(seed_, static_cast<std::uint64_t>(frame_id) + 7919,
                       vis.index) < noise.p_oversegment;
      if (!oversegment) {
        frame.segments.push_back(
            make_segment(vis.index, std::move(cloud), camera, fwd, left, up, mask_id++));
      } else {
        // split along the widest axis with a shared overlap band so the
        // merge step can recover the object
        auto ext = aabb_extents(cloud);
        int axis = 0;
        if (ext[1] > ext[0]) axis = 1;
        if (ext[2] > ext[axis == 0 ? 0 : 1] && ext[2] > ext[axis]) axis = 2;
        auto coord = [axis](const Point3& p) {
          return axis == 0 ? p.x : (axis == 1 ? p.y : p.z);
        };
        PointCloud sorted = cloud;
        std::sort(sorted.begin(), sorted.end(), [&](const Point3& a, const Point3& b) {
          if (coord(a) != coord(b)) return coord(a) < coord(b);
          if (a.x != b.x) return a.x < b.x;
          if (a.y != b.y) return a.y < b.y;
          return a.z < b.z;
        });
        std::size_t n = sorted.size();
        std::size_t lo_end = std::max<std::size_t>(1, (n * 65) / 100);
        std::size_t hi_begin = std::min(n - 1, (n * 35) / 100);
        PointCloud first(sorted.begin(), sorted.begin() + lo_end);
        PointCloud second(sorted.begin() + hi_begin, sorted.end());
        frame.segments.push_back(make_segment(vis.index, std::move(first), camera,
                                              fwd, left, up, mask_id++));
        frame.segments.push_back(make_segment(vis.index, std::move(second), camera,
                                              fwd, left, up, mask_id++));
      }
    }
    return frame;
  }

  double judge(const TaskSpec& task) const {
    if (task.scoring == TaskSpec::Scoring::kPerContainedObject) {
      double score = 0.0;
      for (const auto& goal : task.goals)
        if (goal_holds(goal)) score += 0.5;
      return std::min(score, 1.0);
    }
    for (const auto& goal : task.goals)
      if (!goal_holds(goal)) return 0.0;
    return 1.0;
  }

  bool goal_holds(const Goal& goal) const {
    const auto& st = states_[goal.object_index];
    switch (goal.kind) {
      case Goal::Kind::kContained: return st.contained_in == goal.target_index;
      case Goal::Kind::kPressed: return st.pressed.count(goal.part_name) > 0;
      case Goal::Kind::kOpenAtLeast: return st.open_fraction >= goal.tau;
      case Goal::Kind::kHeld: return st.attached_to_gripper;
      case Goal::Kind::kDetached: return st.detached;
      case Goal::Kind::kPlacedOn: return st.supported_by == goal.target_index;
    }
    return false;
  }

  std::uint64_t digest() const {
    std::uint64_t h = fnv1a(&seed_, sizeof(seed_));
    auto mix_double = [&h](double v) { h = fnv1a(&v, sizeof(v), h); };
    auto mix_int = [&h](std::int64_t v) { h = fnv1a(&v, sizeof(v), h); };
    for (const auto& st : states_) {
      mix_double(st.pose.position.x);
      mix_double(st.pose.position.y);
      mix_double(st.pose.position.z);
      mix_double(st.pose.orientation.w);
      mix_double(st.pose.orientation.x);
      mix_double(st.pose.orientation.y);
      mix_double(st.pose.orientation.z);
      mix_int(st.supported_by);
      mix_int(st.contained_in);
      mix_int(st.attached_to_gripper ? 1 : 0);
      mix_double(st.open_fraction);
      mix_int(st.detached ? 1 : 0);
      for (const auto& name : st.pressed) h = fnv1a(name, h);
    }
    mix_double(base_pose_.position.x);
    mix_double(base_pose_.position.y);
    mix_double(base_pose_.theta);
    mix_double(gripper_pose_.position.x);
    mix_double(gripper_pose_.position.y);
    mix_double(gripper_pose_.position.z);
    return h;
  }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }

 private:
  Point3 joint_shift(const SceneObject& obj, const ObjectState& st) const {
    if (!obj.joint) return {};
    return obj.joint->axis * (st.open_fraction * obj.joint->range);
  }

  void sync_attached() {
    if (auto held = attached_object())
      states_[*held].pose.position = gripper_pose_.position;
  }

  Segment make_segment(std::size_t index, PointCloud cloud, const Pose3D& camera,
                       const Point3& fwd, const Point3& left, const Point3& up,
                       int mask_id) const {
    Segment seg;
    seg.mask_id = mask_id;
    seg.gt_label = spec_.objects[index].label;
    double u_min = 1e18, u_max = -1e18, v_min = 1e18, v_max = -1e18;
    for (const auto& p : cloud) {
      Point3 d = p - camera.position;
      double depth = std::max(d.dot(fwd), CameraModel::kNear);
      double u = CameraModel::kWidth / 2.0 - CameraModel::kFocal * d.dot(left) / depth;
      double v = CameraModel::kHeight / 2.0 - CameraModel::kFocal * d.dot(up) / depth;
      u_min = std::min(u_min, u); u_max = std::max(u_max, u);
      v_min = std::min(v_min, v); v_max = std::max(v_max, v);
    }
    seg.touches_border = u_min < 2.0 || v_min < 2.0 ||
                         u_max > CameraModel::kWidth - 2.0 ||
                         v_max > CameraModel::kHeight - 2.0;
    double du = std::max(1.0, std::min(u_max, CameraModel::kWidth) - std::max(u_min, 0.0));
    double dv = std::max(1.0, std::min(v_max, CameraModel::kHeight) - std::max(v_min, 0.0));
    seg.segment_area = static_cast<std::size_t>(du * dv);
    for (const auto& part : spec_.objects[index].parts) {
      GtPart gt;
      gt.name = part.name;
      gt.skill = part.skill;
      gt.point_cloud = part_cloud(index, part);
      seg.gt_parts.push_back(std::move(gt));
    }
    seg.point_cloud = std::move(cloud);
    return seg;
  }

  SceneSpec spec_;
  std::uint64_t seed_;
  NoiseConfig noise_;
  std::mt19937_64 rng_;
  std::vector<ObjectState> states_;
  Pose2D base_pose_;
  Pose3D gripper_pose_;
  std::optional<std::pair<std::size_t, std::string>> pinched_part_;
};

}  // namespace asp
