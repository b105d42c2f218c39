#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "asp/affordance.hpp"
#include "asp/common.hpp"
#include "asp/config.hpp"
#include "asp/geom.hpp"
#include "asp/nav.hpp"
#include "asp/scene_map.hpp"
#include "asp/semantics.hpp"
#include "asp/sim.hpp"
#include "asp/sim_backends.hpp"
#include "asp/skills.hpp"

namespace asp {

struct State {
  std::optional<std::string> held_object;
  std::vector<std::string> inventory;

  bool contains(const std::string& key) const {
    return std::find(inventory.begin(), inventory.end(), key) != inventory.end();
  }

  // held not in inventory; inventory free of duplicates
  bool invariants_hold() const {
    if (held_object && contains(*held_object)) return false;
    auto sorted = inventory;
    std::sort(sorted.begin(), sorted.end());
    return std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
  }
};

struct ToolOutput {
  bool success = true;
  std::string feedback_msg;
  std::variant<std::monostate, State, double, bool> output;

  static ToolOutput ok(State state, std::string msg = "ok") {
    return {true, std::move(msg), std::move(state)};
  }
  static ToolOutput ok(double value) { return {true, "ok", value}; }
  static ToolOutput ok(bool flag) { return {true, "ok", flag}; }
  static ToolOutput fail(std::string msg, State state) {
    return {false, std::move(msg), std::move(state)};
  }
  static ToolOutput fail(std::string msg) {
    return {false, std::move(msg), std::monostate{}};
  }
};

struct KeyBinding {
  std::string key;
  std::shared_ptr<const ObjectMap> map;
  int object_id = -1;
  std::string origin_query;
};

// Renders the frames a map rebuild consumes (home frame in tabletop mode,
// the keyframe sweep in mobile mode).
using FrameSource = std::function<std::vector<SegmentedFrame>(int first_frame_id)>;
// Renders a single frame from an arbitrary viewpoint (go_to redetection).
using LocalFrameSource = std::function<SegmentedFrame(const Pose3D& camera, int frame_id)>;

// Strictly sequential tool layer: symbolic state, retrieval, spatial tools,
// interact dispatch, and navigation. One call in flight at a time.
class ToolSession {
 public:
  ToolSession(SimWorld& world, SessionConfig cfg, EmbeddingProvider& embedder,
              RelevanceClassifier& classifier, AffordanceBackend& aff_backend,
              GraspProposer& proposer, MotionChecker& checker, FrameSource frames,
              LocalFrameSource local_frames)
      : world_(world),
        cfg_(std::move(cfg)),
        embedder_(embedder),
        classifier_(classifier),
        aff_backend_(aff_backend),
        proposer_(proposer),
        checker_(checker),
        frames_(std::move(frames)),
        local_frames_(std::move(local_frames)) {}

  const State& state() const { return state_; }
  const std::shared_ptr<const ObjectMap>& map() const { return map_; }

  std::optional<KeyBinding> binding(const std::string& key) const {
    for (const auto& b : bindings_)
      if (b.key == key) return b;
    return std::nullopt;
  }
  bool map_stale() const { return !map_ || map_->stale; }
  int frames_rendered() const { return next_frame_id_; }
  int map_builds() const { return map_builds_; }
  const std::map<std::string, int>& retry_counts() const { return retry_counts_; }

  ToolOutput object_retrieval(const std::string& query) {
    try {
      ensure_map();
    } catch (const std::exception& e) {
      return ToolOutput::fail(std::string("map rebuild failed: ") + e.what(), state_);
    }
    FeatureVector query_vec;
    try {
      query_vec = embedder_.embed_text(query);
    } catch (const std::exception& e) {
      return ToolOutput::fail(std::string("embedding backend failed: ") + e.what(),
                              state_);
    }
    std::vector<RetrievalHit> hits;
    try {
      hits = top_k(*map_, query_vec, cfg_.retrieval.top_k);
    } catch (const Error& e) {
      return ToolOutput::fail(e.what(), state_);
    }
    std::size_t added = 0;
    for (const auto& hit : hits) {
      if (bound_object_ids_.count(hit.object_id)) continue;
      const Object* obj = map_->find(hit.object_id);
      if (!obj) continue;
      bool relevant = false;
      try {
        relevant =
            classifier_.is_relevant(obj->top_crops(cfg_.retrieval.classifier_views), query);
      } catch (const std::exception& e) {
        return ToolOutput::fail(std::string("relevance classifier failed: ") + e.what(),
                                state_);
      }
      if (!relevant) continue;
      std::string base = sanitize_identifier(query);
      std::string key = base + "_" + std::to_string(key_counters_[base]++);
      bindings_.push_back({key, map_, hit.object_id, query});
      bound_object_ids_.insert(hit.object_id);
      state_.inventory.push_back(key);
      ++added;
    }
    if (added == 0)
      return ToolOutput::ok(state_, "no objects found for query '" + query + "'");
    return ToolOutput::ok(state_, "added " + std::to_string(added) +
                                      " object(s) for query '" + query + "'");
  }

  ToolOutput distance_between(const std::string& a, const std::string& b) {
    if (auto guard = read_guard()) return *guard;
    const KeyBinding* ba = find_binding(a);
    const KeyBinding* bb = find_binding(b);
    if (!ba) return ToolOutput::fail("object not in inventory: " + a);
    if (!bb) return ToolOutput::fail("object not in inventory: " + b);
    return ToolOutput::ok(distance(object_centroid(*ba), object_centroid(*bb)));
  }

  ToolOutput distance_to(const std::string& a) {
    if (auto guard = read_guard()) return *guard;
    const KeyBinding* binding = find_binding(a);
    if (!binding) return ToolOutput::fail("object not in inventory: " + a);
    return ToolOutput::ok(distance(robot_reference(), object_centroid(*binding)));
  }

  ToolOutput left_of(const std::string& a, const std::string& b) {
    return lateral_predicate(a, b, /*left=*/true);
  }

  ToolOutput right_of(const std::string& a, const std::string& b) {
    return lateral_predicate(a, b, /*left=*/false);
  }

  ToolOutput size_of(const std::string& a) {
    if (auto guard = read_guard()) return *guard;
    const KeyBinding* binding = find_binding(a);
    if (!binding) return ToolOutput::fail("object not in inventory: " + a);
    auto ext = aabb_extents(binding->map->find(binding->object_id)->point_cloud);
    return ToolOutput::ok(std::max({ext[0], ext[1], ext[2]}));
  }

  ToolOutput interact(const std::string& obj_key, const std::string& action) {
    if (auto guard = read_guard()) return *guard;
    const KeyBinding* binding = find_binding(obj_key);
    if (!binding)
      return ToolOutput::fail("object not in inventory: " + obj_key, state_);
    const Object* obj = binding->map->find(binding->object_id);
    if (!obj) return ToolOutput::fail("internal: binding lost its map object", state_);

    std::vector<Affordance> affs;
    try {
      affs = detect_affordances(*obj, action, cfg_.affordance.top_k_crops, aff_backend_,
                                cfg_.affordance);
    } catch (const Error& e) {
      return ToolOutput::fail(e.what(), state_);
    }
    if (affs.empty())
      return ToolOutput::fail(
          "no affordance found on " + obj_key + " for action '" + action + "'", state_);
    Affordance aff = affs.front();
    if (cfg_.no_aff) aff = whole_object_affordance(*obj, aff.skill);

    if (auto precondition = check_preconditions(aff.skill, obj_key))
      return ToolOutput::fail(*precondition, state_);

    std::string retry_key = std::string(to_string(aff.skill)) + "|" + obj_key;
    if (retry_counts_[retry_key] >= cfg_.max_skill_retries)
      return ToolOutput::fail("retry limit reached for skill '" +
                                  std::string(to_string(aff.skill)) + "' on " + obj_key,
                              state_);

    Point3 map_centroid = centroid(obj->point_cloud);
    auto target = resolve_world_target(world_, map_centroid, cfg_.skill.target_assoc_tol);
    if (!target) {
      ++retry_counts_[retry_key];
      trigger_remap("object not found at its mapped location");
      return ToolOutput::fail(
          "object not found at its mapped location; inventory cleared, retrieve again",
          state_);
    }

    SkillContext ctx{world_, proposer_, checker_, cfg_.skill};
    SkillResult result = dispatch_skill(ctx, aff, *obj, *binding, *target);

    if (result.success) {
      if (result.picked) {
        remove_key(obj_key);
        state_.held_object = obj_key;
      }
      if (result.released) state_.held_object.reset();
      return ToolOutput::ok(state_, "skill '" + std::string(to_string(aff.skill)) +
                                        "' succeeded on " + obj_key);
    }
    ++retry_counts_[retry_key];
    if (result.triggered_remap) trigger_remap(result.reason);
    return ToolOutput::fail(result.reason, state_);
  }

  ToolOutput go_to(const std::string& obj_key, const std::string& action) {
    if (cfg_.mode != Mode::kMobile)
      return ToolOutput::fail("go_to is only available in mobile mode", state_);
    if (auto guard = read_guard()) return *guard;
    const KeyBinding* binding = find_binding(obj_key);
    if (!binding)
      return ToolOutput::fail("object not in inventory: " + obj_key, state_);
    if (!world_.spec().grid)
      return ToolOutput::fail("scene has no occupancy grid", state_);
    const Object* obj = binding->map->find(binding->object_id);
    Point3 obj_centroid_pt = centroid(obj->point_cloud);

    std::string retry_key = std::string("go_to|") + obj_key;
    if (retry_counts_[retry_key] >= cfg_.max_skill_retries)
      return ToolOutput::fail("retry limit reached for skill 'go_to' on " + obj_key,
                              state_);

    std::optional<Point2> p_aff;
    if (!cfg_.no_aff) {
      try {
        auto affs = detect_affordances(*obj, action, cfg_.affordance.top_k_crops,
                                       aff_backend_, cfg_.affordance);
        if (!affs.empty())
          p_aff = preferred_view_position(affs.front().point_cloud, obj_centroid_pt,
                                          cfg_.nav.r0, cfg_.nav.min_horizontal_normal);
      } catch (const Error&) {
        // no usable affordance direction; fall back to affordance-free search
      }
    }

    Pose2D goal;
    try {
      goal = select_nav_goal(*world_.spec().grid, obj_centroid_pt, p_aff, cfg_.nav);
    } catch (const Error& e) {
      ++retry_counts_[retry_key];
      return ToolOutput::fail(e.what(), state_);
    }
    if (!grid_path_exists(*world_.spec().grid, world_.base_pose().position, goal.position,
                          cfg_.nav.lethal_threshold)) {
      ++retry_counts_[retry_key];
      return ToolOutput::fail("navigation failed: no path to the selected pose", state_);
    }
    world_.set_base_pose(goal);

    // redetection: local map from the arrival viewpoint, re-grounded with the
    // original query
    Pose3D camera = camera_look_at(
        {goal.position.x, goal.position.y, 1.10}, obj_centroid_pt);
    SegmentedFrame frame = local_frames_(camera, next_frame_id_++);
    auto local_map =
        std::make_shared<ObjectMap>(build_from_frame(frame, embedder_, cfg_.map));
    FeatureVector query_vec = embedder_.embed_text(binding->origin_query);
    auto hits = top_k(*local_map, query_vec, cfg_.retrieval.top_k);
    const Object* best = nullptr;
    double best_dist = 0.0;
    for (const auto& hit : hits) {
      const Object* cand = local_map->find(hit.object_id);
      if (!classifier_.is_relevant(cand->top_crops(cfg_.retrieval.classifier_views),
                                   binding->origin_query))
        continue;
      double d = distance(centroid(cand->point_cloud), obj_centroid_pt);
      if (!best || d < best_dist) {
        best = cand;
        best_dist = d;
      }
    }
    if (!best) {
      ++retry_counts_[retry_key];
      return ToolOutput::fail(
          "redetection found no match for '" + binding->origin_query + "' after arrival",
          state_);
    }
    for (auto& b : bindings_) {
      if (b.key != obj_key) continue;
      b.map = local_map;
      b.object_id = best->id;
    }
    return ToolOutput::ok(state_, "arrived near " + obj_key + " and redetected it");
  }

  // Invalidate the map and the inventory; the held object survives.
  void trigger_remap(const std::string& reason) {
    (void)reason;
    if (map_) {
      auto stale_copy = std::make_shared<ObjectMap>(*map_);
      stale_copy->stale = true;
      map_ = stale_copy;
    }
    bindings_.clear();
    bound_object_ids_.clear();
    key_counters_.clear();
    state_.inventory.clear();
  }

 private:
  std::optional<ToolOutput> read_guard() {
    if (map_stale())
      return ToolOutput::fail(
          "object map is stale; call object_retrieval to rebuild it", state_);
    return std::nullopt;
  }

  void ensure_map() {
    if (!map_stale()) return;
    auto frames = frames_(next_frame_id_);
    next_frame_id_ += static_cast<int>(frames.size());
    ObjectMap built;
    bool first = true;
    for (const auto& frame : frames) {
      if (first) {
        built = build_from_frame(frame, embedder_, cfg_.map);
        first = false;
      } else {
        built = integrate_keyframe(std::move(built), frame, embedder_, cfg_.map);
      }
    }
    map_ = std::make_shared<const ObjectMap>(std::move(built));
    ++map_builds_;
  }

  const KeyBinding* find_binding(const std::string& key) const {
    if (!state_.contains(key)) return nullptr;
    for (const auto& b : bindings_)
      if (b.key == key) return &b;
    return nullptr;
  }

  void remove_key(const std::string& key) {
    state_.inventory.erase(
        std::remove(state_.inventory.begin(), state_.inventory.end(), key),
        state_.inventory.end());
    for (auto it = bindings_.begin(); it != bindings_.end(); ++it) {
      if (it->key == key) {
        bound_object_ids_.erase(it->object_id);
        bindings_.erase(it);
        break;
      }
    }
  }

  Point3 object_centroid(const KeyBinding& binding) const {
    return centroid(binding.map->find(binding.object_id)->point_cloud);
  }

  Point3 robot_reference() const {
    if (cfg_.mode == Mode::kMobile)
      return {world_.base_pose().position.x, world_.base_pose().position.y, 0.0};
    return world_.gripper_pose().position;
  }

  double lateral_coordinate(const Point3& p) const {
    // observation frame: left = +y after removing the observer yaw
    double c = std::cos(cfg_.observer_yaw), s = std::sin(cfg_.observer_yaw);
    return -s * p.x + c * p.y;
  }

  ToolOutput lateral_predicate(const std::string& a, const std::string& b, bool left) {
    if (auto guard = read_guard()) return *guard;
    const KeyBinding* ba = find_binding(a);
    const KeyBinding* bb = find_binding(b);
    if (!ba) return ToolOutput::fail("object not in inventory: " + a);
    if (!bb) return ToolOutput::fail("object not in inventory: " + b);
    double la = lateral_coordinate(object_centroid(*ba));
    double lb = lateral_coordinate(object_centroid(*bb));
    return ToolOutput::ok(left ? la > lb : lb > la);
  }

  std::optional<std::string> check_preconditions(SkillKind skill,
                                                 const std::string& obj_key) const {
    switch (skill) {
      case SkillKind::kGrasp:
      case SkillKind::kGraspPart:
      case SkillKind::kPinchPull:
      case SkillKind::kHookPull:
        if (state_.held_object)
          return "precondition violated: held_object must be none but is '" +
                 *state_.held_object + "'";
        return std::nullopt;
      case SkillKind::kPlace:
      case SkillKind::kDrop:
        if (!state_.held_object)
          return std::string(
              "precondition violated: held_object is none; pick something up first");
        return std::nullopt;
      case SkillKind::kTipPush:
        return std::nullopt;
    }
    return std::nullopt;
  }

  SkillResult dispatch_skill(SkillContext& ctx, const Affordance& aff, const Object& obj,
                             const KeyBinding& binding, std::size_t target) {
    PointCloud context = context_cloud(binding, obj);
    switch (aff.skill) {
      case SkillKind::kGrasp:
        return skill_grasp(ctx, target, obj.point_cloud, context);
      case SkillKind::kGraspPart:
        return skill_grasp_part(ctx, target, aff, context);
      case SkillKind::kPlace:
        return skill_place(ctx, target, cfg_.skill.place_clearance);
      case SkillKind::kDrop:
        return skill_drop(ctx, target, cfg_.skill.drop_height);
      case SkillKind::kTipPush:
        return skill_tip_push(ctx, target, aff, centroid(obj.point_cloud));
      case SkillKind::kPinchPull:
        return skill_pinch_pull(ctx, target, aff, centroid(obj.point_cloud));
      case SkillKind::kHookPull:
        return skill_hook_pull(ctx, target, aff, centroid(obj.point_cloud));
    }
    SkillResult bad;
    bad.reason = "unknown skill";
    return bad;
  }

  // AnyGrasp-style context: everything the map sees inside the inflated
  // target AABB.
  PointCloud context_cloud(const KeyBinding& binding, const Object& obj) const {
    Aabb region = Aabb::of(obj.point_cloud).inflated(cfg_.skill.context_inflation);
    PointCloud out;
    for (const auto& other : binding.map->objects)
      for (const auto& p : other.point_cloud)
        if (region.contains(p)) out.push_back(p);
    return out;
  }

  SimWorld& world_;
  SessionConfig cfg_;
  EmbeddingProvider& embedder_;
  RelevanceClassifier& classifier_;
  AffordanceBackend& aff_backend_;
  GraspProposer& proposer_;
  MotionChecker& checker_;
  FrameSource frames_;
  LocalFrameSource local_frames_;

  std::shared_ptr<const ObjectMap> map_;
  std::vector<KeyBinding> bindings_;
  std::set<int> bound_object_ids_;
  std::map<std::string, int> key_counters_;
  std::map<std::string, int> retry_counts_;
  State state_;
  int next_frame_id_ = 0;
  int map_builds_ = 0;
};

}  // namespace asp
