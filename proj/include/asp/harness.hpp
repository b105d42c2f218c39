#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "asp/agent.hpp"
#include "asp/common.hpp"
#include "asp/config.hpp"
#include "asp/semantics.hpp"
#include "asp/sim.hpp"
#include "asp/sim_backends.hpp"
#include "asp/sim_scenes.hpp"
#include "asp/tools.hpp"

namespace asp {

// Bundles a world with the deterministic mock backends and a tool session,
// ready to run episodes. One harness per episode.
class EpisodeHarness {
 public:
  EpisodeHarness(SceneSpec scene, EpisodeConfig cfg)
      : cfg_(std::move(cfg)),
        world_(std::move(scene), cfg_.seed, cfg_.noise),
        embedder_(cfg_.session.map.feature_dim),
        classifier_(),
        aff_backend_(world_, cfg_.noise),
        proposer_(),
        checker_(world_, cfg_.session.skill.reach_radius) {
    if (world_.spec().grid) cfg_.session.mode = Mode::kMobile;
    session_ = std::make_unique<ToolSession>(
        world_, cfg_.session, embedder_, classifier_, aff_backend_, proposer_, checker_,
        make_frame_source(), make_local_frame_source());
  }

  static EpisodeHarness from_template(const std::string& template_name,
                                      EpisodeConfig cfg) {
    return EpisodeHarness(generate_scene(template_name, cfg.seed), cfg);
  }

  SimWorld& world() { return world_; }
  ToolSession& session() { return *session_; }
  const EpisodeConfig& config() const { return cfg_; }
  MockEmbedding& embedder() { return embedder_; }
  SimAffordanceBackend& affordance_backend() { return aff_backend_; }

  EpisodeLog run(const std::string& query, AgentBackend& backend) {
    EpisodeSetup setup;
    setup.query = query;
    setup.task = world_.spec().find_task(query);
    return run_episode(world_, *session_, setup, backend, cfg_);
  }

  EpisodeLog run_task(const TaskSpec& task, AgentBackend& backend) {
    EpisodeSetup setup;
    setup.query = task.query;
    setup.task = &task;
    return run_episode(world_, *session_, setup, backend, cfg_);
  }

 private:
  FrameSource make_frame_source() {
    return [this](int first_frame_id) {
      std::vector<SegmentedFrame> frames;
      if (world_.spec().grid) {
        int id = first_frame_id;
        for (const auto& kf : world_.spec().keyframes)
          frames.push_back(world_.render_segmented_frame(kf, id++, cfg_.noise));
      } else {
        frames.push_back(world_.render_segmented_frame(world_.spec().home_camera,
                                                       first_frame_id, cfg_.noise));
      }
      return frames;
    };
  }

  LocalFrameSource make_local_frame_source() {
    return [this](const Pose3D& camera, int frame_id) {
      return world_.render_segmented_frame(camera, frame_id, cfg_.noise);
    };
  }

  EpisodeConfig cfg_;
  SimWorld world_;
  MockEmbedding embedder_;
  MockClassifier classifier_;
  SimAffordanceBackend aff_backend_;
  SimGraspProposer proposer_;
  SimMotionChecker checker_;
  std::unique_ptr<ToolSession> session_;
};

// Scripted plans for the shipped scene tasks. Every plan assumes the scene's
// canonical labels; selector steps cover the data-dependent choices.
inline std::vector<PlanStep> plan_for_task(const SceneSpec& scene,
                                           const std::string& task_name) {
  auto call = PlanStep::make_call;
  const TaskSpec* task = nullptr;
  for (const auto& t : scene.tasks)
    if (t.name == task_name) task = &t;
  if (!task)
    throw Error(ErrorCode::InvalidParameter, "scene has no task named " + task_name);

  if (task_name == "pick-red-ball") {
    return {call("object_retrieval", {{"query", "red ball"}}),
            call("interact", {{"obj", "red_ball_0"}, {"action", "pick up"}}),
            PlanStep::finish("picked the red ball")};
  }
  if (task_name == "ball-in-bowl") {
    return {call("object_retrieval", {{"query", "red ball"}}),
            call("interact", {{"obj", "red_ball_0"}, {"action", "pick up"}}),
            call("object_retrieval", {{"query", "white bowl"}}),
            call("interact", {{"obj", "white_bowl_0"}, {"action", "place the ball inside"}}),
            PlanStep::finish("ball placed in the bowl")};
  }
  if (task_name == "pick-mug-by-handle") {
    return {call("object_retrieval", {{"query", "mug"}}),
            call("interact", {{"obj", "mug_0"}, {"action", "pick up by the handle"}}),
            PlanStep::finish("picked the mug")};
  }
  if (task_name == "pick-larger-duckie" || task_name == "pick-smaller-duckie") {
    bool larger = task_name == "pick-larger-duckie";
    return {call("object_retrieval", {{"query", "duckie"}}),
            PlanStep::select_size(larger, {"duckie_0", "duckie_1"}, "$target"),
            call("interact", {{"obj", "$target"}, {"action", "pick up"}}),
            PlanStep::finish("picked the duckie")};
  }
  if (task_name == "press-space-bar") {
    return {call("object_retrieval", {{"query", "keyboard"}}),
            call("interact", {{"obj", "keyboard_0"}, {"action", "press the space bar"}}),
            PlanStep::finish("pressed the space bar")};
  }
  if (task_name == "ring-bell") {
    return {call("object_retrieval", {{"query", "desk bell"}}),
            call("interact", {{"obj", "desk_bell_0"}, {"action", "ring the bell"}}),
            PlanStep::finish("rang the bell")};
  }
  if (task_name == "remove-thumbtack") {
    return {call("object_retrieval", {{"query", "thumbtack"}}),
            call("interact", {{"obj", "thumbtack_0"}, {"action", "remove the thumbtack"}}),
            PlanStep::finish("removed the thumbtack")};
  }
  if (task_name == "unplug-adapter") {
    return {call("object_retrieval", {{"query", "power adapter"}}),
            call("interact", {{"obj", "power_adapter_0"}, {"action", "unplug it"}}),
            PlanStep::finish("unplugged the adapter")};
  }
  if (task_name == "open-drawer") {
    return {call("object_retrieval", {{"query", "drawer"}}),
            call("interact", {{"obj", "drawer_0"}, {"action", "open the drawer"}}),
            PlanStep::finish("opened the drawer")};
  }
  if (task_name == "open-cabinet") {
    return {call("object_retrieval", {{"query", "metal cabinet"}}),
            call("go_to", {{"obj", "metal_cabinet_0"}, {"action", "open the drawer"}}),
            call("interact", {{"obj", "metal_cabinet_0"}, {"action", "open the drawer"}}),
            PlanStep::finish("opened the cabinet")};
  }
  if (task_name == "dial-phone") {
    return {call("object_retrieval", {{"query", "phone"}}),
            call("go_to", {{"obj", "phone_0"}, {"action", "dial a number"}}),
            call("interact", {{"obj", "phone_0"}, {"action", "dial a number"}}),
            PlanStep::finish("dialed the phone")};
  }
  if (task_name == "double-pick") {
    // item labels come from the task goals
    std::vector<PlanStep> plan;
    for (const auto& goal : task->goals) {
      const std::string& label = scene.objects[goal.object_index].label;
      std::string key = sanitize_identifier(label) + "_0";
      plan.push_back(call("object_retrieval", {{"query", label}}));
      plan.push_back(call("go_to", {{"obj", key}, {"action", "pick up"}}));
      plan.push_back(call("interact", {{"obj", key}, {"action", "pick up"}}));
      plan.push_back(call("object_retrieval", {{"query", "white bin"}}));
      plan.push_back(call("go_to", {{"obj", "white_bin_0"}, {"action", "drop"}}));
      plan.push_back(call("interact", {{"obj", "white_bin_0"}, {"action", "drop it in"}}));
    }
    plan.push_back(PlanStep::finish("both objects in the bin"));
    return plan;
  }
  if (task_name == "spatial-disambiguation") {
    return {call("object_retrieval", {{"query", "egg"}}),
            call("object_retrieval", {{"query", "tomato"}}),
            PlanStep::select_min_distance({"egg_0", "egg_1"}, "tomato_0", "$egg"),
            call("go_to", {{"obj", "$egg"}, {"action", "pick up"}}),
            call("interact", {{"obj", "$egg"}, {"action", "pick up"}}),
            call("object_retrieval", {{"query", "pan"}}),
            call("go_to", {{"obj", "pan_0"}, {"action", "place"}}),
            call("interact", {{"obj", "pan_0"}, {"action", "place the egg in the pan"}}),
            PlanStep::finish("egg placed in the pan")};
  }
  throw Error(ErrorCode::InvalidParameter, "no scripted plan for task " + task_name);
}

// Recovery rules shared by the scripted suites: re-ground and retry once the
// tool layer reports a remap.
inline std::vector<ReactiveRule> default_reactive_rules(const SceneSpec& scene,
                                                        const std::string& task_name) {
  (void)scene;
  (void)task_name;
  return {};
}

}  // namespace asp
