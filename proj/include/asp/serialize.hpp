#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "asp/common.hpp"
#include "asp/config.hpp"
#include "asp/geom.hpp"
#include "asp/nav.hpp"
#include "asp/scene_map.hpp"
#include "asp/sim.hpp"

namespace asp {

using Json = nlohmann::json;

inline std::string base64_encode(const std::vector<std::uint8_t>& data) {
  static const char* alphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  for (std::size_t i = 0; i < data.size(); i += 3) {
    std::uint32_t chunk = data[i] << 16;
    if (i + 1 < data.size()) chunk |= data[i + 1] << 8;
    if (i + 2 < data.size()) chunk |= data[i + 2];
    out.push_back(alphabet[(chunk >> 18) & 63]);
    out.push_back(alphabet[(chunk >> 12) & 63]);
    out.push_back(i + 1 < data.size() ? alphabet[(chunk >> 6) & 63] : '=');
    out.push_back(i + 2 < data.size() ? alphabet[chunk & 63] : '=');
  }
  return out;
}

inline std::vector<std::uint8_t> base64_decode(const std::string& text) {
  auto value_of = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::vector<std::uint8_t> out;
  std::uint32_t chunk = 0;
  int bits = 0;
  for (char c : text) {
    int v = value_of(c);
    if (v < 0) continue;
    chunk = (chunk << 6) | v;
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((chunk >> bits) & 0xff));
    }
  }
  return out;
}

// --- geometry -------------------------------------------------------------

inline Json cloud_to_json(const PointCloud& pc) {
  Json j = Json::array();
  for (const auto& p : pc) j.push_back({p.x, p.y, p.z});
  return j;
}

inline PointCloud cloud_from_json(const Json& j) {
  PointCloud pc;
  for (const auto& p : j)
    pc.push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
  return pc;
}

inline Json pose3_to_json(const Pose3D& pose) {
  return Json{{"position", {pose.position.x, pose.position.y, pose.position.z}},
              {"orientation",
               {pose.orientation.w, pose.orientation.x, pose.orientation.y,
                pose.orientation.z}}};
}

inline Pose3D pose3_from_json(const Json& j) {
  Pose3D pose;
  const auto& p = j.at("position");
  pose.position = {p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()};
  const auto& q = j.at("orientation");
  pose.orientation = {q.at(0).get<double>(), q.at(1).get<double>(),
                      q.at(2).get<double>(), q.at(3).get<double>()};
  return pose;
}

// --- occupancy grid --------------------------------------------------------

inline Json grid_to_json(const OccupancyGrid& grid) {
  Json j;
  j["resolution"] = grid.resolution;
  j["origin"] = {grid.origin.x, grid.origin.y};
  j["width"] = grid.width;
  j["height"] = grid.height;
  j["data_b64"] = base64_encode(grid.cells);
  return j;
}

inline OccupancyGrid grid_from_json(const Json& j) {
  OccupancyGrid grid;
  grid.resolution = j.at("resolution").get<double>();
  grid.origin = {j.at("origin").at(0).get<double>(), j.at("origin").at(1).get<double>()};
  grid.width = j.at("width").get<int>();
  grid.height = j.at("height").get<int>();
  grid.cells = base64_decode(j.at("data_b64").get<std::string>());
  if (grid.cells.size() != static_cast<std::size_t>(grid.width) * grid.height)
    throw Error(ErrorCode::InvalidParameter, "grid payload size mismatch");
  return grid;
}

// --- object map ------------------------------------------------------------

inline Json object_map_to_json(const ObjectMap& map) {
  Json objects = Json::array();
  for (const auto& obj : map.objects) {
    Json j;
    j["id"] = obj.id;
    j["points"] = cloud_to_json(obj.point_cloud);
    j["features"] = obj.features.values;
    Json crops = Json::array();
    for (const auto& crop : obj.crops)
      crops.push_back({{"area", crop.segment_area},
                       {"border", crop.touches_border},
                       {"frame", crop.source_frame_id}});
    j["crops"] = crops;
    Json affs = Json::array();
    for (const auto& aff : obj.affordances)
      affs.push_back({{"part", aff.part},
                      {"skill", to_string(aff.skill)},
                      {"points", cloud_to_json(aff.point_cloud)}});
    j["affordances"] = affs;
    objects.push_back(std::move(j));
  }
  return Json{{"objects", objects},
              {"stale", map.stale},
              {"frame_count", map.frame_count}};
}

// --- scene spec ------------------------------------------------------------

inline Json scene_to_json(const SceneSpec& spec) {
  Json j;
  j["template"] = spec.template_name;
  j["seed"] = spec.seed;
  Json objects = Json::array();
  for (const auto& obj : spec.objects) {
    Json o;
    o["label"] = obj.label;
    o["pose"] = pose3_to_json(obj.pose);
    o["points"] = cloud_to_json(obj.point_cloud);
    Json parts = Json::array();
    for (const auto& part : obj.parts) {
      Json p;
      p["name"] = part.name;
      p["skill"] = to_string(part.skill);
      p["pressable"] = part.pressable;
      p["moves_with_joint"] = part.moves_with_joint;
      p["points"] = cloud_to_json(part.point_cloud);
      parts.push_back(std::move(p));
    }
    o["parts"] = parts;
    if (obj.joint) {
      o["joint"] = {{"axis", {obj.joint->axis.x, obj.joint->axis.y, obj.joint->axis.z}},
                    {"range", obj.joint->range},
                    {"region_lo",
                     {obj.joint->moving_region.lo.x, obj.joint->moving_region.lo.y,
                      obj.joint->moving_region.lo.z}},
                    {"region_hi",
                     {obj.joint->moving_region.hi.x, obj.joint->moving_region.hi.y,
                      obj.joint->moving_region.hi.z}}};
    } else {
      o["joint"] = nullptr;
    }
    o["container"] = obj.container;
    o["removable"] = obj.removable;
    o["fixed"] = obj.fixed;
    o["removal_axis"] = {obj.removal_axis.x, obj.removal_axis.y, obj.removal_axis.z};
    o["supported_by"] = obj.supported_by;
    objects.push_back(std::move(o));
  }
  j["objects"] = objects;
  j["grid"] = spec.grid ? grid_to_json(*spec.grid) : Json(nullptr);
  Json keyframes = Json::array();
  for (const auto& kf : spec.keyframes) keyframes.push_back(pose3_to_json(kf));
  j["keyframes"] = keyframes;
  j["home_camera"] = pose3_to_json(spec.home_camera);
  j["start_base"] = {spec.start_base.position.x, spec.start_base.position.y,
                     spec.start_base.theta};
  j["arm_base"] = {spec.arm_base.x, spec.arm_base.y, spec.arm_base.z};
  Json tasks = Json::array();
  for (const auto& task : spec.tasks) {
    Json t;
    t["name"] = task.name;
    t["query"] = task.query;
    t["scoring"] = task.scoring == TaskSpec::Scoring::kPerContainedObject
                       ? "per_contained_object"
                       : "all_or_nothing";
    Json goals = Json::array();
    for (const auto& goal : task.goals) {
      const char* kind = nullptr;
      switch (goal.kind) {
        case Goal::Kind::kContained: kind = "contained"; break;
        case Goal::Kind::kPressed: kind = "pressed"; break;
        case Goal::Kind::kOpenAtLeast: kind = "open_at_least"; break;
        case Goal::Kind::kHeld: kind = "held"; break;
        case Goal::Kind::kDetached: kind = "detached"; break;
        case Goal::Kind::kPlacedOn: kind = "placed_on"; break;
      }
      goals.push_back({{"kind", kind},
                       {"object", goal.object_index},
                       {"target", goal.target_index},
                       {"part", goal.part_name},
                       {"tau", goal.tau}});
    }
    t["goals"] = goals;
    tasks.push_back(std::move(t));
  }
  j["tasks"] = tasks;
  return j;
}

inline SceneSpec scene_from_json(const Json& j) {
  SceneSpec spec;
  spec.template_name = j.at("template").get<std::string>();
  spec.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& o : j.at("objects")) {
    SceneObject obj;
    obj.label = o.at("label").get<std::string>();
    obj.pose = pose3_from_json(o.at("pose"));
    obj.point_cloud = cloud_from_json(o.at("points"));
    for (const auto& p : o.at("parts")) {
      ScenePart part;
      part.name = p.at("name").get<std::string>();
      part.skill = skill_kind_from_string(p.at("skill").get<std::string>());
      part.pressable = p.at("pressable").get<bool>();
      part.moves_with_joint = p.at("moves_with_joint").get<bool>();
      part.point_cloud = cloud_from_json(p.at("points"));
      obj.parts.push_back(std::move(part));
    }
    if (!o.at("joint").is_null()) {
      const auto& jj = o.at("joint");
      PrismaticJoint joint;
      joint.axis = {jj.at("axis").at(0).get<double>(), jj.at("axis").at(1).get<double>(),
                    jj.at("axis").at(2).get<double>()};
      joint.range = jj.at("range").get<double>();
      joint.moving_region.lo = {jj.at("region_lo").at(0).get<double>(),
                                jj.at("region_lo").at(1).get<double>(),
                                jj.at("region_lo").at(2).get<double>()};
      joint.moving_region.hi = {jj.at("region_hi").at(0).get<double>(),
                                jj.at("region_hi").at(1).get<double>(),
                                jj.at("region_hi").at(2).get<double>()};
      obj.joint = joint;
    }
    obj.container = o.at("container").get<bool>();
    obj.removable = o.at("removable").get<bool>();
    obj.fixed = o.at("fixed").get<bool>();
    obj.removal_axis = {o.at("removal_axis").at(0).get<double>(),
                        o.at("removal_axis").at(1).get<double>(),
                        o.at("removal_axis").at(2).get<double>()};
    obj.supported_by = o.at("supported_by").get<int>();
    spec.objects.push_back(std::move(obj));
  }
  if (!j.at("grid").is_null()) spec.grid = grid_from_json(j.at("grid"));
  for (const auto& kf : j.at("keyframes")) spec.keyframes.push_back(pose3_from_json(kf));
  spec.home_camera = pose3_from_json(j.at("home_camera"));
  spec.start_base = Pose2D::make(j.at("start_base").at(0).get<double>(),
                                 j.at("start_base").at(1).get<double>(),
                                 j.at("start_base").at(2).get<double>());
  spec.arm_base = {j.at("arm_base").at(0).get<double>(),
                   j.at("arm_base").at(1).get<double>(),
                   j.at("arm_base").at(2).get<double>()};
  for (const auto& t : j.at("tasks")) {
    TaskSpec task;
    task.name = t.at("name").get<std::string>();
    task.query = t.at("query").get<std::string>();
    task.scoring = t.at("scoring").get<std::string>() == "per_contained_object"
                       ? TaskSpec::Scoring::kPerContainedObject
                       : TaskSpec::Scoring::kAllOrNothing;
    for (const auto& g : t.at("goals")) {
      Goal goal;
      std::string kind = g.at("kind").get<std::string>();
      if (kind == "contained") goal.kind = Goal::Kind::kContained;
      else if (kind == "pressed") goal.kind = Goal::Kind::kPressed;
      else if (kind == "open_at_least") goal.kind = Goal::Kind::kOpenAtLeast;
      else if (kind == "held") goal.kind = Goal::Kind::kHeld;
      else if (kind == "detached") goal.kind = Goal::Kind::kDetached;
      else goal.kind = Goal::Kind::kPlacedOn;
      goal.object_index = g.at("object").get<int>();
      goal.target_index = g.at("target").get<int>();
      goal.part_name = g.at("part").get<std::string>();
      goal.tau = g.at("tau").get<double>();
      task.goals.push_back(std::move(goal));
    }
    spec.tasks.push_back(std::move(task));
  }
  return spec;
}

inline NoiseConfig noise_from_json(const Json& j) {
  NoiseConfig noise;
  noise.p_oversegment = j.value("p_oversegment", 0.0);
  noise.affordance_jitter_sigma = j.value("affordance_jitter_sigma", 0.0);
  noise.wrong_part_probability = j.value("wrong_part_probability", 0.0);
  noise.grasp_slip_probability = j.value("grasp_slip_probability", 0.0);
  return noise;
}

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::InvalidParameter, "cannot open file: " + path);
  Json j;
  in >> j;
  return j;
}

inline void save_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorCode::InvalidParameter, "cannot write file: " + path);
  out << text;
}

}  // namespace asp
