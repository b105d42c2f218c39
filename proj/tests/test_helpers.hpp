#pragma once

#include <string>

#include "asp/harness.hpp"

namespace asp::testing {

// Map built from the scene's canonical viewpoints with the mock embedding.
inline ObjectMap build_scene_map(const SimWorld& world, MockEmbedding& mock,
                                 const MapConfig& cfg = {},
                                 const NoiseConfig& noise = {}) {
  ObjectMap map;
  if (world.spec().grid) {
    bool first = true;
    int id = 0;
    for (const auto& kf : world.spec().keyframes) {
      SegmentedFrame frame = world.render_segmented_frame(kf, id++, noise);
      map = first ? build_from_frame(frame, mock, cfg)
                  : integrate_keyframe(std::move(map), frame, mock, cfg);
      first = false;
    }
  } else {
    map = build_from_frame(world.render_segmented_frame(world.spec().home_camera, 0, noise),
                           mock, cfg);
  }
  return map;
}

inline const Object* find_by_label(const ObjectMap& map, const std::string& label) {
  for (const auto& obj : map.objects)
    if (obj.gt_label() && *obj.gt_label() == label) return &obj;
  return nullptr;
}

inline int scene_object_index(const SceneSpec& spec, const std::string& label) {
  for (std::size_t i = 0; i < spec.objects.size(); ++i)
    if (spec.objects[i].label == label) return static_cast<int>(i);
  return -1;
}

}  // namespace asp::testing
