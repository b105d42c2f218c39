#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "asp/common.hpp"
#include "asp/config.hpp"
#include "asp/geom.hpp"
#include "asp/scene_types.hpp"
#include "asp/semantics.hpp"

namespace asp {

struct Object {
  int id = -1;
  PointCloud point_cloud;
  std::vector<Crop> crops;        // kept in rank_crops order
  FeatureVector features;         // unit norm
  FeatureVector feature_sum;      // unnormalized per-crop accumulation
  std::vector<Affordance> affordances;
  std::map<std::string, int> gt_label_votes;  // sim only, never shown to tools

  std::optional<std::string> gt_label() const {
    const std::string* best = nullptr;
    int best_votes = 0;
    for (const auto& [label, votes] : gt_label_votes) {
      if (votes > best_votes) {
        best = &label;
        best_votes = votes;
      }
    }
    if (!best) return std::nullopt;
    return *best;
  }

  std::vector<Crop> top_crops(std::size_t k) const {
    std::vector<Crop> out(crops.begin(),
                          crops.begin() + std::min(k, crops.size()));
    return out;
  }
};

struct ObjectMap {
  std::vector<Object> objects;
  bool stale = false;
  int frame_count = 0;
  int next_id = 0;

  const Object* find(int id) const {
    for (const auto& obj : objects)
      if (obj.id == id) return &obj;
    return nullptr;
  }
};

inline double effective_area(const Crop& crop, double border_penalty) {
  double area = static_cast<double>(crop.segment_area);
  return crop.touches_border ? area * border_penalty : area;
}

// Descending by penalized segment area; stable so equal areas keep their
// original (frame) order.
inline std::vector<Crop> rank_crops(std::vector<Crop> crops, double border_penalty) {
  std::stable_sort(crops.begin(), crops.end(), [&](const Crop& a, const Crop& b) {
    return effective_area(a, border_penalty) > effective_area(b, border_penalty);
  });
  return crops;
}

inline Object merge_pair(const Object& a, const Object& b, const MapConfig& cfg) {
  Object out;
  out.id = std::min(a.id, b.id);
  PointCloud combined = a.point_cloud;
  combined.insert(combined.end(), b.point_cloud.begin(), b.point_cloud.end());
  out.point_cloud = voxel_downsample(combined, cfg.voxel_size);
  out.feature_sum = a.feature_sum;
  for (std::size_t i = 0; i < b.feature_sum.values.size(); ++i)
    out.feature_sum.values[i] += b.feature_sum.values[i];
  out.features = out.feature_sum.normalized();
  out.crops = a.crops;
  out.crops.insert(out.crops.end(), b.crops.begin(), b.crops.end());
  out.crops = rank_crops(std::move(out.crops), cfg.border_penalty);
  out.affordances = a.affordances;
  out.affordances.insert(out.affordances.end(), b.affordances.begin(),
                         b.affordances.end());
  out.gt_label_votes = a.gt_label_votes;
  for (const auto& [label, votes] : b.gt_label_votes)
    out.gt_label_votes[label] += votes;
  return out;
}

// Clouds whose boxes are separated by more than the neighbor radius cannot
// overlap at all, so the pair can be skipped without touching the points.
inline bool aabb_gap_exceeds(const Aabb& a, const Aabb& b, double radius) {
  double gx = std::max({0.0, b.lo.x - a.hi.x, a.lo.x - b.hi.x});
  double gy = std::max({0.0, b.lo.y - a.hi.y, a.lo.y - b.hi.y});
  double gz = std::max({0.0, b.lo.z - a.hi.z, a.lo.z - b.hi.z});
  return gx > radius || gy > radius || gz > radius;
}

// Greedily merges object pairs with sufficient geometric overlap and feature
// similarity until no pair qualifies. Pairs are processed in descending
// overlap so the fixpoint is deterministic.
inline ObjectMap merge_objects(ObjectMap map, double geom_thresh, double sem_thresh,
                               const MapConfig& cfg = {}) {
  std::vector<Aabb> boxes;
  boxes.reserve(map.objects.size());
  for (const auto& obj : map.objects) boxes.push_back(Aabb::of(obj.point_cloud));
  for (;;) {
    double best_overlap = -1.0;
    std::size_t best_i = 0, best_j = 0;
    for (std::size_t i = 0; i < map.objects.size(); ++i) {
      for (std::size_t j = i + 1; j < map.objects.size(); ++j) {
        if (aabb_gap_exceeds(boxes[i], boxes[j], cfg.overlap_radius)) continue;
        double sem = cosine(map.objects[i].features, map.objects[j].features);
        if (sem < sem_thresh) continue;
        double geo = overlap_ratio(map.objects[i].point_cloud,
                                   map.objects[j].point_cloud, cfg.overlap_radius);
        if (geo < geom_thresh) continue;
        if (geo > best_overlap) {
          best_overlap = geo;
          best_i = i;
          best_j = j;
        }
      }
    }
    if (best_overlap < 0.0) break;
    Object merged = merge_pair(map.objects[best_i], map.objects[best_j], cfg);
    map.objects.erase(map.objects.begin() + best_j);
    boxes.erase(boxes.begin() + best_j);
    map.objects[best_i] = std::move(merged);
    boxes[best_i] = Aabb::of(map.objects[best_i].point_cloud);
  }
  return map;
}

inline Object object_from_segment(const Segment& segment, int frame_id, int id,
                                  EmbeddingProvider& provider,
                                  const MapConfig& cfg) {
  Object obj;
  obj.id = id;
  obj.point_cloud = segment.point_cloud;
  Crop crop;
  crop.segment_area = segment.segment_area;
  crop.touches_border = segment.touches_border;
  crop.source_frame_id = frame_id;
  crop.depth_ref = segment.point_cloud;
  crop.view_label = segment.gt_label;
  obj.feature_sum = provider.embed_crop(crop);
  obj.features = obj.feature_sum.normalized();
  obj.crops.push_back(std::move(crop));
  if (segment.gt_label) obj.gt_label_votes[*segment.gt_label] = 1;
  return obj;
}

// One object per segment, then a single merge pass. Merging is applied even
// for a single frame to recover over-segmented objects.
inline ObjectMap build_from_frame(const SegmentedFrame& frame,
                                  EmbeddingProvider& provider,
                                  const MapConfig& cfg = {}) {
  ObjectMap map;
  for (const auto& segment : frame.segments)
    map.objects.push_back(
        object_from_segment(segment, frame.frame_id, map.next_id++, provider, cfg));
  map.frame_count = 1;
  return merge_objects(std::move(map), cfg.geom_thresh, cfg.sem_thresh, cfg);
}

inline ObjectMap integrate_keyframe(ObjectMap map, const SegmentedFrame& frame,
                                    EmbeddingProvider& provider,
                                    const MapConfig& cfg = {}) {
  for (const auto& segment : frame.segments)
    map.objects.push_back(
        object_from_segment(segment, frame.frame_id, map.next_id++, provider, cfg));
  map.frame_count += 1;
  return merge_objects(std::move(map), cfg.geom_thresh, cfg.sem_thresh, cfg);
}

}  // namespace asp
