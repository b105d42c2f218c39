#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "asp/common.hpp"
#include "asp/config.hpp"
#include "asp/geom.hpp"
#include "asp/scene_map.hpp"

namespace asp {

struct AffordanceProposal {
  SkillKind skill = SkillKind::kGrasp;
  std::string part;
  std::size_t crop_index = 0;
};

// Two-step detection backend: propose (skill, part) pairs from object views,
// then localize a part as a 3D sub-cloud of the object.
class AffordanceBackend {
 public:
  virtual ~AffordanceBackend() = default;
  virtual std::vector<AffordanceProposal> propose(const std::vector<Crop>& views,
                                                  const std::string& action) = 0;
  virtual PointCloud localize(const AffordanceProposal& proposal,
                              const Crop& crop) = 0;
};

// Greedy duplicate merge across views: pairs whose clouds reach the IoU
// threshold and agree on skill are unioned. Detections with different skills
// are kept apart even when they share geometry.
inline std::vector<Affordance> associate_multiview(std::vector<Affordance> affs,
                                                   double iou_thresh,
                                                   double voxel = 0.02) {
  if (iou_thresh <= 0.0 || iou_thresh > 1.0)
    throw Error(ErrorCode::InvalidParameter, "iou_thresh must be in (0,1]");
  for (;;) {
    double best_iou = -1.0;
    std::size_t best_i = 0, best_j = 0;
    for (std::size_t i = 0; i < affs.size(); ++i) {
      for (std::size_t j = i + 1; j < affs.size(); ++j) {
        if (affs[i].skill != affs[j].skill) continue;
        double iou = iou_3d(affs[i].point_cloud, affs[j].point_cloud, voxel);
        if (iou >= iou_thresh && iou > best_iou) {
          best_iou = iou;
          best_i = i;
          best_j = j;
        }
      }
    }
    if (best_iou < 0.0) break;
    Affordance merged;
    merged.skill = affs[best_i].skill;
    merged.part = affs[best_i].point_cloud.size() >= affs[best_j].point_cloud.size()
                      ? affs[best_i].part
                      : affs[best_j].part;
    PointCloud combined = affs[best_i].point_cloud;
    combined.insert(combined.end(), affs[best_j].point_cloud.begin(),
                    affs[best_j].point_cloud.end());
    merged.point_cloud = voxel_downsample(combined, voxel);
    affs.erase(affs.begin() + best_j);
    affs[best_i] = std::move(merged);
  }
  return affs;
}

// Runs the backend over the object's top crops and associates the results.
// Localized points farther than the subset tolerance from the object cloud
// are discarded, so every returned affordance stays on the object.
inline std::vector<Affordance> detect_affordances(const Object& obj,
                                                  const std::string& action,
                                                  std::size_t k_crops,
                                                  AffordanceBackend& backend,
                                                  const AffordanceConfig& cfg = {}) {
  if (obj.crops.empty())
    throw Error(ErrorCode::AffordanceDetectionFailed,
                "object has no crops for affordance detection");
  auto views = obj.top_crops(k_crops);
  std::vector<AffordanceProposal> proposals;
  try {
    proposals = backend.propose(views, action);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::AffordanceDetectionFailed,
                std::string("affordance proposal failed: ") + e.what());
  }

  NeighborGrid object_grid(obj.point_cloud, cfg.subset_tol);
  std::vector<Affordance> detections;
  for (const auto& proposal : proposals) {
    if (proposal.crop_index >= views.size()) continue;
    PointCloud localized;
    try {
      localized = backend.localize(proposal, views[proposal.crop_index]);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::AffordanceDetectionFailed,
                  std::string("affordance localization failed: ") + e.what());
    }
    PointCloud on_object;
    for (const auto& p : localized)
      if (object_grid.has_neighbor(p)) on_object.push_back(p);
    if (on_object.empty()) continue;
    detections.push_back({std::move(on_object), proposal.part, proposal.skill});
  }
  return associate_multiview(std::move(detections), cfg.iou_thresh);
}

// No-Aff ablation: the affordance geometry is the entire object cloud.
inline Affordance whole_object_affordance(const Object& obj, SkillKind skill) {
  return Affordance{obj.point_cloud, "whole object", skill};
}

}  // namespace asp
