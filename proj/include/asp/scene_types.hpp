#pragma once

#include <optional>
#include <string>
#include <vector>

#include "asp/common.hpp"
#include "asp/geom.hpp"

namespace asp {

// Crop of one segment observation. Pixels are not stored; the crop carries
// ranking metadata, the segment geometry handle, and an optional view label
// that stands in for image content in simulated perception.
struct Crop {
  std::size_t segment_area = 1;  // pixels
  bool touches_border = false;
  int source_frame_id = 0;
  PointCloud depth_ref;  // the segment's point cloud, scene frame
  std::optional<std::string> view_label;
};

// Functional object part: a sub-region of the owning object's cloud plus the
// skill that operates on it.
struct Affordance {
  PointCloud point_cloud;
  std::string part;
  SkillKind skill = SkillKind::kGrasp;
};

// Simulation-only ground truth attached to a segment.
struct GtPart {
  std::string name;
  PointCloud point_cloud;  // scene frame
  SkillKind skill = SkillKind::kGrasp;
};

struct Segment {
  int mask_id = 0;
  PointCloud point_cloud;  // scene frame
  std::size_t segment_area = 1;
  bool touches_border = false;
  std::optional<std::string> gt_label;
  std::vector<GtPart> gt_parts;
};

struct SegmentedFrame {
  Pose3D camera_pose;
  int frame_id = 0;
  std::vector<Segment> segments;
};

}  // namespace asp
