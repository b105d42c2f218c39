#pragma once

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <vector>

namespace asp {

enum class Mode { kTabletop, kMobile };

inline const char* to_string(Mode mode) {
  return mode == Mode::kTabletop ? "tabletop" : "mobile";
}

// Map construction and merging thresholds. The merge thresholds follow the
// ConceptGraphs-style defaults; all of them are intentionally configurable
// because merge tuning is scene-dependent.
struct MapConfig {
  double voxel_size = 0.02;        // downsample cell for merged clouds
  double overlap_radius = 0.02;    // neighbor radius for overlap_ratio
  double geom_thresh = 0.4;        // min overlap_ratio to merge
  double sem_thresh = 0.8;         // min feature cosine to merge
  double border_penalty = 0.5;     // effective-area factor for border crops
  std::size_t feature_dim = 4096;  // mock embedding dimensionality
};

struct AffordanceConfig {
  double iou_thresh = 0.5;        // multi-view association threshold
  double subset_tol = 0.05;       // max distance from affordance to object cloud
  std::size_t top_k_crops = 3;    // crops fed to the backend
};

struct RetrievalConfig {
  std::size_t top_k = 3;             // candidate count before classification
  std::size_t classifier_views = 3;  // best crops shown to the classifier
};

// End-effector skill parameters. Only the pull distance has an articulated
// counterpart in scene files (drawer joint ranges).
struct SkillConfig {
  double context_inflation = 0.10;   // grasp context = object AABB + margin
  double proximity_filter = 0.03;    // candidate-to-cloud distance filter
  std::size_t max_grasp_attempts = 10;
  double place_clearance = 0.02;
  double drop_height = 0.10;
  double pull_distance = 0.15;
  double pinch_attach_tol = 0.03;    // pinch goal must be this close to geometry
  double press_tol = 0.02;           // press registers on a part within this
  double axis_align_min = 0.5;       // min cos(pull axis, joint/out axis)
  double reach_radius = 0.90;        // crude reachability envelope
  double target_assoc_tol = 0.10;    // map-to-world object association
};

struct NavConfig {
  double r0 = 0.85;
  std::vector<double> radius_schedule{0.85, 1.0, 1.2, 1.5};
  double angular_step = 10.0 * std::numbers::pi / 180.0;
  double lambda_aff = 2.0;           // per meter of distance to p_aff
  int lethal_threshold = 254;
  double footprint_half_x = 0.30;    // 0.6 x 0.5 m rectangle
  double footprint_half_y = 0.25;
  double min_horizontal_normal = 0.1;
};

// The four stressor families: over-segmentation, affordance localization
// jitter, wrong-part substitution, and grasp slip.
struct NoiseConfig {
  double p_oversegment = 0.0;
  double affordance_jitter_sigma = 0.0;
  double wrong_part_probability = 0.0;
  double grasp_slip_probability = 0.0;

  bool any() const {
    return p_oversegment > 0.0 || affordance_jitter_sigma > 0.0 ||
           wrong_part_probability > 0.0 || grasp_slip_probability > 0.0;
  }
};

struct SessionConfig {
  Mode mode = Mode::kTabletop;
  bool no_aff = false;  // whole-object affordances + lambda_aff = 0
  MapConfig map;
  RetrievalConfig retrieval;
  AffordanceConfig affordance;
  SkillConfig skill;
  NavConfig nav;
  // Lateral axis convention for left_of/right_of: left = +y of the
  // observation frame, whose yaw this sets (0 = world frame).
  double observer_yaw = 0.0;
  int max_skill_retries = 3;
};

struct EpisodeConfig {
  int step_budget = 40;
  std::uint64_t seed = 0;
  NoiseConfig noise;
  SessionConfig session;
};

}  // namespace asp
