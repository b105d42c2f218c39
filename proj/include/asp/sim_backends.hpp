#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "asp/affordance.hpp"
#include "asp/common.hpp"
#include "asp/config.hpp"
#include "asp/geom.hpp"
#include "asp/semantics.hpp"
#include "asp/sim.hpp"

namespace asp {

// Verb families used by the simulated affordance stage to map an action
// description onto skill kinds.
inline std::set<SkillKind> skills_for_action(const std::string& action) {
  std::set<SkillKind> kinds;
  static const std::set<std::string> push_verbs{"press", "push", "type", "tap",
                                                "ring", "dial", "click", "poke"};
  static const std::set<std::string> open_verbs{"open", "pull", "slide"};
  static const std::set<std::string> remove_verbs{"remove", "unplug", "detach",
                                                  "extract", "unpin"};
  static const std::set<std::string> grasp_verbs{"pick", "grab", "grasp", "take",
                                                 "get", "hold", "fetch", "lift"};
  static const std::set<std::string> place_verbs{"place", "put", "set", "rest", "lay"};
  static const std::set<std::string> drop_verbs{"drop", "release", "toss"};
  for (const auto& tok : tokenize(action)) {
    if (push_verbs.count(tok)) kinds.insert(SkillKind::kTipPush);
    if (open_verbs.count(tok)) {
      kinds.insert(SkillKind::kPinchPull);
      kinds.insert(SkillKind::kHookPull);
    }
    if (remove_verbs.count(tok)) kinds.insert(SkillKind::kPinchPull);
    if (grasp_verbs.count(tok)) {
      kinds.insert(SkillKind::kGrasp);
      kinds.insert(SkillKind::kGraspPart);
    }
    if (place_verbs.count(tok)) kinds.insert(SkillKind::kPlace);
    if (drop_verbs.count(tok)) kinds.insert(SkillKind::kDrop);
  }
  return kinds;
}

inline std::size_t token_overlap(const std::string& a, const std::string& b) {
  auto ta = tokenize(a);
  auto tb = tokenize(b);
  std::sort(tb.begin(), tb.end());
  std::size_t n = 0;
  std::sort(ta.begin(), ta.end());
  ta.erase(std::unique(ta.begin(), ta.end()), ta.end());
  for (const auto& t : ta)
    if (std::binary_search(tb.begin(), tb.end(), t)) ++n;
  return n;
}

// Ground-truth affordance backend. Proposals come from the scene parts of the
// object underlying the crops; localization returns the current part cloud,
// optionally corrupted by jitter or wrong-part substitution.
class SimAffordanceBackend : public AffordanceBackend {
 public:
  SimAffordanceBackend(const SimWorld& world, NoiseConfig noise = {})
      : world_(world), noise_(noise), rng_(world.seed() ^ 0x51d2c4b5a3f6e897ull) {}

  std::vector<AffordanceProposal> propose(const std::vector<Crop>& views,
                                          const std::string& action) override {
    std::vector<AffordanceProposal> out;
    if (views.empty()) return out;
    auto target = resolve_object(views.front());
    if (!target) return out;
    const auto& obj = world_.spec().objects[*target];
    auto kinds = skills_for_action(action);

    // whole-object skills carry no part
    for (SkillKind whole : {SkillKind::kGrasp, SkillKind::kPlace, SkillKind::kDrop}) {
      if (!kinds.count(whole)) continue;
      bool part_match = false;
      if (whole == SkillKind::kGrasp) {
        for (const auto& part : obj.parts)
          if (part.skill == SkillKind::kGraspPart && token_overlap(part.name, action) > 0)
            part_match = true;
      }
      if (!part_match)
        for (std::size_t v = 0; v < views.size(); ++v)
          out.push_back({whole, "", v});
    }

    // part-level skills: keep parts of a requested kind, preferring parts the
    // action names explicitly
    std::vector<const ScenePart*> matched;
    std::size_t best_overlap = 0;
    for (const auto& part : obj.parts) {
      if (!kinds.count(part.skill)) continue;
      best_overlap = std::max(best_overlap, token_overlap(part.name, action));
    }
    for (const auto& part : obj.parts) {
      if (!kinds.count(part.skill)) continue;
      if (best_overlap > 0 && token_overlap(part.name, action) < best_overlap) continue;
      matched.push_back(&part);
    }
    for (const auto* part : matched)
      for (std::size_t v = 0; v < views.size(); ++v)
        out.push_back({part->skill, part->name, v});
    return out;
  }

  PointCloud localize(const AffordanceProposal& proposal, const Crop& crop) override {
    auto target = resolve_object(crop);
    if (!target) return {};
    const auto& obj = world_.spec().objects[*target];
    if (proposal.part.empty()) return world_.object_cloud(*target);

    int part_index = -1;
    for (std::size_t i = 0; i < obj.parts.size(); ++i)
      if (obj.parts[i].name == proposal.part) part_index = static_cast<int>(i);
    if (part_index < 0) return {};

    if (noise_.wrong_part_probability > 0.0 &&
        uniform() < noise_.wrong_part_probability) {
      // canonical-location style mistake: another part, or a shifted region
      if (obj.parts.size() > 1) {
        part_index = (part_index + 1) % static_cast<int>(obj.parts.size());
      } else {
        PointCloud shifted = world_.part_cloud(*target, obj.parts[part_index]);
        for (auto& p : shifted) p.y += 0.04;
        return shifted;
      }
    }
    PointCloud cloud = world_.part_cloud(*target, obj.parts[part_index]);
    if (noise_.affordance_jitter_sigma > 0.0) {
      std::normal_distribution<double> jitter(0.0, noise_.affordance_jitter_sigma);
      Point3 offset{jitter(rng_), jitter(rng_), jitter(rng_)};
      for (auto& p : cloud) p = p + offset;
    }
    return cloud;
  }

 private:
  std::optional<std::size_t> resolve_object(const Crop& crop) const {
    if (crop.depth_ref.empty()) return std::nullopt;
    Point3 c = centroid(crop.depth_ref);
    double best = 0.35;  // crop centroids stay well within this of the object
    std::optional<std::size_t> best_index;
    for (std::size_t i = 0; i < world_.object_count(); ++i) {
      double d = (world_.object_centroid(i) - c).norm();
      if (d < best) {
        best = d;
        best_index = i;
      }
    }
    return best_index;
  }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }

  const SimWorld& world_;
  NoiseConfig noise_;
  std::mt19937_64 rng_;
};

struct GraspCandidate {
  Pose3D pose;
  double score = 0.0;
  double width = 0.0;
};

class GraspProposer {
 public:
  virtual ~GraspProposer() = default;
  virtual std::vector<GraspCandidate> propose(const PointCloud& context_cloud) = 0;
};

class MotionChecker {
 public:
  struct Result {
    bool feasible = true;
    std::string reason;
  };
  virtual ~MotionChecker() = default;
  virtual Result feasible(const Pose3D& goal) = 0;
};

// Deterministic antipodal-pinch candidate generator. Sample points come from
// a voxelized context; each is paired with the local width along a set of
// horizontal closing directions and scored by height above the support plus
// a thinness bonus.
class SimGraspProposer : public GraspProposer {
 public:
  explicit SimGraspProposer(double max_width = 0.09, double voxel = 0.02)
      : max_width_(max_width), voxel_(voxel) {}

  std::vector<GraspCandidate> propose(const PointCloud& context_cloud) override {
    std::vector<GraspCandidate> out;
    if (context_cloud.empty()) return out;
    PointCloud samples = voxel_downsample(context_cloud, voxel_);
    // keep proposal cost bounded on large contexts
    const std::size_t max_samples = 500;
    if (samples.size() > max_samples) {
      PointCloud thin;
      double stride = static_cast<double>(samples.size()) / max_samples;
      for (std::size_t i = 0; i < max_samples; ++i)
        thin.push_back(samples[static_cast<std::size_t>(i * stride)]);
      samples = std::move(thin);
    }
    double support_z = context_cloud.front().z;
    for (const auto& p : context_cloud) support_z = std::min(support_z, p.z);

    const int azimuths = 4;
    for (const auto& sample : samples) {
      for (int a = 0; a < azimuths; ++a) {
        double angle = a * std::numbers::pi / azimuths;
        Point3 dir{std::cos(angle), std::sin(angle), 0.0};
        double lo = 0.0, hi = 0.0;
        bool any = false;
        for (const auto& q : context_cloud) {
          Point3 d = q - sample;
          double along = d.dot(dir);
          if (std::abs(along) > max_width_) continue;
          Point3 perp = d - dir * along;
          if (perp.squared_norm() > 0.012 * 0.012) continue;
          lo = std::min(lo, along);
          hi = std::max(hi, along);
          any = true;
        }
        if (!any) continue;
        double width = hi - lo;
        if (width > max_width_) continue;
        GraspCandidate cand;
        cand.pose = Pose3D{sample, Quaternion::facing(dir)};
        cand.width = width;
        // height dominates; thinness only breaks near-ties
        cand.score = (sample.z - support_z) + 0.05 * (1.0 - width / max_width_);
        out.push_back(cand);
      }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const GraspCandidate& a, const GraspCandidate& b) {
                       return a.score > b.score;
                     });
    // generous cap: skills filter by proximity before walking their top 10
    if (out.size() > 400) out.resize(400);
    return out;
  }

 private:
  double max_width_;
  double voxel_;
};

// Reachability-envelope feasibility stand-in for the motion planner.
class SimMotionChecker : public MotionChecker {
 public:
  SimMotionChecker(const SimWorld& world, double reach_radius = 1.05)
      : world_(world), reach_radius_(reach_radius) {}

  Result feasible(const Pose3D& goal) override {
    Point3 shoulder;
    if (world_.spec().grid) {
      shoulder = {world_.base_pose().position.x, world_.base_pose().position.y, 0.40};
    } else {
      shoulder = world_.spec().arm_base + Point3{0.0, 0.0, 0.30};
    }
    if (goal.position.z < -0.01)
      return {false, "goal below the workspace"};
    if ((goal.position - shoulder).norm() > reach_radius_)
      return {false, "goal out of reach"};
    return {true, ""};
  }

 private:
  const SimWorld& world_;
  double reach_radius_;
};

}  // namespace asp
