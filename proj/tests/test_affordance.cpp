#include <catch2/catch_amalgamated.hpp>

#include <numeric>

#include "asp/affordance.hpp"
#include "asp/sim_backends.hpp"
#include "asp/sim_scenes.hpp"
#include "test_helpers.hpp"

using namespace asp;
using asp::testing::build_scene_map;
using asp::testing::find_by_label;
using asp::testing::scene_object_index;

namespace {

PointCloud patch(Point3 origin, int nx, int ny, double spacing) {
  PointCloud pc;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      pc.push_back({origin.x + i * spacing, origin.y + j * spacing, origin.z});
  return pc;
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
  std::size_t components() {
    std::size_t n = 0;
    for (std::size_t i = 0; i < parent.size(); ++i)
      if (find(i) == i) ++n;
    return n;
  }
};

}  // namespace

TEST_CASE("detect_affordances on the mug handle") {
  SimWorld world(generate_scene("tabletop-pick", 0), 0);
  MockEmbedding mock;
  ObjectMap map = build_scene_map(world, mock);
  const Object* mug = find_by_label(map, "blue mug");
  REQUIRE(mug != nullptr);

  SimAffordanceBackend backend(world);
  auto affs = detect_affordances(*mug, "pick up by the handle", 3, backend);
  REQUIRE(affs.size() == 1);
  CHECK(affs[0].skill == SkillKind::kGraspPart);
  CHECK(affs[0].part == "handle");

  // matches the ground-truth handle cloud
  int mug_index = scene_object_index(world.spec(), "blue mug");
  PointCloud gt = world.part_cloud(mug_index, world.spec().objects[mug_index].parts[0]);
  CHECK(iou_3d(affs[0].point_cloud, gt, 0.02) > 0.6);
}

TEST_CASE("detect_affordances filters parts by the action text") {
  SimWorld world(generate_scene("keyboard", 1), 1);
  MockEmbedding mock;
  ObjectMap map = build_scene_map(world, mock);
  const Object* kb = find_by_label(map, "computer keyboard");
  REQUIRE(kb != nullptr);
  SimAffordanceBackend backend(world);

  auto affs = detect_affordances(*kb, "press the space bar", 3, backend);
  REQUIRE(affs.size() == 1);
  CHECK(affs[0].skill == SkillKind::kTipPush);
  CHECK(affs[0].part == "space bar");

  int kb_index = scene_object_index(world.spec(), "computer keyboard");
  const auto& parts = world.spec().objects[kb_index].parts;
  PointCloud gt_space;
  for (const auto& part : parts)
    if (part.name == "space bar") gt_space = world.part_cloud(kb_index, part);
  CHECK(iou_3d(affs[0].point_cloud, gt_space, 0.02) > 0.6);

  // without a named part, every push part comes back
  auto all_keys = detect_affordances(*kb, "push", 3, backend);
  CHECK(all_keys.size() == parts.size());
}

TEST_CASE("detect_affordances with no matching parts is empty") {
  SimWorld world(generate_scene("tabletop-pick", 0), 0);
  MockEmbedding mock;
  ObjectMap map = build_scene_map(world, mock);
  const Object* ball = find_by_label(map, "red ball");
  REQUIRE(ball != nullptr);
  SimAffordanceBackend backend(world);
  auto affs = detect_affordances(*ball, "push", 3, backend);
  CHECK(affs.empty());
}

TEST_CASE("detected affordances satisfy the subset invariant") {
  for (const char* tmpl : {"tabletop-pick", "keyboard", "drawer", "thumbtack"}) {
    SimWorld world(generate_scene(tmpl, 2), 2);
    MockEmbedding mock;
    ObjectMap map = build_scene_map(world, mock);
    SimAffordanceBackend backend(world);
    for (const auto& obj : map.objects) {
      for (const char* action : {"pick up", "open", "press", "remove"}) {
        auto affs = detect_affordances(obj, action, 3, backend);
        for (const auto& aff : affs) {
          REQUIRE_FALSE(aff.point_cloud.empty());
          NeighborGrid grid(obj.point_cloud, 0.05);
          for (const auto& p : aff.point_cloud) CHECK(grid.has_neighbor(p));
        }
      }
    }
  }
}

TEST_CASE("associate_multiview merges duplicates") {
  PointCloud handle = patch({0, 0, 0}, 10, 4, 0.005);

  SECTION("the same handle from two views becomes one affordance") {
    std::vector<Affordance> affs{{handle, "handle", SkillKind::kGraspPart},
                                 {handle, "handle", SkillKind::kGraspPart}};
    auto merged = associate_multiview(affs, 0.5);
    CHECK(merged.size() == 1);
  }

  SECTION("distinct buttons stay separate") {
    std::vector<Affordance> affs{{patch({0, 0, 0}, 6, 6, 0.004), "left button",
                                  SkillKind::kTipPush},
                                 {patch({0.2, 0, 0}, 6, 6, 0.004), "right button",
                                  SkillKind::kTipPush}};
    CHECK(associate_multiview(affs, 0.5).size() == 2);
  }

  SECTION("three chained detections collapse, matching a union-find oracle") {
    std::vector<PointCloud> clouds{patch({0.000, 0, 0}, 12, 6, 0.005),
                                   patch({0.015, 0, 0}, 12, 6, 0.005),
                                   patch({0.030, 0, 0}, 12, 6, 0.005)};
    double thresh = 0.3;
    UnionFind uf(3);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = i + 1; j < 3; ++j)
        if (iou_3d(clouds[i], clouds[j], 0.02) >= thresh) uf.unite(i, j);
    REQUIRE(uf.components() == 1);  // A~B, B~C above threshold; A~C below

    std::vector<Affordance> affs;
    for (const auto& c : clouds) affs.push_back({c, "strip", SkillKind::kTipPush});
    CHECK(associate_multiview(affs, thresh).size() == uf.components());
  }

  SECTION("skill disagreement keeps both detections") {
    std::vector<Affordance> affs{{handle, "handle", SkillKind::kGraspPart},
                                 {handle, "handle", SkillKind::kPinchPull}};
    CHECK(associate_multiview(affs, 0.5).size() == 2);
  }

  SECTION("part name comes from the larger cloud") {
    PointCloud big = patch({0, 0, 0}, 14, 6, 0.005);
    PointCloud small(big.begin(), big.begin() + 40);
    std::vector<Affordance> affs{{small, "edge", SkillKind::kTipPush},
                                 {big, "panel", SkillKind::kTipPush}};
    auto merged = associate_multiview(affs, 0.2);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].part == "panel");
  }

  SECTION("association is idempotent and never grows") {
    std::vector<Affordance> affs{{patch({0, 0, 0}, 10, 5, 0.005), "a", SkillKind::kTipPush},
                                 {patch({0.01, 0, 0}, 10, 5, 0.005), "b", SkillKind::kTipPush},
                                 {patch({0.5, 0, 0}, 10, 5, 0.005), "c", SkillKind::kTipPush}};
    auto once = associate_multiview(affs, 0.3);
    auto twice = associate_multiview(once, 0.3);
    CHECK(once.size() <= affs.size());
    CHECK(twice.size() == once.size());
  }

  SECTION("threshold domain is validated") {
    std::vector<Affordance> affs;
    CHECK_THROWS_AS(associate_multiview(affs, 0.0), Error);
    CHECK_THROWS_AS(associate_multiview(affs, 1.5), Error);
  }
}

TEST_CASE("whole_object_affordance copies the full cloud") {
  SimWorld world(generate_scene("tabletop-pick", 0), 0);
  MockEmbedding mock;
  ObjectMap map = build_scene_map(world, mock);
  const Object* mug = find_by_label(map, "blue mug");
  REQUIRE(mug != nullptr);
  Affordance whole = whole_object_affordance(*mug, SkillKind::kGraspPart);
  CHECK(whole.part == "whole object");
  CHECK(whole.skill == SkillKind::kGraspPart);
  CHECK(iou_3d(whole.point_cloud, mug->point_cloud, 0.02) == Catch::Approx(1.0));
}

TEST_CASE("noisy backend reproduces wrong-part detections") {
  NoiseConfig noise;
  noise.wrong_part_probability = 1.0;
  SimWorld world(generate_scene("keyboard", 3), 3, noise);
  MockEmbedding mock;
  ObjectMap map = build_scene_map(world, mock);
  const Object* kb = find_by_label(map, "computer keyboard");
  REQUIRE(kb != nullptr);
  SimAffordanceBackend backend(world, noise);
  auto affs = detect_affordances(*kb, "press the space bar", 3, backend);
  REQUIRE_FALSE(affs.empty());
  int kb_index = scene_object_index(world.spec(), "computer keyboard");
  PointCloud gt_space;
  for (const auto& part : world.spec().objects[kb_index].parts)
    if (part.name == "space bar") gt_space = world.part_cloud(kb_index, part);
  // localization landed on some other key
  CHECK(iou_3d(affs[0].point_cloud, gt_space, 0.02) < 0.2);
}

TEST_CASE("backend exceptions surface as detection failures") {
  struct ThrowingBackend : AffordanceBackend {
    std::vector<AffordanceProposal> propose(const std::vector<Crop>&,
                                            const std::string&) override {
      throw std::runtime_error("vlm offline");
    }
    PointCloud localize(const AffordanceProposal&, const Crop&) override { return {}; }
  };
  SimWorld world(generate_scene("tabletop-pick", 0), 0);
  MockEmbedding mock;
  ObjectMap map = build_scene_map(world, mock);
  ThrowingBackend backend;
  try {
    detect_affordances(map.objects.front(), "pick up", 3, backend);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AffordanceDetectionFailed);
    CHECK(std::string(e.what()).find("vlm offline") != std::string::npos);
  }
}
