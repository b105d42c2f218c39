#include <catch2/catch_amalgamated.hpp>

#include "asp/harness.hpp"
#include "asp/render.hpp"
#include "asp/serialize.hpp"
#include "test_helpers.hpp"

using namespace asp;

TEST_CASE("base64 round-trip") {
  std::vector<std::uint8_t> data;
  for (int i = 0; i < 300; ++i) data.push_back(static_cast<std::uint8_t>(i * 7));
  CHECK(base64_decode(base64_encode(data)) == data);
  CHECK(base64_encode({}) == "");
  CHECK(base64_decode("") == std::vector<std::uint8_t>{});
  // padding cases
  CHECK(base64_decode(base64_encode({1})) == std::vector<std::uint8_t>{1});
  CHECK(base64_decode(base64_encode({1, 2})) == std::vector<std::uint8_t>{1, 2});
}

TEST_CASE("occupancy grid round-trip") {
  OccupancyGrid grid = OccupancyGrid::make(0.05, {-1.0, 2.0}, 40, 30, 7);
  grid.set(3, 4, 255);
  grid.set(39, 29, 100);
  Json j = grid_to_json(grid);
  OccupancyGrid back = grid_from_json(j);
  CHECK(back.resolution == grid.resolution);
  CHECK(back.origin.x == grid.origin.x);
  CHECK(back.width == grid.width);
  CHECK(back.height == grid.height);
  CHECK(back.cells == grid.cells);
  // corrupted payloads are rejected
  j["width"] = 99;
  CHECK_THROWS_AS(grid_from_json(j), Error);
}

TEST_CASE("scene specs round-trip through json for every template") {
  for (const auto& name : scene_template_names()) {
    SceneSpec spec = generate_scene(name, 13);
    Json j = scene_to_json(spec);
    SceneSpec back = scene_from_json(j);
    CHECK(scene_to_json(back).dump() == j.dump());
  }
}

TEST_CASE("point clouds serialize as flat xyz triples") {
  PointCloud pc{{1.5, -2.0, 0.25}, {0, 0, 3}};
  Json j = cloud_to_json(pc);
  REQUIRE(j.size() == 2);
  CHECK(j[0][0] == 1.5);
  CHECK(j[0][1] == -2.0);
  PointCloud back = cloud_from_json(j);
  CHECK(back.size() == 2);
  CHECK(back[1].z == 3.0);
}

TEST_CASE("object map json matches the documented schema") {
  SceneSpec scene = generate_scene("tabletop-pick", 0);
  SimWorld world(scene, 0);
  MockEmbedding mock;
  ObjectMap map = asp::testing::build_scene_map(world, mock);
  // attach one affordance so the schema includes it
  SimAffordanceBackend backend(world);
  for (auto& obj : map.objects) {
    if (obj.gt_label() && *obj.gt_label() == "blue mug") {
      obj.affordances = detect_affordances(obj, "pick up by the handle", 3, backend);
    }
  }
  Json j = object_map_to_json(map);
  REQUIRE(j.contains("objects"));
  bool saw_affordance = false;
  for (const auto& obj : j.at("objects")) {
    CHECK(obj.contains("id"));
    CHECK(obj.contains("points"));
    CHECK(obj.contains("features"));
    CHECK(obj.contains("crops"));
    for (const auto& crop : obj.at("crops")) {
      CHECK(crop.contains("area"));
      CHECK(crop.contains("border"));
      CHECK(crop.contains("frame"));
    }
    for (const auto& aff : obj.at("affordances")) {
      saw_affordance = true;
      CHECK(aff.contains("part"));
      CHECK(aff.contains("skill"));
      CHECK(aff.contains("points"));
    }
  }
  CHECK(saw_affordance);
}

TEST_CASE("noise config parses with defaults") {
  NoiseConfig none = noise_from_json(Json::object());
  CHECK_FALSE(none.any());
  NoiseConfig some = noise_from_json(Json{{"p_oversegment", 0.5},
                                          {"grasp_slip_probability", 0.1}});
  CHECK(some.p_oversegment == 0.5);
  CHECK(some.grasp_slip_probability == 0.1);
  CHECK(some.affordance_jitter_sigma == 0.0);
  CHECK(some.any());
}

TEST_CASE("episode logs are valid json lines") {
  EpisodeConfig cfg;
  cfg.seed = 4;
  EpisodeHarness harness(generate_scene("tabletop-pick", 4), cfg);
  auto backend = scripted_policy(plan_for_task(harness.world().spec(), "pick-red-ball"));
  EpisodeLog log = harness.run("pick up the red ball", *backend);
  std::string jsonl = episode_log_jsonl(log);

  std::istringstream lines(jsonl);
  std::string line;
  std::vector<Json> parsed;
  while (std::getline(lines, line)) parsed.push_back(Json::parse(line));
  REQUIRE(parsed.size() == log.records.size() + 2);
  CHECK(parsed.front().at("type") == "episode");
  CHECK(parsed.back().at("type") == "result");
  CHECK(parsed.back().at("score") == 1.0);
  for (std::size_t i = 1; i + 1 < parsed.size(); ++i) {
    CHECK(parsed[i].at("type") == "call");
    CHECK(parsed[i].contains("world_digest"));
    CHECK(parsed[i].contains("output"));
  }
}

TEST_CASE("graymap rendering produces valid pgm headers") {
  SceneSpec scene = generate_scene("mobile-room", 2);
  SimWorld world(scene, 2);
  Graymap overhead = render_scene_graymap(world);
  CHECK(overhead.width > 0);
  CHECK(overhead.height > 0);
  std::string pgm = overhead.to_pgm();
  CHECK(pgm.substr(0, 3) == "P5\n");
  CHECK(pgm.size() > static_cast<std::size_t>(overhead.width * overhead.height));

  NavConfig nav;
  auto candidates = nav_candidates_on_radius(
      *scene.grid, {scene.objects[2].pose.position.x, scene.objects[2].pose.position.y},
      std::nullopt, 0.85, nav);
  Graymap nav_img = render_nav_graymap(*scene.grid, candidates,
                                       Pose2D::make(1.0, 1.0, 0.0), Point2{2.0, 2.0});
  CHECK(nav_img.width == scene.grid->width);
  CHECK(nav_img.height == scene.grid->height);
}
