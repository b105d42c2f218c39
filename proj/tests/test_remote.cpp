#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <thread>

#include "asp/harness.hpp"
#include "asp/remote.hpp"
#include "test_helpers.hpp"

using namespace asp;

namespace {

// In-process test double: serves the shared JSON envelope, answering with the
// deterministic mock implementations.
class TestServer {
 public:
  TestServer() {
    MockEmbedding* embedder = &embedder_;
    MockClassifier* classifier = &classifier_;
    server_.Post("/asp", [this, embedder, classifier](const httplib::Request& req,
                                                      httplib::Response& res) {
      Json request = Json::parse(req.body);
      std::string op = request.at("op").get<std::string>();
      Json reply;
      if (op == "embed_text") {
        reply["vector"] = embedder->embed_text(request.at("text").get<std::string>()).values;
      } else if (op == "embed_crop") {
        Crop crop;
        if (!request.at("crop").at("view_label").is_null())
          crop.view_label = request.at("crop").at("view_label").get<std::string>();
        reply["vector"] = embedder->embed_crop(crop).values;
      } else if (op == "classify") {
        std::vector<Crop> views;
        for (const auto& v : request.at("views")) {
          Crop crop;
          if (!v.at("view_label").is_null())
            crop.view_label = v.at("view_label").get<std::string>();
          views.push_back(crop);
        }
        reply["relevant"] =
            classifier->is_relevant(views, request.at("query").get<std::string>());
      } else if (op == "propose") {
        Json proposals = Json::array();
        proposals.push_back({{"skill", "grasp"}, {"part", ""}, {"crop_index", 0}});
        reply["proposals"] = proposals;
      } else if (op == "localize") {
        reply["points"] = Json::array({{0.1, 0.2, 0.3}, {0.11, 0.21, 0.31}});
      } else if (op == "next_step") {
        reply = next_step_reply(request);
      }
      res.set_content(reply.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~TestServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  int port() const { return port_; }

  void set_steps(std::vector<Json> steps) { steps_ = std::move(steps); }

 private:
  Json next_step_reply(const Json& request) {
    // sanity: requests carry the query, manifest, and full history
    REQUIRE(request.contains("query"));
    REQUIRE(request.contains("manifest"));
    REQUIRE(request.contains("history"));
    if (step_index_ >= steps_.size()) return Json{{"type", "finish"}, {"answer", "done"}};
    return steps_[step_index_++];
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  MockEmbedding embedder_;
  MockClassifier classifier_;
  std::vector<Json> steps_;
  std::size_t step_index_ = 0;
};

EpisodeConfig make_cfg(std::uint64_t seed = 0) {
  EpisodeConfig cfg;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("remote embedding provider matches the local mock") {
  TestServer server;
  RemoteConfig cfg;
  cfg.port = server.port();
  RemoteEmbeddingProvider remote(cfg, 4096);
  MockEmbedding local(4096);

  for (const char* text : {"red ball", "metal cabinet", ""}) {
    FeatureVector a = remote.embed_text(text);
    FeatureVector b = local.embed_text(text);
    CHECK(cosine(a, b) == Catch::Approx(1.0));
  }
  Crop crop;
  crop.view_label = "blue mug";
  CHECK(cosine(remote.embed_crop(crop), local.embed_crop(crop)) == Catch::Approx(1.0));
}

TEST_CASE("remote classifier speaks the classify op") {
  TestServer server;
  RemoteConfig cfg;
  cfg.port = server.port();
  RemoteClassifier remote(cfg);
  Crop crop;
  crop.view_label = "red ball";
  CHECK(remote.is_relevant({crop}, "red ball"));
  CHECK_FALSE(remote.is_relevant({crop}, "blue mug"));
}

TEST_CASE("remote affordance backend round-trips proposals and clouds") {
  TestServer server;
  RemoteConfig cfg;
  cfg.port = server.port();
  RemoteAffordanceBackend remote(cfg);
  Crop crop;
  crop.view_label = "red ball";
  auto proposals = remote.propose({crop}, "pick up");
  REQUIRE(proposals.size() == 1);
  CHECK(proposals[0].skill == SkillKind::kGrasp);
  PointCloud cloud = remote.localize(proposals[0], crop);
  REQUIRE(cloud.size() == 2);
  CHECK(cloud[0].x == Catch::Approx(0.1));
}

TEST_CASE("unreachable remote backends surface as tool failures, not crashes") {
  RemoteConfig dead;
  dead.port = 1;  // nothing listens there
  dead.timeout_sec = 0.2;
  dead.retries = 0;
  RemoteEmbeddingProvider embedder(dead, 4096);

  SceneSpec scene = generate_scene("tabletop-pick", 0);
  SimWorld world(scene, 0);
  MockClassifier classifier;
  SimAffordanceBackend aff(world);
  SimGraspProposer proposer;
  SimMotionChecker checker(world);
  SessionConfig session_cfg;
  ToolSession session(
      world, session_cfg, embedder, classifier, aff, proposer, checker,
      [&world](int id) {
        return std::vector<SegmentedFrame>{
            world.render_segmented_frame(world.spec().home_camera, id, {})};
      },
      [&world](const Pose3D& cam, int id) {
        return world.render_segmented_frame(cam, id, {});
      });
  ToolOutput out = session.object_retrieval("red ball");
  CHECK_FALSE(out.success);
  CHECK_FALSE(out.feedback_msg.empty());
}

TEST_CASE("external agent backend drives an episode like the scripted one") {
  TestServer server;
  std::vector<Json> steps{
      Json{{"type", "tool_call"},
           {"tool", "object_retrieval"},
           {"args", {{"query", "red ball"}}}},
      Json{{"type", "tool_call"},
           {"tool", "interact"},
           {"args", {{"obj", "red_ball_0"}, {"action", "pick up"}}}},
      Json{{"type", "finish"}, {"answer", "picked"}}};
  server.set_steps(steps);

  RemoteConfig cfg;
  cfg.port = server.port();
  EpisodeHarness remote_run(generate_scene("tabletop-pick", 3), make_cfg(3));
  auto backend = external_backend(cfg);
  EpisodeLog remote_log = remote_run.run("pick up the red ball", *backend);

  EpisodeHarness scripted_run(generate_scene("tabletop-pick", 3), make_cfg(3));
  auto scripted = scripted_policy(plan_for_task(scripted_run.world().spec(), "pick-red-ball"));
  EpisodeLog scripted_log = scripted_run.run("pick up the red ball", *scripted);

  REQUIRE(remote_log.score.has_value());
  CHECK(*remote_log.score == 1.0);
  REQUIRE(remote_log.records.size() == scripted_log.records.size());
  for (std::size_t i = 0; i < remote_log.records.size(); ++i)
    CHECK(output_to_json(remote_log.records[i].output).dump() ==
          output_to_json(scripted_log.records[i].output).dump());
}

TEST_CASE("malformed external replies become protocol errors") {
  TestServer server;
  server.set_steps({Json{{"type", "dance"}}, Json{{"type", "quantum"}}});
  RemoteConfig cfg;
  cfg.port = server.port();
  EpisodeHarness harness(generate_scene("tabletop-pick", 0), make_cfg());
  auto backend = external_backend(cfg);
  EpisodeLog log = harness.run("pick up the red ball", *backend);
  REQUIRE(log.records.size() == 2);  // two consecutive violations abort
  for (const auto& record : log.records) CHECK(record.protocol_error);
  CHECK_FALSE(log.finished);
}
