#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "asp/asp.hpp"
#include "asp/remote.hpp"

namespace {

asp::SceneSpec load_scene(const std::string& scene_arg, std::uint64_t seed) {
  if (scene_arg.size() > 5 && scene_arg.substr(scene_arg.size() - 5) == ".json")
    return asp::scene_from_json(asp::load_json_file(scene_arg));
  return asp::generate_scene(scene_arg, seed);
}

asp::RemoteConfig parse_backend_url(const std::string& url) {
  asp::RemoteConfig cfg;
  std::string rest = url;
  auto scheme = rest.find("://");
  if (scheme != std::string::npos) rest = rest.substr(scheme + 3);
  auto slash = rest.find('/');
  if (slash != std::string::npos) {
    cfg.path = rest.substr(slash);
    rest = rest.substr(0, slash);
  }
  auto colon = rest.find(':');
  if (colon == std::string::npos)
    throw asp::Error(asp::ErrorCode::InvalidParameter,
                     "backend url must look like host:port[/path]");
  cfg.host = rest.substr(0, colon);
  cfg.port = std::stoi(rest.substr(colon + 1));
  return cfg;
}

int run_one(const std::string& scene_arg, const std::string& query,
            const std::string& task_name, const std::string& backend_kind,
            const std::string& backend_url, bool no_aff, std::uint64_t seed,
            const std::string& noise_file, const std::string& log_file, bool quiet) {
  asp::EpisodeConfig cfg;
  cfg.seed = seed;
  cfg.session.no_aff = no_aff;
  if (!noise_file.empty())
    cfg.noise = asp::noise_from_json(asp::load_json_file(noise_file));

  asp::SceneSpec scene = load_scene(scene_arg, seed);
  const asp::TaskSpec* task = nullptr;
  for (const auto& t : scene.tasks) {
    if (!task_name.empty() ? t.name == task_name : t.query == query) task = &t;
  }
  std::string effective_query = query.empty() && task ? task->query : query;

  asp::EpisodeHarness harness(scene, cfg);
  std::unique_ptr<asp::AgentBackend> backend;
  if (backend_kind == "scripted") {
    if (!task) {
      std::cerr << "scripted backend needs a matching scene task (check --query/--task)\n";
      return 2;
    }
    backend = asp::scripted_policy(asp::plan_for_task(scene, task->name));
  } else if (backend_kind == "external") {
    std::string url = backend_url;
    if (url.empty()) {
      const char* env = std::getenv("ASP_BACKEND_URL");
      if (!env) {
        std::cerr << "external backend needs --backend-url or ASP_BACKEND_URL\n";
        return 2;
      }
      url = env;
    }
    backend = asp::external_backend(parse_backend_url(url));
  } else {
    std::cerr << "unknown backend: " << backend_kind << "\n";
    return 2;
  }

  asp::EpisodeSetup setup;
  setup.query = effective_query;
  setup.task = task;
  asp::EpisodeLog log =
      asp::run_episode(harness.world(), harness.session(), setup, *backend, cfg);
  std::string jsonl = asp::episode_log_jsonl(log);
  if (!log_file.empty()) asp::save_text_file(log_file, jsonl);
  if (!quiet) std::cout << jsonl;
  if (log.score) {
    std::cout << "score " << *log.score << "\n";
    return *log.score >= 1.0 ? 0 : 1;
  }
  std::cout << "score n/a (no matching task)\n";
  return 0;
}

int run_batch(const std::string& suite_file, const std::string& out_file) {
  asp::Json suite = asp::load_json_file(suite_file);
  asp::Json results = asp::Json::array();
  std::cout << "suite                         episodes   mean score\n";
  std::cout << "---------------------------------------------------\n";
  for (const auto& entry : suite.at("suites")) {
    std::string name = entry.value("name", entry.at("task").get<std::string>());
    std::string template_name = entry.at("template").get<std::string>();
    std::string task_name = entry.at("task").get<std::string>();
    bool no_aff = entry.value("no_aff", false);
    double total = 0.0;
    int n = 0;
    for (const auto& seed_json : entry.at("seeds")) {
      std::uint64_t seed = seed_json.get<std::uint64_t>();
      asp::EpisodeConfig cfg;
      cfg.seed = seed;
      cfg.session.no_aff = no_aff;
      if (entry.contains("noise")) cfg.noise = asp::noise_from_json(entry.at("noise"));
      asp::SceneSpec scene = asp::generate_scene(template_name, seed);
      const asp::TaskSpec* task = nullptr;
      for (const auto& t : scene.tasks)
        if (t.name == task_name) task = &t;
      if (!task) continue;
      asp::EpisodeHarness harness(scene, cfg);
      auto backend = asp::scripted_policy(asp::plan_for_task(scene, task_name));
      asp::EpisodeLog log = harness.run_task(*task, *backend);
      total += log.score.value_or(0.0);
      ++n;
    }
    double mean = n > 0 ? total / n : 0.0;
    std::printf("%-30s %8d   %10.3f\n", name.c_str(), n, mean);
    results.push_back({{"name", name}, {"episodes", n}, {"mean_score", mean}});
  }
  if (!out_file.empty()) asp::save_text_file(out_file, results.dump(2) + "\n");
  return 0;
}

int run_render(const std::string& scene_arg, bool nav, const std::string& out_prefix,
               const std::string& map_json, std::uint64_t seed) {
  asp::SceneSpec scene = load_scene(scene_arg, seed);
  asp::EpisodeConfig cfg;
  cfg.seed = seed;
  asp::EpisodeHarness harness(scene, cfg);
  asp::Graymap overhead = asp::render_scene_graymap(harness.world());
  asp::write_pgm(overhead, out_prefix + ".pgm");
  std::cout << "wrote " << out_prefix << ".pgm\n";
  if (nav) {
    if (!harness.world().spec().grid) {
      std::cerr << "scene has no occupancy grid; nothing to render with --nav\n";
      return 2;
    }
    const auto& grid = *harness.world().spec().grid;
    asp::NavConfig nav_cfg = cfg.session.nav;
    if (scene.tasks.empty() || scene.tasks.front().goals.empty()) {
      std::cerr << "scene has no task goal to aim the nav search at\n";
      return 2;
    }
    int target = scene.tasks.front().goals.front().object_index;
    asp::Point3 centroid_pt = harness.world().object_centroid(target);
    std::vector<asp::NavCandidate> candidates;
    for (double r : nav_cfg.radius_schedule) {
      auto on_radius = asp::nav_candidates_on_radius(
          grid, {centroid_pt.x, centroid_pt.y}, std::nullopt, r, nav_cfg);
      candidates.insert(candidates.end(), on_radius.begin(), on_radius.end());
    }
    std::optional<asp::Pose2D> chosen;
    try {
      chosen = asp::select_nav_goal(grid, centroid_pt, std::nullopt, nav_cfg);
    } catch (const asp::Error&) {
    }
    asp::Graymap nav_img = asp::render_nav_graymap(grid, candidates, chosen, std::nullopt);
    asp::write_pgm(nav_img, out_prefix + "_nav.pgm");
    std::cout << "wrote " << out_prefix << "_nav.pgm\n";
  }
  if (!map_json.empty()) {
    auto& session = harness.session();
    session.object_retrieval("anything");  // forces the initial map build
    asp::save_text_file(map_json, asp::object_map_to_json(*session.map()).dump(2) + "\n");
    std::cout << "wrote " << map_json << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scene-policy sandbox: object map, tools, skills, and navigation"};
  app.require_subcommand(1);

  std::string scene, query, task, backend = "scripted", backend_url, noise_file,
                     log_file, suite_file, out_file = "scene", map_json;
  std::uint64_t seed = 0;
  bool no_aff = false, nav = false, quiet = false;
  std::string mode = "auto";

  auto* run = app.add_subcommand("run", "run one episode");
  run->add_option("--scene", scene, "template name or scene .json")->required();
  run->add_option("--query", query, "natural-language query");
  run->add_option("--task", task, "scene task name (defaults to matching the query)");
  run->add_option("--backend", backend, "scripted|external");
  run->add_option("--backend-url", backend_url, "host:port[/path] for external backend");
  run->add_option("--mode", mode, "tabletop|mobile (inferred from the scene)");
  run->add_flag("--no-aff", no_aff, "whole-object affordances; nav ignores direction");
  run->add_option("--seed", seed, "episode seed");
  run->add_option("--noise", noise_file, "noise config json");
  run->add_option("--log", log_file, "write the episode log (json lines)");
  run->add_flag("--quiet", quiet, "suppress the log on stdout");

  auto* batch = app.add_subcommand("batch", "run a suite file and print a score table");
  batch->add_option("--suite", suite_file, "suite json")->required();
  batch->add_option("--out", out_file, "write results json");

  auto* render = app.add_subcommand("render", "render scene / nav images");
  render->add_option("--scene", scene, "template name or scene .json")->required();
  render->add_flag("--nav", nav, "also render the nav grid and candidates");
  render->add_option("--out", out_file, "output prefix (default: scene)");
  render->add_option("--map-json", map_json, "also write the built object map as json");
  render->add_option("--seed", seed, "scene seed");

  auto* manifest = app.add_subcommand("manifest", "print the tool manifest json");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return run_one(scene, query, task, backend, backend_url, no_aff, seed, noise_file,
                     log_file, quiet);
    if (batch->parsed()) return run_batch(suite_file, out_file.empty() ? "" : out_file);
    if (render->parsed()) return run_render(scene, nav, out_file, map_json, seed);
    if (manifest->parsed()) {
      std::cout << asp::tool_manifest().dump(2) << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
