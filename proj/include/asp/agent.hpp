#pragma once

#include <cstdint>
#include <cstdio>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "asp/common.hpp"
#include "asp/config.hpp"
#include "asp/sim.hpp"
#include "asp/tools.hpp"

namespace asp {

using Json = nlohmann::json;

struct ToolCall {
  std::string tool;
  std::map<std::string, std::string> args;
};

struct AgentStep {
  enum class Kind { kCall, kFinish };
  Kind kind = Kind::kFinish;
  ToolCall call;
  std::string answer;

  static AgentStep make_call(ToolCall call) {
    return {Kind::kCall, std::move(call), ""};
  }
  static AgentStep finish(std::string answer) {
    return {Kind::kFinish, {}, std::move(answer)};
  }
};

struct CallRecord {
  ToolCall call;
  ToolOutput output;
  std::uint64_t world_digest = 0;
  bool protocol_error = false;
};

struct EpisodeLog {
  std::string query;
  std::string scene;
  std::uint64_t seed = 0;
  Mode mode = Mode::kTabletop;
  bool no_aff = false;
  std::vector<CallRecord> records;
  State final_state;
  std::optional<double> score;
  std::map<std::string, int> retry_counts;
  bool finished = false;
  std::string answer;
};

// Tool schema exported to LLM backends. Precondition prose lives in the
// descriptions, mirroring the tool prompts.
inline Json tool_manifest() {
  auto tool = [](const char* name, std::vector<std::pair<const char*, const char*>> params,
                 const char* returns, const char* description) {
    Json t;
    t["name"] = name;
    t["params"] = Json::array();
    for (auto& [pname, ptype] : params)
      t["params"].push_back({{"name", pname}, {"type", ptype}});
    t["returns"] = returns;
    t["description"] = description;
    return t;
  };
  Json manifest = Json::array();
  manifest.push_back(tool(
      "object_retrieval", {{"query", "string"}}, "state",
      "Retrieve objects matching an open-vocabulary text query and add them to the "
      "inventory as new object keys. Rebuilds the object map first when it is stale. "
      "Returns the current state; finding nothing is not an error."));
  manifest.push_back(tool(
      "distance_between", {{"a", "string"}, {"b", "string"}}, "float",
      "Euclidean distance in meters between the centroids of two objects. "
      "Preconditions: both keys are in the inventory."));
  manifest.push_back(tool(
      "distance_to", {{"a", "string"}}, "float",
      "Distance in meters from the robot to the object centroid. Precondition: the "
      "key is in the inventory."));
  manifest.push_back(tool(
      "left_of", {{"a", "string"}, {"b", "string"}}, "bool",
      "True when object a is strictly left of object b from the observation "
      "viewpoint. Preconditions: both keys are in the inventory."));
  manifest.push_back(tool(
      "right_of", {{"a", "string"}, {"b", "string"}}, "bool",
      "True when object a is strictly right of object b from the observation "
      "viewpoint. Preconditions: both keys are in the inventory."));
  manifest.push_back(tool(
      "size_of", {{"a", "string"}}, "float",
      "Largest axis-aligned extent of the object in meters. Precondition: the key "
      "is in the inventory."));
  manifest.push_back(tool(
      "interact", {{"obj", "string"}, {"action", "string"}}, "state",
      "Detect the affordance matching the action description on the object and run "
      "the corresponding skill (grasp, place, drop, grasp_part, tip_push, "
      "pinch_pull, hook_pull). Preconditions: obj is in the inventory; grasping and "
      "pulling require an empty gripper; place and drop require a held object."));
  manifest.push_back(tool(
      "go_to", {{"obj", "string"}, {"action", "string"}}, "state",
      "Mobile mode only: navigate to a pose suited to performing the action on the "
      "object, then redetect it from the new viewpoint. Precondition: obj is in "
      "the inventory."));
  return manifest;
}

inline bool manifest_has_tool(const Json& manifest, const std::string& name) {
  for (const auto& t : manifest)
    if (t.at("name") == name) return true;
  return false;
}

inline std::vector<std::string> manifest_params(const Json& manifest,
                                                const std::string& name) {
  std::vector<std::string> out;
  for (const auto& t : manifest)
    if (t.at("name") == name)
      for (const auto& p : t.at("params")) out.push_back(p.at("name"));
  return out;
}

class AgentBackend {
 public:
  virtual ~AgentBackend() = default;
  virtual AgentStep next_step(const std::string& query, const Json& manifest,
                              const std::vector<CallRecord>& history) = 0;
};

inline ToolOutput dispatch_tool(ToolSession& session, const ToolCall& call) {
  const auto& args = call.args;
  auto arg = [&args](const char* name) -> const std::string& {
    return args.at(name);
  };
  if (call.tool == "object_retrieval") return session.object_retrieval(arg("query"));
  if (call.tool == "distance_between") return session.distance_between(arg("a"), arg("b"));
  if (call.tool == "distance_to") return session.distance_to(arg("a"));
  if (call.tool == "left_of") return session.left_of(arg("a"), arg("b"));
  if (call.tool == "right_of") return session.right_of(arg("a"), arg("b"));
  if (call.tool == "size_of") return session.size_of(arg("a"));
  if (call.tool == "interact") return session.interact(arg("obj"), arg("action"));
  if (call.tool == "go_to") return session.go_to(arg("obj"), arg("action"));
  return ToolOutput::fail("unknown tool: " + call.tool);
}

// Validates a call against the manifest before it can reach the tool layer.
inline std::optional<std::string> validate_call(const Json& manifest,
                                                const ToolCall& call) {
  if (!manifest_has_tool(manifest, call.tool))
    return "unknown tool '" + call.tool + "'; available tools are listed in the manifest";
  auto params = manifest_params(manifest, call.tool);
  for (const auto& p : params)
    if (!call.args.count(p))
      return "missing argument '" + p + "' for tool '" + call.tool + "'";
  for (const auto& [name, value] : call.args) {
    (void)value;
    if (std::find(params.begin(), params.end(), name) == params.end())
      return "unexpected argument '" + name + "' for tool '" + call.tool + "'";
  }
  return std::nullopt;
}

struct EpisodeSetup {
  std::string query;
  const TaskSpec* task = nullptr;  // optional; judged at the end when present
};

// Tool-call loop with feedback: steps come from the backend until Finish or
// the step budget. Skill retries past the cap are refused inside the tool
// layer; malformed backend output aborts after two consecutive violations.
inline EpisodeLog run_episode(SimWorld& world, ToolSession& session,
                              const EpisodeSetup& setup, AgentBackend& backend,
                              const EpisodeConfig& cfg) {
  EpisodeLog log;
  log.query = setup.query;
  log.scene = world.spec().template_name;
  log.seed = cfg.seed;
  log.mode = cfg.session.mode;
  log.no_aff = cfg.session.no_aff;
  Json manifest = tool_manifest();
  int consecutive_protocol_errors = 0;
  for (int step = 0; step < cfg.step_budget; ++step) {
    AgentStep next;
    try {
      next = backend.next_step(setup.query, manifest, log.records);
    } catch (const std::exception& e) {
      CallRecord record;
      record.call.tool = "<protocol>";
      record.output = ToolOutput::fail(std::string("protocol error: ") + e.what());
      record.protocol_error = true;
      record.world_digest = world.digest();
      log.records.push_back(std::move(record));
      if (++consecutive_protocol_errors >= 2) break;
      continue;
    }
    if (next.kind == AgentStep::Kind::kFinish) {
      log.finished = true;
      log.answer = next.answer;
      break;
    }
    CallRecord record;
    record.call = next.call;
    if (auto invalid = validate_call(manifest, next.call)) {
      record.output = ToolOutput::fail(*invalid);
      record.protocol_error = true;
      record.world_digest = world.digest();
      log.records.push_back(std::move(record));
      if (++consecutive_protocol_errors >= 2) break;
      continue;
    }
    consecutive_protocol_errors = 0;
    record.output = dispatch_tool(session, next.call);
    record.world_digest = world.digest();
    log.records.push_back(std::move(record));
    if (!session.state().invariants_hold())
      throw Error(ErrorCode::InvalidParameter,
                  "state invariants violated after a tool call");
  }
  log.final_state = session.state();
  log.retry_counts = session.retry_counts();
  if (setup.task) log.score = world.judge(*setup.task);
  return log;
}

// ---------------------------------------------------------------------------
// Scripted policy: replays a plan, with selector steps for the handful of
// data-dependent choices (nearest to an anchor, largest/smallest) and
// reactive rules that inject recovery steps when a failure matches.

struct PlanStep {
  enum class Kind { kCall, kSelectMinDistance, kSelectMaxSize, kSelectMinSize, kFinish };
  Kind kind = Kind::kCall;
  ToolCall call;                         // kCall
  std::vector<std::string> candidates;   // selector inputs (may be $vars)
  std::string anchor;                    // kSelectMinDistance
  std::string bind_as;                   // selector output variable, e.g. "$target"
  std::string answer;                    // kFinish

  static PlanStep make_call(std::string tool,
                            std::map<std::string, std::string> args) {
    PlanStep s;
    s.kind = Kind::kCall;
    s.call = {std::move(tool), std::move(args)};
    return s;
  }
  static PlanStep select_min_distance(std::vector<std::string> candidates,
                                      std::string anchor, std::string bind_as) {
    PlanStep s;
    s.kind = Kind::kSelectMinDistance;
    s.candidates = std::move(candidates);
    s.anchor = std::move(anchor);
    s.bind_as = std::move(bind_as);
    return s;
  }
  static PlanStep select_size(bool largest, std::vector<std::string> candidates,
                              std::string bind_as) {
    PlanStep s;
    s.kind = largest ? Kind::kSelectMaxSize : Kind::kSelectMinSize;
    s.candidates = std::move(candidates);
    s.bind_as = std::move(bind_as);
    return s;
  }
  static PlanStep finish(std::string answer) {
    PlanStep s;
    s.kind = Kind::kFinish;
    s.answer = std::move(answer);
    return s;
  }
};

struct ReactiveRule {
  std::string feedback_contains;
  std::vector<PlanStep> inject;
};

class ScriptedPolicy : public AgentBackend {
 public:
  ScriptedPolicy(std::vector<PlanStep> plan, std::vector<ReactiveRule> rules = {})
      : rules_(std::move(rules)) {
    for (auto& step : plan) queue_.push_back(std::move(step));
  }

  AgentStep next_step(const std::string& query, const Json& manifest,
                      const std::vector<CallRecord>& history) override {
    (void)query;
    (void)manifest;
    maybe_apply_rules(history);
    if (selector_) return continue_selector(history);
    if (queue_.empty()) return AgentStep::finish("plan exhausted");
    PlanStep step = std::move(queue_.front());
    queue_.pop_front();
    switch (step.kind) {
      case PlanStep::Kind::kFinish:
        return AgentStep::finish(step.answer);
      case PlanStep::Kind::kCall: {
        ToolCall call = step.call;
        for (auto& [name, value] : call.args) value = substitute(value);
        last_issued_ = call;
        return AgentStep::make_call(std::move(call));
      }
      default:
        selector_ = SelectorState{};
        selector_->step = std::move(step);
        for (auto& c : selector_->step.candidates) c = substitute(c);
        return continue_selector(history);
    }
  }

 private:
  struct SelectorState {
    PlanStep step;
    std::size_t measured = 0;
    std::vector<double> values;
  };

  std::string substitute(const std::string& value) const {
    if (!value.empty() && value.front() == '$') {
      auto it = bindings_.find(value);
      if (it != bindings_.end()) return it->second;
    }
    return value;
  }

  AgentStep continue_selector(const std::vector<CallRecord>& history) {
    auto& sel = *selector_;
    if (sel.measured > 0) {
      // collect the result of the measurement issued on the previous step
      const auto& record = history.back();
      double value = 0.0;
      if (const double* v = std::get_if<double>(&record.output.output)) value = *v;
      sel.values.push_back(record.output.success ? value : 1e18);
    }
    if (sel.measured < sel.step.candidates.size()) {
      const std::string& candidate = sel.step.candidates[sel.measured];
      ++sel.measured;
      ToolCall call;
      if (sel.step.kind == PlanStep::Kind::kSelectMinDistance) {
        call = {"distance_between", {{"a", candidate}, {"b", substitute(sel.step.anchor)}}};
      } else {
        call = {"size_of", {{"a", candidate}}};
      }
      last_issued_ = call;
      return AgentStep::make_call(std::move(call));
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < sel.values.size(); ++i) {
      bool better = sel.step.kind == PlanStep::Kind::kSelectMaxSize
                        ? sel.values[i] > sel.values[best]
                        : sel.values[i] < sel.values[best];
      if (better) best = i;
    }
    bindings_[sel.step.bind_as] = sel.step.candidates[best];
    selector_.reset();
    // proceed with the next plan step immediately
    if (queue_.empty()) return AgentStep::finish("plan exhausted");
    return next_step("", Json::array(), {});
  }

  void maybe_apply_rules(const std::vector<CallRecord>& history) {
    if (history.empty() || history.size() == last_rule_check_) return;
    last_rule_check_ = history.size();
    const auto& record = history.back();
    if (record.output.success) return;
    for (const auto& rule : rules_) {
      if (record.output.feedback_msg.find(rule.feedback_contains) == std::string::npos)
        continue;
      if (injections_ >= kMaxInjections) return;
      ++injections_;
      for (auto it = rule.inject.rbegin(); it != rule.inject.rend(); ++it)
        queue_.push_front(*it);
      return;
    }
  }

  static constexpr int kMaxInjections = 8;
  std::deque<PlanStep> queue_;
  std::vector<ReactiveRule> rules_;
  std::map<std::string, std::string> bindings_;
  std::optional<SelectorState> selector_;
  std::optional<ToolCall> last_issued_;
  std::size_t last_rule_check_ = 0;
  int injections_ = 0;
};

inline std::unique_ptr<AgentBackend> scripted_policy(std::vector<PlanStep> plan,
                                                     std::vector<ReactiveRule> rules = {}) {
  return std::make_unique<ScriptedPolicy>(std::move(plan), std::move(rules));
}

// Seeded chaos backend for state-machine fuzzing: issues random (mostly
// well-formed) tool calls against keys it has seen plus junk keys.
class RandomBackend : public AgentBackend {
 public:
  explicit RandomBackend(std::uint64_t seed, int steps = 20)
      : rng_(seed), steps_left_(steps) {}

  AgentStep next_step(const std::string& query, const Json& manifest,
                      const std::vector<CallRecord>& history) override {
    (void)query;
    if (steps_left_-- <= 0) return AgentStep::finish("done");
    // harvest keys from the last state output
    for (auto it = history.rbegin(); it != history.rend(); ++it) {
      if (const State* s = std::get_if<State>(&it->output.output)) {
        known_keys_ = s->inventory;
        if (s->held_object) known_keys_.push_back(*s->held_object);
        break;
      }
    }
    static const std::vector<std::string> queries{
        "red ball", "blue mug", "white bowl", "toy carrot", "yellow box",
        "table", "duckie", "mug", "handle"};
    static const std::vector<std::string> actions{
        "pick up",       "place it down", "drop it",   "press the button",
        "open",          "pull",          "push",      "remove it",
        "pick up by the handle"};
    std::uniform_int_distribution<int> tool_pick(0, 9);
    int t = tool_pick(rng_);
    auto key = [this]() -> std::string {
      if (known_keys_.empty() || chance(0.2)) return "bogus_key_" + std::to_string(rng_() % 3);
      return known_keys_[rng_() % known_keys_.size()];
    };
    switch (t) {
      case 0:
      case 1:
        return AgentStep::make_call(
            {"object_retrieval", {{"query", queries[rng_() % queries.size()]}}});
      case 2:
        return AgentStep::make_call({"distance_between", {{"a", key()}, {"b", key()}}});
      case 3:
        return AgentStep::make_call({"distance_to", {{"a", key()}}});
      case 4:
        return AgentStep::make_call({"left_of", {{"a", key()}, {"b", key()}}});
      case 5:
        return AgentStep::make_call({"right_of", {{"a", key()}, {"b", key()}}});
      case 6:
        return AgentStep::make_call({"size_of", {{"a", key()}}});
      case 7:
      case 8:
        return AgentStep::make_call(
            {"interact", {{"obj", key()}, {"action", actions[rng_() % actions.size()]}}});
      default:
        if (chance(0.15))
          return AgentStep::make_call({"warp_drive", {{"x", "1"}}});  // must be rejected
        return AgentStep::make_call(
            {"interact", {{"obj", key()}, {"action", actions[rng_() % actions.size()]}}});
    }
  }

 private:
  bool chance(double p) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < p;
  }
  std::mt19937_64 rng_;
  int steps_left_;
  std::vector<std::string> known_keys_;
};

// ---------------------------------------------------------------------------
// Episode log serialization (JSON lines; one record per tool call).

inline Json state_to_json(const State& state) {
  Json j;
  j["held"] = state.held_object ? Json(*state.held_object) : Json(nullptr);
  j["inventory"] = state.inventory;
  return j;
}

inline Json output_to_json(const ToolOutput& output) {
  Json j;
  j["success"] = output.success;
  j["feedback"] = output.feedback_msg;
  if (const State* s = std::get_if<State>(&output.output)) {
    j["output"] = {{"type", "state"}, {"value", state_to_json(*s)}};
  } else if (const double* d = std::get_if<double>(&output.output)) {
    j["output"] = {{"type", "float"}, {"value", *d}};
  } else if (const bool* b = std::get_if<bool>(&output.output)) {
    j["output"] = {{"type", "bool"}, {"value", *b}};
  } else {
    j["output"] = {{"type", "none"}};
  }
  return j;
}

inline std::string episode_log_jsonl(const EpisodeLog& log) {
  std::ostringstream out;
  Json header;
  header["type"] = "episode";
  header["query"] = log.query;
  header["scene"] = log.scene;
  header["seed"] = log.seed;
  header["mode"] = to_string(log.mode);
  header["no_aff"] = log.no_aff;
  out << header.dump() << "\n";
  int index = 0;
  for (const auto& record : log.records) {
    Json j;
    j["type"] = "call";
    j["index"] = index++;
    j["tool"] = record.call.tool;
    j["args"] = record.call.args;
    j["protocol_error"] = record.protocol_error;
    j.update(output_to_json(record.output));
    char digest[20];
    std::snprintf(digest, sizeof(digest), "%016llx",
                  static_cast<unsigned long long>(record.world_digest));
    j["world_digest"] = digest;
    out << j.dump() << "\n";
  }
  Json footer;
  footer["type"] = "result";
  footer["finished"] = log.finished;
  footer["answer"] = log.answer;
  footer["state"] = state_to_json(log.final_state);
  footer["score"] = log.score ? Json(*log.score) : Json(nullptr);
  footer["retries"] = log.retry_counts;
  out << footer.dump() << "\n";
  return out.str();
}

}  // namespace asp
