#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "asp/affordance.hpp"
#include "asp/agent.hpp"
#include "asp/common.hpp"
#include "asp/semantics.hpp"

namespace asp {

struct RemoteConfig {
  std::string host = "127.0.0.1";
  int port = 0;
  std::string path = "/asp";
  double timeout_sec = 2.0;
  int retries = 1;
};

namespace detail {

// One JSON request/response envelope shared by every remote backend.
inline Json remote_call(const RemoteConfig& cfg, const Json& request) {
  httplib::Client client(cfg.host, cfg.port);
  client.set_connection_timeout(std::chrono::milliseconds(
      static_cast<int>(cfg.timeout_sec * 1000)));
  client.set_read_timeout(std::chrono::milliseconds(
      static_cast<int>(cfg.timeout_sec * 1000)));
  std::string body = request.dump();
  for (int attempt = 0; attempt <= cfg.retries; ++attempt) {
    auto res = client.Post(cfg.path, body, "application/json");
    if (!res || res->status != 200) continue;
    try {
      return Json::parse(res->body);
    } catch (const std::exception&) {
      break;
    }
  }
  throw Error(ErrorCode::BackendFailure,
              "remote backend unreachable or returned an invalid reply");
}

inline Json crop_to_json(const Crop& crop) {
  Json j;
  j["area"] = crop.segment_area;
  j["border"] = crop.touches_border;
  j["frame"] = crop.source_frame_id;
  j["view_label"] = crop.view_label ? Json(*crop.view_label) : Json(nullptr);
  return j;
}

}  // namespace detail

class RemoteEmbeddingProvider : public EmbeddingProvider {
 public:
  RemoteEmbeddingProvider(RemoteConfig cfg, std::size_t dim)
      : cfg_(std::move(cfg)), dim_(dim) {}

  FeatureVector embed_text(const std::string& text) override {
    Json req{{"op", "embed_text"}, {"text", text}};
    return parse_vector(detail::remote_call(cfg_, req));
  }

  FeatureVector embed_crop(const Crop& crop) override {
    Json req{{"op", "embed_crop"}, {"crop", detail::crop_to_json(crop)}};
    return parse_vector(detail::remote_call(cfg_, req));
  }

  std::size_t dim() const override { return dim_; }

 private:
  FeatureVector parse_vector(const Json& reply) {
    FeatureVector v;
    if (!reply.contains("vector"))
      throw Error(ErrorCode::BackendFailure, "remote embedding reply missing 'vector'");
    for (const auto& x : reply.at("vector")) v.values.push_back(x.get<double>());
    if (v.dim() != dim_)
      throw Error(ErrorCode::BackendFailure, "remote embedding has the wrong dimension");
    return v.normalized();
  }

  RemoteConfig cfg_;
  std::size_t dim_;
};

class RemoteClassifier : public RelevanceClassifier {
 public:
  explicit RemoteClassifier(RemoteConfig cfg) : cfg_(std::move(cfg)) {}

  bool is_relevant(const std::vector<Crop>& object_views,
                   const std::string& query) override {
    Json views = Json::array();
    for (const auto& crop : object_views) views.push_back(detail::crop_to_json(crop));
    Json req{{"op", "classify"}, {"query", query}, {"views", views}};
    Json reply = detail::remote_call(cfg_, req);
    if (!reply.contains("relevant"))
      throw Error(ErrorCode::BackendFailure, "remote classifier reply missing 'relevant'");
    return reply.at("relevant").get<bool>();
  }

 private:
  RemoteConfig cfg_;
};

class RemoteAffordanceBackend : public AffordanceBackend {
 public:
  explicit RemoteAffordanceBackend(RemoteConfig cfg) : cfg_(std::move(cfg)) {}

  std::vector<AffordanceProposal> propose(const std::vector<Crop>& views,
                                          const std::string& action) override {
    Json jviews = Json::array();
    for (const auto& crop : views) jviews.push_back(detail::crop_to_json(crop));
    Json req{{"op", "propose"}, {"action", action}, {"views", jviews}};
    Json reply = detail::remote_call(cfg_, req);
    std::vector<AffordanceProposal> out;
    for (const auto& p : reply.at("proposals")) {
      AffordanceProposal proposal;
      proposal.skill = skill_kind_from_string(p.at("skill").get<std::string>());
      proposal.part = p.at("part").get<std::string>();
      proposal.crop_index = p.at("crop_index").get<std::size_t>();
      out.push_back(std::move(proposal));
    }
    return out;
  }

  PointCloud localize(const AffordanceProposal& proposal, const Crop& crop) override {
    Json req{{"op", "localize"},
             {"part", proposal.part},
             {"skill", to_string(proposal.skill)},
             {"crop", detail::crop_to_json(crop)}};
    Json reply = detail::remote_call(cfg_, req);
    PointCloud cloud;
    for (const auto& p : reply.at("points"))
      cloud.push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
    return cloud;
  }

 private:
  RemoteConfig cfg_;
};

// LLM service stand-in: {query, manifest, history} out, ToolCall/Finish back.
class ExternalAgentBackend : public AgentBackend {
 public:
  explicit ExternalAgentBackend(RemoteConfig cfg) : cfg_(std::move(cfg)) {}

  AgentStep next_step(const std::string& query, const Json& manifest,
                      const std::vector<CallRecord>& history) override {
    Json jhistory = Json::array();
    for (const auto& record : history) {
      Json j;
      j["tool"] = record.call.tool;
      j["args"] = record.call.args;
      j["protocol_error"] = record.protocol_error;
      j.update(output_to_json(record.output));
      jhistory.push_back(std::move(j));
    }
    Json req{{"op", "next_step"},
             {"query", query},
             {"manifest", manifest},
             {"history", jhistory}};
    Json reply = detail::remote_call(cfg_, req);
    std::string type = reply.at("type").get<std::string>();
    if (type == "finish")
      return AgentStep::finish(reply.value("answer", std::string{}));
    if (type != "tool_call")
      throw Error(ErrorCode::BackendFailure, "external backend sent unknown step type");
    ToolCall call;
    call.tool = reply.at("tool").get<std::string>();
    for (const auto& [name, value] : reply.at("args").items())
      call.args[name] = value.get<std::string>();
    return AgentStep::make_call(std::move(call));
  }

 private:
  RemoteConfig cfg_;
};

inline std::unique_ptr<AgentBackend> external_backend(RemoteConfig cfg) {
  return std::make_unique<ExternalAgentBackend>(std::move(cfg));
}

}  // namespace asp
