#pragma once

#include <cctype>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace asp {

enum class ErrorCode {
  EmptyCloud,
  InvalidParameter,
  DegenerateGeometry,
  DimensionMismatch,
  StaleMap,
  UnknownTemplate,
  NoHorizontalNormal,
  NoValidPose,
  NavigationFailed,
  AffordanceDetectionFailed,
  BackendFailure,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

enum class SkillKind {
  kGrasp,
  kPlace,
  kDrop,
  kGraspPart,
  kTipPush,
  kPinchPull,
  kHookPull,
};

inline const char* to_string(SkillKind kind) {
  switch (kind) {
    case SkillKind::kGrasp: return "grasp";
    case SkillKind::kPlace: return "place";
    case SkillKind::kDrop: return "drop";
    case SkillKind::kGraspPart: return "grasp_part";
    case SkillKind::kTipPush: return "tip_push";
    case SkillKind::kPinchPull: return "pinch_pull";
    case SkillKind::kHookPull: return "hook_pull";
  }
  return "unknown";
}

inline SkillKind skill_kind_from_string(const std::string& name) {
  if (name == "grasp") return SkillKind::kGrasp;
  if (name == "place") return SkillKind::kPlace;
  if (name == "drop") return SkillKind::kDrop;
  if (name == "grasp_part") return SkillKind::kGraspPart;
  if (name == "tip_push") return SkillKind::kTipPush;
  if (name == "pinch_pull") return SkillKind::kPinchPull;
  if (name == "hook_pull") return SkillKind::kHookPull;
  throw Error(ErrorCode::InvalidParameter, "unknown skill kind: " + name);
}

// Lowercase alphanumeric tokenization shared by the mock embedding,
// the mock relevance classifier, and the simulated affordance backend.
inline std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!cur.empty()) {
      tokens.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(cur);
  return tokens;
}

inline std::string sanitize_identifier(const std::string& text) {
  std::string out;
  for (char c : text) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      out.push_back(static_cast<char>(std::tolower(u)));
    } else if ((c == ' ' || c == '_' || c == '-') && !out.empty() && out.back() != '_') {
      out.push_back('_');
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  if (out.empty()) out = "object";
  return out;
}

inline std::uint64_t fnv1a(const void* data, std::size_t size,
                           std::uint64_t seed = 1469598103934665603ull) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t fnv1a(const std::string& s,
                           std::uint64_t seed = 1469598103934665603ull) {
  return fnv1a(s.data(), s.size(), seed);
}

}  // namespace asp
