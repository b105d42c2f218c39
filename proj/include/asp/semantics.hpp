#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "asp/common.hpp"
#include "asp/config.hpp"
#include "asp/scene_types.hpp"

namespace asp {

// Unit-norm feature vector in a shared text/view space.
struct FeatureVector {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }

  double norm() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(s);
  }

  FeatureVector normalized() const {
    double n = norm();
    if (n < 1e-12)
      throw Error(ErrorCode::DegenerateGeometry, "cannot normalize zero feature");
    FeatureVector out;
    out.values.reserve(values.size());
    for (double v : values) out.values.push_back(v / n);
    return out;
  }
};

inline double cosine(const FeatureVector& a, const FeatureVector& b) {
  if (a.dim() != b.dim())
    throw Error(ErrorCode::DimensionMismatch, "feature dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) s += a.values[i] * b.values[i];
  return s;
}

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual FeatureVector embed_text(const std::string& text) = 0;
  virtual FeatureVector embed_crop(const Crop& crop) = 0;
  virtual std::size_t dim() const = 0;
};

class RelevanceClassifier {
 public:
  virtual ~RelevanceClassifier() = default;
  virtual bool is_relevant(const std::vector<Crop>& object_views,
                           const std::string& query) = 0;
};

// Deterministic test backend: bag-of-token hashing into D buckets,
// L2-normalized. Crops are embedded via their view label.
class MockEmbedding : public EmbeddingProvider {
 public:
  explicit MockEmbedding(std::size_t dim = 4096) : dim_(dim) {}

  FeatureVector embed_text(const std::string& text) override {
    auto tokens = tokenize(text);
    FeatureVector v;
    v.values.assign(dim_, 0.0);
    if (tokens.empty()) {
      v.values[bucket_of("<unknown>")] = 1.0;
      return v;
    }
    for (const auto& tok : tokens) v.values[bucket_of(tok)] += 1.0;
    return v.normalized();
  }

  FeatureVector embed_crop(const Crop& crop) override {
    return embed_text(crop.view_label.value_or(""));
  }

  std::size_t dim() const override { return dim_; }

 private:
  std::size_t bucket_of(const std::string& token) const {
    return static_cast<std::size_t>(fnv1a(token) % dim_);
  }

  std::size_t dim_;
};

inline double token_jaccard(const std::string& a, const std::string& b) {
  auto ta = tokenize(a);
  auto tb = tokenize(b);
  std::sort(ta.begin(), ta.end());
  ta.erase(std::unique(ta.begin(), ta.end()), ta.end());
  std::sort(tb.begin(), tb.end());
  tb.erase(std::unique(tb.begin(), tb.end()), tb.end());
  if (ta.empty() && tb.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& t : ta)
    if (std::binary_search(tb.begin(), tb.end(), t)) ++inter;
  std::size_t uni = ta.size() + tb.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

// Mock VLM relevance check: the query is relevant to an object view when the
// token Jaccard similarity against the view label reaches the threshold.
class MockClassifier : public RelevanceClassifier {
 public:
  explicit MockClassifier(double jaccard_thresh = 0.3)
      : jaccard_thresh_(jaccard_thresh) {}

  bool is_relevant(const std::vector<Crop>& object_views,
                   const std::string& query) override {
    for (const auto& view : object_views) {
      if (!view.view_label) continue;
      if (token_jaccard(query, *view.view_label) >= jaccard_thresh_) return true;
    }
    return false;
  }

 private:
  double jaccard_thresh_;
};

struct RetrievalHit {
  int object_id = -1;
  double score = 0.0;
};

// k highest-cosine objects, descending score, ties broken by lower id.
// Works on any map type exposing `stale` and `objects[i].{id, features}`.
template <typename Map>
std::vector<RetrievalHit> top_k(const Map& map, const FeatureVector& query_vec,
                                std::size_t k) {
  if (map.stale)
    throw Error(ErrorCode::StaleMap, "object map is stale; rebuild before querying");
  if (k < 1) throw Error(ErrorCode::InvalidParameter, "k must be >= 1");
  std::vector<RetrievalHit> hits;
  hits.reserve(map.objects.size());
  for (const auto& obj : map.objects)
    hits.push_back({obj.id, cosine(query_vec, obj.features)});
  std::sort(hits.begin(), hits.end(), [](const RetrievalHit& a, const RetrievalHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.object_id < b.object_id;
  });
  if (hits.size() > k) hits.resize(k);
  return hits;
}

}  // namespace asp
