#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <random>

#include "asp/scene_map.hpp"
#include "asp/semantics.hpp"

using namespace asp;

namespace {

FeatureVector basis(std::size_t dim, std::size_t index) {
  FeatureVector v;
  v.values.assign(dim, 0.0);
  v.values[index] = 1.0;
  return v;
}

// independent reconstruction of the bag-of-tokens embedding
double oracle_cosine(const std::string& a, const std::string& b, std::size_t dim) {
  auto bucketize = [dim](const std::string& text) {
    std::map<std::size_t, double> buckets;
    for (const auto& tok : tokenize(text)) buckets[fnv1a(tok) % dim] += 1.0;
    double norm = 0.0;
    for (auto& [k, v] : buckets) norm += v * v;
    norm = std::sqrt(norm);
    for (auto& [k, v] : buckets) v /= norm;
    return buckets;
  };
  auto ba = bucketize(a), bb = bucketize(b);
  double dot = 0.0;
  for (const auto& [k, v] : ba) {
    auto it = bb.find(k);
    if (it != bb.end()) dot += v * it->second;
  }
  return dot;
}

Object make_object(int id, FeatureVector features) {
  Object obj;
  obj.id = id;
  obj.features = std::move(features);
  obj.feature_sum = obj.features;
  obj.point_cloud = {{0, 0, 0}};
  return obj;
}

}  // namespace

TEST_CASE("cosine basics") {
  FeatureVector a = basis(8, 0), b = basis(8, 1);
  CHECK(cosine(a, a) == Catch::Approx(1.0));
  CHECK(cosine(a, b) == Catch::Approx(0.0));
  FeatureVector neg = a;
  neg.values[0] = -1.0;
  CHECK(cosine(a, neg) == Catch::Approx(-1.0));
  FeatureVector wrong = basis(4, 0);
  CHECK_THROWS_AS(cosine(a, wrong), Error);
}

TEST_CASE("mock embedding token space") {
  MockEmbedding mock(4096);
  CHECK(cosine(mock.embed_text("red ball"), mock.embed_text("red ball")) ==
        Catch::Approx(1.0));

  // disjoint tokens: orthogonal unless buckets collide; the oracle accounts
  // for collisions exactly
  CHECK(cosine(mock.embed_text("red ball"), mock.embed_text("blue mug")) ==
        Catch::Approx(oracle_cosine("red ball", "blue mug", 4096)));
  CHECK(oracle_cosine("red ball", "blue mug", 4096) == 0.0);

  // one shared token out of two vs one
  CHECK(cosine(mock.embed_text("red ball"), mock.embed_text("ball")) ==
        Catch::Approx(1.0 / std::sqrt(2.0)));

  // permutation invariance over tokens
  CHECK(cosine(mock.embed_text("red ball"), mock.embed_text("ball red")) ==
        Catch::Approx(1.0));

  // unit norm for every embedding, including the empty-token fallback
  CHECK(mock.embed_text("pick up the mug").norm() == Catch::Approx(1.0));
  FeatureVector unknown = mock.embed_text("!!! ...");
  CHECK(unknown.norm() == Catch::Approx(1.0));
  CHECK(cosine(unknown, mock.embed_text("")) == Catch::Approx(1.0));
}

TEST_CASE("mock embedding matches the token-overlap oracle") {
  MockEmbedding mock(4096);
  std::vector<std::string> labels{"red ball",      "blue mug",   "panda plushie",
                                  "metal cabinet", "toy egg",    "toy tomato",
                                  "rubber duckie", "desk bell",  "power adapter",
                                  "ball",          "red carpet", "large red ball"};
  for (const auto& a : labels)
    for (const auto& b : labels)
      CHECK(cosine(mock.embed_text(a), mock.embed_text(b)) ==
            Catch::Approx(oracle_cosine(a, b, 4096)).margin(1e-12));
}

TEST_CASE("top_k ranking") {
  ObjectMap map;
  MockEmbedding mock(128);

  SECTION("single object, any k") {
    map.objects.push_back(make_object(0, mock.embed_text("apple")));
    auto hits = top_k(map, mock.embed_text("pear"), 5);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].object_id == 0);
  }

  SECTION("k=3 over 10 objects matches exhaustive sort") {
    std::vector<std::string> labels{"apple", "pear", "grape", "melon", "lemon",
                                    "peach", "plum", "fig",   "mango", "kiwi"};
    for (int i = 0; i < 10; ++i)
      map.objects.push_back(make_object(i, mock.embed_text(labels[i])));
    FeatureVector query = mock.embed_text("ripe mango fruit");
    auto hits = top_k(map, query, 3);
    REQUIRE(hits.size() == 3);
    // brute force: full sort by (score desc, id asc)
    std::vector<RetrievalHit> all;
    for (const auto& obj : map.objects)
      all.push_back({obj.id, cosine(query, obj.features)});
    std::sort(all.begin(), all.end(), [](const RetrievalHit& a, const RetrievalHit& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.object_id < b.object_id;
    });
    for (int i = 0; i < 3; ++i) {
      CHECK(hits[i].object_id == all[i].object_id);
      CHECK(hits[i].score == Catch::Approx(all[i].score));
    }
    // full-length top_k is a total order consistent with pairwise cosine
    auto full = top_k(map, query, map.objects.size());
    for (std::size_t i = 1; i < full.size(); ++i)
      CHECK(full[i - 1].score >= full[i].score);
  }

  SECTION("ties break toward the lower id") {
    map.objects.push_back(make_object(3, mock.embed_text("apple")));
    map.objects.push_back(make_object(1, mock.embed_text("apple")));
    auto hits = top_k(map, mock.embed_text("apple"), 2);
    REQUIRE(hits.size() == 2);
    CHECK(hits[0].object_id == 1);
    CHECK(hits[1].object_id == 3);
  }

  SECTION("stale map and bad k are rejected") {
    map.objects.push_back(make_object(0, mock.embed_text("apple")));
    map.stale = true;
    CHECK_THROWS_AS(top_k(map, mock.embed_text("apple"), 1), Error);
    map.stale = false;
    CHECK_THROWS_AS(top_k(map, mock.embed_text("apple"), 0), Error);
  }
}

TEST_CASE("retrieval ranking is insertion-order invariant") {
  MockEmbedding mock(512);
  std::vector<std::string> labels{"apple", "pear", "grape", "melon"};
  ObjectMap forward, backward;
  for (int i = 0; i < 4; ++i)
    forward.objects.push_back(make_object(i, mock.embed_text(labels[i])));
  for (int i = 3; i >= 0; --i)
    backward.objects.push_back(make_object(i, mock.embed_text(labels[i])));
  FeatureVector query = mock.embed_text("grape juice");
  auto a = top_k(forward, query, 4);
  auto b = top_k(backward, query, 4);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].object_id == b[i].object_id);
}

TEST_CASE("token jaccard and the mock classifier") {
  CHECK(token_jaccard("red ball", "red ball") == Catch::Approx(1.0));
  CHECK(token_jaccard("red ball", "red mug") == Catch::Approx(1.0 / 3.0));
  CHECK(token_jaccard("red ball", "blue mug") == 0.0);

  MockClassifier classifier(0.3);
  Crop labeled;
  labeled.view_label = "red ball";
  CHECK(classifier.is_relevant({labeled}, "red ball"));
  CHECK(classifier.is_relevant({labeled}, "ball"));            // jaccard 1/2
  CHECK(classifier.is_relevant({labeled}, "red mug"));         // jaccard 1/3
  CHECK_FALSE(classifier.is_relevant({labeled}, "blue mug"));  // jaccard 0
  Crop unlabeled;
  CHECK_FALSE(classifier.is_relevant({unlabeled}, "red ball"));
  CHECK_FALSE(classifier.is_relevant({}, "red ball"));
}
