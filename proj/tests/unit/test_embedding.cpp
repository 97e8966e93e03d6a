#include <doctest.h>

#include <cmath>
#include <random>

#include "corpus.hpp"
#include "embedding.hpp"
#include "errors.hpp"
#include "support/generators.hpp"
#include "support/paths.hpp"

using namespace cryptaudit;
using namespace cryptaudit::embedding;

TEST_SUITE("embedding") {

TEST_CASE("hash embeddings are deterministic unit vectors") {
  HashEmbeddingProvider whole(HashEmbeddingProvider::Mode::whole_text);
  HashEmbeddingProvider bow(HashEmbeddingProvider::Mode::tokens);
  CHECK(whole.tag() == "mock-hash-d64");
  CHECK(bow.tag() == "mock-bow-d64");
  for (auto* p : {static_cast<EmbeddingProvider*>(&whole), static_cast<EmbeddingProvider*>(&bow)}) {
    auto a = p->embed("ECB mode leaks patterns");
    auto b = p->embed("ECB mode leaks patterns");
    CHECK(a.values == b.values);
    CHECK(a.values.size() == 64);
    CHECK(norm(a.values) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dot(a.values, a.values) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p->embed("ECB mode leaks patterns ").values != a.values);
  }
  CHECK_THROWS_AS(whole.embed(""), Error);
}

TEST_CASE("bag-of-words embeddings reward shared vocabulary") {
  HashEmbeddingProvider bow(HashEmbeddingProvider::Mode::tokens);
  auto q = bow.embed("pbkdf2 iteration count too low");
  auto near = bow.embed("the pbkdf2 iteration count is too low for passwords");
  auto far = bow.embed("ecdsa signature range check");
  CHECK(dot(q.values, near.values) > dot(q.values, far.values));
  CHECK(dot(q.values, near.values) > 0.6);
}

TEST_CASE("similarity_search agrees with an exhaustive scan") {
  HashEmbeddingProvider bow(HashEmbeddingProvider::Mode::tokens);
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    VectorIndex index(64, bow.tag());
    std::vector<std::vector<double>> rows;
    std::size_t n = 1 + rng() % 40;
    for (std::size_t i = 0; i < n; ++i) {
      auto v = bow.embed(gen::vocab_text(rng));
      rows.push_back(v.values);
      index.add("d" + std::to_string(i), v);
    }
    auto q = bow.embed(gen::vocab_text(rng));
    std::size_t k = 1 + rng() % 12;
    auto hits = similarity_search(index, q, k);
    REQUIRE(hits.size() == std::min(k, n));
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t i = 0; i < n; ++i) all.emplace_back(1.0 - dot(rows[i], q.values), i);
    std::stable_sort(all.begin(), all.end(), [](auto& a, auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < hits.size(); ++i) {
      CHECK(hits[i].chunk_id == "d" + std::to_string(all[i].second));
      CHECK(hits[i].s == doctest::Approx(all[i].first).epsilon(1e-12));
      CHECK(hits[i].cos_sim == doctest::Approx(1.0 - all[i].first).epsilon(1e-12));
    }
  }
}

TEST_CASE("index guards provider and dimension") {
  HashEmbeddingProvider whole;
  HashEmbeddingProvider bow(HashEmbeddingProvider::Mode::tokens);
  VectorIndex index(64, whole.tag());
  index.add("a", whole.embed("x"));
  CHECK_THROWS_AS(index.add("a", whole.embed("y")), Error);
  CHECK_THROWS_AS(index.add("b", bow.embed("y")), ProviderError);
  CHECK_THROWS_AS(similarity_search(index, bow.embed("x"), 1), ProviderError);
  HashEmbeddingProvider small(HashEmbeddingProvider::Mode::whole_text, 8);
  EmbeddingVector untagged{small.embed("x").values, ""};
  CHECK_THROWS_AS(similarity_search(index, untagged, 1), Error);
}

TEST_CASE("index files round trip") {
  HashEmbeddingProvider bow(HashEmbeddingProvider::Mode::tokens);
  auto corpus = corpus::load_corpus(testpaths::data_dir() / "kb" / "corpus.jsonl");
  auto index = build_index(corpus, bow, 7);
  auto dir = testpaths::scratch("index");
  save_index(index, dir / "i.bin");
  auto loaded = load_index(dir / "i.bin");
  CHECK(loaded == index);
  CHECK(loaded.provider_tag() == "mock-bow-d64");
  CHECK(load_index(testpaths::data_dir() / "kb" / "index.bin") == index);
  write_file(dir / "bad.bin", "not an index");
  CHECK_THROWS_AS(load_index(dir / "bad.bin"), ParseError);
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
