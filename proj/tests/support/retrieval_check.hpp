#pragma once

#include <cmath>
#include <random>
#include <string>

#include "corpus.hpp"
#include "embedding.hpp"
#include "retrieval.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

namespace rcheck {

struct Fixture {
  cryptaudit::corpus::Corpus corpus;
  std::vector<std::string> ids;
  std::vector<std::vector<double>> vectors;
};

inline Fixture random_fixture(std::mt19937_64& rng, std::size_t n,
                              cryptaudit::embedding::EmbeddingProvider& provider) {
  using namespace cryptaudit::corpus;
  Fixture f;
  for (std::size_t i = 0; i < n; ++i) {
    KnowledgeChunk c;
    c.id = "k" + std::to_string(i);
    c.title = "chunk " + std::to_string(i);
    if (i > 0 && rng() % 8 == 0) {
      c.content = f.corpus.chunks()[rng() % i].retrieval_key;  // exact tie
    } else {
      c.content = gen::vocab_text(rng);
    }
    if (rng() % 4 == 0) {
      c.source_type = SourceType::stackexchange;
      c.retrieval_key = c.content;
      c.external_id = std::to_string(1000 + i);
      c.content += "\n\nanswer " + std::to_string(i);
    } else {
      c.source_type = SourceType::blog;
      c.retrieval_key = c.content;
    }
    f.ids.push_back(c.id);
    f.vectors.push_back(provider.embed(c.retrieval_key).values);
    f.corpus.add(std::move(c));
  }
  return f;
}

// One randomized comparison of threshold_retrieve against the oracle. Returns
// an empty string on agreement, otherwise a description of the mismatch.
inline std::string trial(std::mt19937_64& rng, cryptaudit::embedding::EmbeddingProvider& provider) {
  using namespace cryptaudit;
  std::size_t n = 1 + rng() % 64;
  auto f = random_fixture(rng, n, provider);
  auto index = embedding::build_index(f.corpus, provider);
  retrieval::RetrievalConfig cfg;
  cfg.k = 1 + rng() % 10;
  cfg.tau = std::uniform_real_distribution<double>(0.0, 0.9)(rng);
  auto query = gen::vocab_text(rng);

  auto got = retrieval::threshold_retrieve(index, f.corpus, query, cfg, provider);
  auto want = oracle::retrieve(f.ids, f.vectors, provider.embed(query).values, cfg.k, cfg.tau);
  auto ctx = " (n=" + std::to_string(n) + ", k=" + std::to_string(cfg.k) + ", tau=" + std::to_string(cfg.tau) +
             ", query='" + query + "')";
  if (got.items.size() != want.size()) {
    return "size " + std::to_string(got.items.size()) + " != " + std::to_string(want.size()) + ctx;
  }
  for (std::size_t i = 0; i < want.size(); ++i) {
    const auto& g = got.items[i];
    if (g.chunk_id != want[i].id) return "id mismatch at " + std::to_string(i) + ctx;
    if (g.index_number != want[i].number) return "numbering mismatch at " + std::to_string(i) + ctx;
    if (std::abs(g.cos_sim - want[i].cos_sim) > 1e-9) return "cos_sim mismatch at " + std::to_string(i) + ctx;
  }
  return {};
}

}  // namespace rcheck
