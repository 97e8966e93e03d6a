#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "corpus.hpp"
#include "embedding.hpp"

namespace cryptaudit::retrieval {

enum class QueryKind { semantic_summary, cot_trace };

const char* to_string(QueryKind kind);

struct RetrievalConfig {
  std::size_t k = 5;
  double tau = 0.75;
};

// Throws Error(invalid_argument) when k < 1 or tau is outside [-1, 1].
void validate(const RetrievalConfig& cfg);

struct RetrievedItem {
  std::size_t index_number = 0;  // 1-based
  std::string chunk_id;
  double cos_sim = 0.0;
  std::string rendered_text;
};

struct RetrievedBlock {
  QueryKind query_kind = QueryKind::semantic_summary;
  std::vector<RetrievedItem> items;
};

// Resolves a StackExchange question id to its full question-and-answer text.
using QaLookup = std::function<std::optional<std::string>(const std::string& external_id)>;

// QaLookup backed by the chunks of a corpus carrying that external_id.
QaLookup corpus_qa_lookup(const corpus::Corpus& corpus);

// Top-k search, distance-to-cosine conversion, threshold filter, sequential
// numbering, and Q&A expansion for StackExchange chunks.
RetrievedBlock threshold_retrieve(const embedding::VectorIndex& index,
                                  const corpus::Corpus& corpus, const std::string& query_text,
                                  const RetrievalConfig& cfg,
                                  embedding::EmbeddingProvider& provider,
                                  QueryKind kind = QueryKind::semantic_summary,
                                  const QaLookup& qa_lookup = {});

std::pair<RetrievedBlock, RetrievedBlock> dual_retrieve(
    const embedding::VectorIndex& index, const corpus::Corpus& corpus,
    const std::string& summary_text, const std::string& cot_text, const RetrievalConfig& cfg,
    embedding::EmbeddingProvider& provider, const QaLookup& qa_lookup = {});

std::string render_item_header(std::size_t index_number, const corpus::KnowledgeChunk& chunk,
                               double cos_sim);

// The numbered items exactly as they are placed in a prompt.
std::string render_block(const RetrievedBlock& block);

}  // namespace cryptaudit::retrieval
