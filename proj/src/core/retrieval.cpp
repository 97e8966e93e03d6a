#include "retrieval.hpp"

#include <cmath>

#include "errors.hpp"
#include "util.hpp"

namespace cryptaudit::retrieval {

const char* to_string(QueryKind kind) {
  return kind == QueryKind::semantic_summary ? "semantic_summary" : "cot_trace";
}

void validate(const RetrievalConfig& cfg) {
  if (cfg.k < 1) throw ConfigError("retrieval.k", "must be >= 1");
  if (!(cfg.tau >= -1.0 && cfg.tau <= 1.0)) {
    throw ConfigError("retrieval.tau", "must lie in [-1, 1], got " + format_fixed(cfg.tau, 4));
  }
}

QaLookup corpus_qa_lookup(const corpus::Corpus& corpus) {
  return [&corpus](const std::string& external_id) -> std::optional<std::string> {
    if (const auto* c = corpus.find_by_external_id(external_id)) return c->content;
    return std::nullopt;
  };
}

std::string render_item_header(std::size_t index_number, const corpus::KnowledgeChunk& chunk,
                               double cos_sim) {
  std::string h = "[" + std::to_string(index_number) + "] ";
  h += chunk.title.empty() ? "(untitled)" : chunk.title;
  h += " (source: ";
  h += corpus::to_string(chunk.source_type);
  h += ", id: " + chunk.id + ", cos_sim: " + format_fixed(cos_sim, 4) + ")";
  return h;
}

RetrievedBlock threshold_retrieve(const embedding::VectorIndex& index,
                                  const corpus::Corpus& corpus, const std::string& query_text,
                                  const RetrievalConfig& cfg,
                                  embedding::EmbeddingProvider& provider, QueryKind kind,
                                  const QaLookup& qa_lookup) {
  validate(cfg);
  RetrievedBlock block;
  block.query_kind = kind;
  if (index.size() == 0) return block;

  auto lookup = qa_lookup ? qa_lookup : corpus_qa_lookup(corpus);
  auto query = provider.embed(query_text);
  auto docs_with_scores = embedding::similarity_search(index, query, cfg.k);

  std::size_t counter = 1;
  for (const auto& hit : docs_with_scores) {
    double cos_sim = 1.0 - hit.s;
    if (!(cos_sim >= cfg.tau)) continue;
    const auto* chunk = corpus.find(hit.chunk_id);
    if (!chunk) {
      throw Error(ErrorKind::inconsistent, "index references chunk '" + hit.chunk_id +
                                               "' that is not in the corpus; rebuild the index");
    }
    RetrievedItem item;
    item.index_number = counter;
    item.chunk_id = chunk->id;
    item.cos_sim = cos_sim;
    // The indexed text of a Q&A chunk is its question; the full thread is
    // appended from the lookup.
    item.rendered_text = render_item_header(counter, *chunk, cos_sim) + "\n" + chunk->retrieval_key;
    ++counter;
    if (chunk->source_type == corpus::SourceType::stackexchange) {
      auto qa = lookup(*chunk->external_id);
      if (!qa) {
        throw Error(ErrorKind::inconsistent,
                    "no question/answer found for external id '" + *chunk->external_id + "'");
      }
      item.rendered_text += "\n--- Full Q&A (StackExchange #" + *chunk->external_id + ") ---\n" + *qa;
    }
    block.items.push_back(std::move(item));
  }
  return block;
}

std::pair<RetrievedBlock, RetrievedBlock> dual_retrieve(
    const embedding::VectorIndex& index, const corpus::Corpus& corpus,
    const std::string& summary_text, const std::string& cot_text, const RetrievalConfig& cfg,
    embedding::EmbeddingProvider& provider, const QaLookup& qa_lookup) {
  if (summary_text.empty() || cot_text.empty()) {
    throw Error(ErrorKind::invalid_argument, "both retrieval signals must be non-empty");
  }
  return {threshold_retrieve(index, corpus, summary_text, cfg, provider,
                             QueryKind::semantic_summary, qa_lookup),
          threshold_retrieve(index, corpus, cot_text, cfg, provider, QueryKind::cot_trace,
                             qa_lookup)};
}

std::string render_block(const RetrievedBlock& block) {
  if (block.items.empty()) return "(no knowledge entries above the similarity threshold)\n";
  std::string out;
  for (std::size_t i = 0; i < block.items.size(); ++i) {
    if (i) out += "\n";
    out += block.items[i].rendered_text;
    out += "\n";
  }
  return out;
}

}  // namespace cryptaudit::retrieval
