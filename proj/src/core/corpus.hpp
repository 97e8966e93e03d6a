#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "util.hpp"

namespace cryptaudit::corpus {

enum class SourceType { ctf_writeup, blog, cwe_rule, book, research_abstract, stackexchange };

inline constexpr SourceType kAllSourceTypes[] = {
    SourceType::ctf_writeup,       SourceType::blog,         SourceType::cwe_rule,
    SourceType::book,              SourceType::research_abstract, SourceType::stackexchange,
};

const char* to_string(SourceType type);
std::optional<SourceType> parse_source_type(std::string_view name);

struct KnowledgeChunk {
  std::string id;
  SourceType source_type = SourceType::blog;
  std::string title;
  std::string retrieval_key;
  std::string content;
  std::optional<std::string> external_id;
  std::map<std::string, std::string> metadata;
  // Fields present on disk that this version does not know; written back
  // unchanged on save.
  json extra = json::object();

  bool operator==(const KnowledgeChunk&) const = default;
};

// Throws Error(invalid_argument) describing the first violated invariant.
void validate_chunk(const KnowledgeChunk& chunk);

struct RawDocument {
  SourceType source_type = SourceType::blog;
  std::string body;
  std::string origin;
  std::string title;
};

struct Section {
  std::string title;        // empty for the preamble
  std::string body;         // lines after the header, joined with '\n'
  std::size_t first_line;   // 0-based line index of the header (or preamble start)
  std::size_t line_count;   // header line included
};

// Splits markdown on level-3 ATX headers. Fenced code blocks are opaque.
std::vector<Section> segment_markdown_by_h3(std::string_view body);

// Fixed-size chunking measured in code points. Throws on overlap >= max_chars.
std::vector<std::string> chunk_fixed(std::string_view text, std::size_t max_chars,
                                     std::size_t overlap);

enum class ChunkMode { h3, fixed, whole, qa, llm };

struct ChunkPolicyEntry {
  ChunkMode mode = ChunkMode::fixed;
  std::size_t max_chars = 1600;
  std::size_t overlap = 200;
};

struct ChunkPolicy {
  std::map<SourceType, ChunkPolicyEntry> entries;

  static ChunkPolicy defaults();
  // JSON object keyed by source type name: {"blog": {"mode": "h3", ...}}.
  // Types absent from the file keep no entry.
  static ChunkPolicy from_json(const json& doc);
};

// LLM-assisted extraction hook: turns one raw document into knowledge units.
using UnitExtractor = std::function<std::vector<Section>(const RawDocument&)>;

std::string chunk_id(std::string_view origin, std::size_t section_index, std::size_t chunk_index);

std::vector<KnowledgeChunk> build_chunks(const std::vector<RawDocument>& docs,
                                         const ChunkPolicy& policy,
                                         const UnitExtractor& extractor = {});

// Reads <dir>/<source_type>/* in sorted order. *.md and *.txt files are one
// document each; *.jsonl files yield one document per non-blank line.
std::vector<RawDocument> load_sources(const std::filesystem::path& dir);

class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<KnowledgeChunk> chunks);

  // Throws Error(invalid_argument) on duplicate id.
  void add(KnowledgeChunk chunk);

  const std::vector<KnowledgeChunk>& chunks() const noexcept { return chunks_; }
  std::size_t size() const noexcept { return chunks_.size(); }
  bool empty() const noexcept { return chunks_.empty(); }

  const KnowledgeChunk* find(std::string_view id) const;
  const KnowledgeChunk* find_by_external_id(std::string_view external_id) const;

  bool operator==(const Corpus& other) const { return chunks_ == other.chunks_; }

 private:
  std::vector<KnowledgeChunk> chunks_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::unordered_map<std::string, std::size_t> by_external_id_;
};

json chunk_to_json(const KnowledgeChunk& chunk);
KnowledgeChunk chunk_from_json(const json& record);

std::string serialize_corpus(const Corpus& corpus);
Corpus parse_corpus(std::string_view text);

void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& path);

}  // namespace cryptaudit::corpus
