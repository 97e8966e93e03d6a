#include "corpus.hpp"

#include <algorithm>

#include "errors.hpp"

namespace cryptaudit::corpus {

namespace fs = std::filesystem;

const char* to_string(SourceType type) {
  switch (type) {
    case SourceType::ctf_writeup: return "ctf_writeup";
    case SourceType::blog: return "blog";
    case SourceType::cwe_rule: return "cwe_rule";
    case SourceType::book: return "book";
    case SourceType::research_abstract: return "research_abstract";
    case SourceType::stackexchange: return "stackexchange";
  }
  return "unknown";
}

std::optional<SourceType> parse_source_type(std::string_view name) {
  for (auto t : kAllSourceTypes) {
    if (name == to_string(t)) return t;
  }
  return std::nullopt;
}

void validate_chunk(const KnowledgeChunk& chunk) {
  auto fail = [&](const std::string& what) {
    throw Error(ErrorKind::invalid_argument, "chunk '" + chunk.id + "': " + what);
  };
  if (chunk.id.empty()) fail("empty id");
  if (chunk.retrieval_key.empty()) fail("empty retrieval_key");
  if (chunk.content.empty()) fail("empty content");
  if (chunk.source_type == SourceType::stackexchange) {
    if (!chunk.external_id || chunk.external_id->empty()) {
      fail("stackexchange chunk without external_id");
    }
  } else if (chunk.retrieval_key != chunk.content) {
    fail("retrieval_key must equal content for non-stackexchange sources");
  }
}

// ---------------------------------------------------------------------------
// Segmentation

namespace {

std::string_view strip_indent(std::string_view line, std::size_t max_spaces = 3) {
  std::size_t i = 0;
  while (i < line.size() && i < max_spaces && line[i] == ' ') ++i;
  return line.substr(i);
}

// Returns the title when the line is a level-3 ATX header.
std::optional<std::string> h3_title(std::string_view line) {
  auto s = strip_indent(line);
  if (s.size() < 3 || s.substr(0, 3) != "###") return std::nullopt;
  if (s.size() == 3) return std::string{};
  if (s[3] != ' ' && s[3] != '\t') return std::nullopt;
  return trim(s.substr(4));
}

struct FenceMarker {
  char ch;
  std::size_t len;
};

std::optional<FenceMarker> fence_marker(std::string_view line) {
  auto s = strip_indent(line);
  if (s.empty() || (s[0] != '`' && s[0] != '~')) return std::nullopt;
  std::size_t n = 0;
  while (n < s.size() && s[n] == s[0]) ++n;
  if (n < 3) return std::nullopt;
  return FenceMarker{s[0], n};
}

}  // namespace

std::vector<Section> segment_markdown_by_h3(std::string_view body) {
  std::vector<Section> out;
  if (body.empty()) return out;
  auto lines = split_lines(body);

  std::optional<FenceMarker> open_fence;
  std::vector<std::string> current;
  Section section{"", "", 0, 0};

  auto flush = [&](std::size_t next_line) {
    section.line_count = next_line - section.first_line;
    if (section.line_count == 0) return;
    std::string joined;
    for (std::size_t i = 0; i < current.size(); ++i) {
      if (i) joined += '\n';
      joined += current[i];
    }
    section.body = std::move(joined);
    out.push_back(std::move(section));
  };

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (auto marker = fence_marker(line)) {
      if (!open_fence) {
        open_fence = marker;
      } else if (marker->ch == open_fence->ch && marker->len >= open_fence->len &&
                 trim(strip_indent(line)).find_first_not_of(marker->ch) == std::string::npos) {
        open_fence.reset();
      }
      current.push_back(line);
      continue;
    }
    if (!open_fence) {
      if (auto title = h3_title(line)) {
        flush(i);
        current.clear();
        section = Section{*title, "", i, 0};
        continue;
      }
    }
    current.push_back(line);
  }
  flush(lines.size());
  return out;
}

// ---------------------------------------------------------------------------
// Fixed chunking

namespace {

// Byte offsets of code point starts; invalid bytes count as one unit each.
std::vector<std::size_t> codepoint_offsets(std::string_view text) {
  std::vector<std::size_t> offsets;
  offsets.reserve(text.size() + 1);
  std::size_t i = 0;
  while (i < text.size()) {
    offsets.push_back(i);
    auto c = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if (c >= 0xf0 && c < 0xf8) len = 4;
    else if (c >= 0xe0) len = c < 0xf0 ? 3 : 1;
    else if (c >= 0xc0) len = 2;
    if (len > 1) {
      if (i + len > text.size()) {
        len = 1;
      } else {
        for (std::size_t k = 1; k < len; ++k) {
          if ((static_cast<unsigned char>(text[i + k]) & 0xc0) != 0x80) {
            len = 1;
            break;
          }
        }
      }
    }
    i += len;
  }
  offsets.push_back(text.size());
  return offsets;
}

}  // namespace

std::vector<std::string> chunk_fixed(std::string_view text, std::size_t max_chars,
                                     std::size_t overlap) {
  if (max_chars == 0) throw Error(ErrorKind::invalid_argument, "max_chars must be positive");
  if (overlap >= max_chars) {
    throw Error(ErrorKind::invalid_argument, "overlap (" + std::to_string(overlap) +
                                                 ") must be smaller than max_chars (" +
                                                 std::to_string(max_chars) + ")");
  }
  std::vector<std::string> chunks;
  if (text.empty()) return chunks;

  auto offsets = codepoint_offsets(text);
  const std::size_t n = offsets.size() - 1;
  const std::size_t stride = max_chars - overlap;
  for (std::size_t start = 0;; start += stride) {
    std::size_t end = std::min(n, start + max_chars);
    chunks.emplace_back(text.substr(offsets[start], offsets[end] - offsets[start]));
    if (end == n) break;
  }
  return chunks;
}

// ---------------------------------------------------------------------------
// Policy

namespace {

std::optional<ChunkMode> parse_mode(std::string_view name) {
  if (name == "h3") return ChunkMode::h3;
  if (name == "fixed") return ChunkMode::fixed;
  if (name == "whole") return ChunkMode::whole;
  if (name == "qa") return ChunkMode::qa;
  if (name == "llm") return ChunkMode::llm;
  return std::nullopt;
}

}  // namespace

ChunkPolicy ChunkPolicy::defaults() {
  ChunkPolicy p;
  p.entries[SourceType::ctf_writeup] = {ChunkMode::h3};
  p.entries[SourceType::blog] = {ChunkMode::h3};
  p.entries[SourceType::cwe_rule] = {ChunkMode::whole};
  p.entries[SourceType::book] = {ChunkMode::fixed};
  p.entries[SourceType::research_abstract] = {ChunkMode::whole};
  p.entries[SourceType::stackexchange] = {ChunkMode::qa};
  return p;
}

ChunkPolicy ChunkPolicy::from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("policy", "expected a JSON object");
  ChunkPolicy p;
  for (auto& [name, value] : doc.items()) {
    auto type = parse_source_type(name);
    if (!type) throw ConfigError("policy." + name, "unknown source type");
    ChunkPolicyEntry entry;
    auto mode = parse_mode(value.value("mode", std::string("fixed")));
    if (!mode) throw ConfigError("policy." + name + ".mode", "unknown chunking mode");
    entry.mode = *mode;
    entry.max_chars = value.value("max_chars", entry.max_chars);
    entry.overlap = value.value("overlap", entry.overlap);
    if (entry.max_chars == 0 || entry.overlap >= entry.max_chars) {
      throw ConfigError("policy." + name, "overlap must be smaller than a positive max_chars");
    }
    p.entries[*type] = entry;
  }
  return p;
}

// ---------------------------------------------------------------------------
// Build

std::string chunk_id(std::string_view origin, std::size_t section_index,
                     std::size_t chunk_index) {
  std::string key(origin);
  key += '\x1f';
  key += std::to_string(section_index);
  key += '\x1f';
  key += std::to_string(chunk_index);
  return sha256_hex(key).substr(0, 16);
}

namespace {

KnowledgeChunk plain_chunk(const RawDocument& doc, std::string title, std::string text,
                           std::size_t section_index, std::size_t chunk_index) {
  KnowledgeChunk c;
  c.id = chunk_id(doc.origin, section_index, chunk_index);
  c.source_type = doc.source_type;
  c.title = std::move(title);
  c.retrieval_key = text;
  c.content = std::move(text);
  c.metadata["origin"] = doc.origin;
  return c;
}

void emit_sections(const RawDocument& doc, const std::vector<Section>& sections,
                   const ChunkPolicyEntry& entry, std::vector<KnowledgeChunk>& out) {
  for (std::size_t si = 0; si < sections.size(); ++si) {
    auto text = trim(sections[si].body);
    if (text.empty()) continue;
    auto title = sections[si].title.empty() ? doc.title : sections[si].title;
    auto pieces = chunk_fixed(text, entry.max_chars, entry.overlap);
    for (std::size_t ci = 0; ci < pieces.size(); ++ci) {
      auto chunk = plain_chunk(doc, title, std::move(pieces[ci]), si, ci);
      chunk.metadata["section"] = sections[si].title.empty() ? "#" + std::to_string(si)
                                                             : sections[si].title;
      out.push_back(std::move(chunk));
    }
  }
}

KnowledgeChunk qa_chunk(const RawDocument& doc) {
  json rec;
  try {
    rec = json::parse(doc.body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse, doc.origin + ": stackexchange record is not JSON: " + e.what());
  }
  auto field = [&](const char* name) -> std::string {
    if (!rec.contains(name)) {
      throw Error(ErrorKind::parse, doc.origin + ": stackexchange record lacks '" + name + "'");
    }
    const auto& v = rec.at(name);
    return v.is_string() ? v.get<std::string>() : v.dump();
  };
  auto id = field("id");
  auto question = trim(field("question"));
  auto answer = trim(field("answer"));
  if (question.empty() || answer.empty()) {
    throw Error(ErrorKind::parse, doc.origin + ": empty question or answer");
  }
  KnowledgeChunk c;
  c.id = chunk_id(doc.origin, 0, 0);
  c.source_type = SourceType::stackexchange;
  c.title = rec.value("title", "StackExchange #" + id);
  c.retrieval_key = question;
  c.content = question + "\n\n" + answer;
  c.external_id = id;
  c.metadata["origin"] = doc.origin;
  if (rec.contains("url") && rec["url"].is_string()) c.metadata["url"] = rec["url"];
  return c;
}

}  // namespace

std::vector<KnowledgeChunk> build_chunks(const std::vector<RawDocument>& docs,
                                         const ChunkPolicy& policy,
                                         const UnitExtractor& extractor) {
  std::vector<KnowledgeChunk> out;
  for (const auto& doc : docs) {
    auto it = policy.entries.find(doc.source_type);
    if (it == policy.entries.end()) {
      throw ConfigError(std::string("policy.") + to_string(doc.source_type),
                        "no chunking policy for source type " + std::string(to_string(doc.source_type)));
    }
    const auto& entry = it->second;
    if (doc.source_type == SourceType::stackexchange) {
      if (entry.mode != ChunkMode::qa) {
        throw ConfigError("policy.stackexchange", "stackexchange sources require mode 'qa'");
      }
      out.push_back(qa_chunk(doc));
      continue;
    }
    switch (entry.mode) {
      case ChunkMode::h3:
        emit_sections(doc, segment_markdown_by_h3(doc.body), entry, out);
        break;
      case ChunkMode::fixed:
        emit_sections(doc, {Section{"", doc.body, 0, 0}}, entry, out);
        break;
      case ChunkMode::whole: {
        auto text = trim(doc.body);
        if (!text.empty()) out.push_back(plain_chunk(doc, doc.title, std::move(text), 0, 0));
        break;
      }
      case ChunkMode::llm: {
        if (!extractor) {
          throw ConfigError(std::string("policy.") + to_string(doc.source_type),
                            "mode 'llm' requires a configured chat backend");
        }
        emit_sections(doc, extractor(doc), entry, out);
        break;
      }
      case ChunkMode::qa:
        throw ConfigError(std::string("policy.") + to_string(doc.source_type),
                          "mode 'qa' only applies to stackexchange");
    }
  }
  return out;
}

std::vector<RawDocument> load_sources(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::io, "not a directory: " + dir.string());
  std::vector<fs::path> type_dirs;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_directory()) type_dirs.push_back(e.path());
  }
  std::sort(type_dirs.begin(), type_dirs.end());

  std::vector<RawDocument> docs;
  for (const auto& tdir : type_dirs) {
    auto type = parse_source_type(tdir.filename().string());
    if (!type) {
      throw Error(ErrorKind::invalid_argument,
                  "unknown source type directory: " + tdir.filename().string());
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(tdir)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      auto ext = file.extension().string();
      auto rel = fs::relative(file, dir).generic_string();
      if (ext == ".md" || ext == ".txt") {
        RawDocument d{*type, read_file(file), rel, file.stem().string()};
        if (!trim(d.body).empty()) docs.push_back(std::move(d));
      } else if (ext == ".jsonl") {
        auto lines = split_lines(read_file(file));
        for (std::size_t i = 0; i < lines.size(); ++i) {
          if (trim(lines[i]).empty()) continue;
          RawDocument d{*type, lines[i], rel + "#" + std::to_string(i + 1), ""};
          if (*type != SourceType::stackexchange) {
            json rec;
            try {
              rec = json::parse(lines[i]);
            } catch (const json::parse_error& e) {
              throw ParseError(i + 1, rel + ": " + e.what());
            }
            d.body = rec.value("body", std::string{});
            d.title = rec.value("title", std::string{});
            if (trim(d.body).empty()) throw ParseError(i + 1, rel + ": empty body");
          }
          docs.push_back(std::move(d));
        }
      }
    }
  }
  return docs;
}

// ---------------------------------------------------------------------------
// Corpus

Corpus::Corpus(std::vector<KnowledgeChunk> chunks) {
  for (auto& c : chunks) add(std::move(c));
}

void Corpus::add(KnowledgeChunk chunk) {
  if (by_id_.count(chunk.id)) {
    throw Error(ErrorKind::invalid_argument, "duplicate chunk id '" + chunk.id + "'");
  }
  by_id_.emplace(chunk.id, chunks_.size());
  if (chunk.external_id) by_external_id_.emplace(*chunk.external_id, chunks_.size());
  chunks_.push_back(std::move(chunk));
}

const KnowledgeChunk* Corpus::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &chunks_[it->second];
}

const KnowledgeChunk* Corpus::find_by_external_id(std::string_view external_id) const {
  auto it = by_external_id_.find(std::string(external_id));
  return it == by_external_id_.end() ? nullptr : &chunks_[it->second];
}

namespace {
constexpr const char* kKnownFields[] = {"id",      "source_type", "title",   "retrieval_key",
                                        "content", "external_id", "metadata"};

bool is_known(const std::string& key) {
  return std::any_of(std::begin(kKnownFields), std::end(kKnownFields),
                     [&](const char* k) { return key == k; });
}
}  // namespace

namespace {

ordered_json ordered_record(const KnowledgeChunk& c) {
  ordered_json rec;
  rec["id"] = c.id;
  rec["source_type"] = to_string(c.source_type);
  rec["title"] = c.title;
  rec["retrieval_key"] = c.retrieval_key;
  rec["content"] = c.content;
  if (c.external_id) rec["external_id"] = *c.external_id;
  rec["metadata"] = c.metadata;
  for (auto& [k, v] : c.extra.items()) rec[k] = v;
  return rec;
}

}  // namespace

json chunk_to_json(const KnowledgeChunk& c) { return json::parse(ordered_record(c).dump()); }

KnowledgeChunk chunk_from_json(const json& rec) {
  if (!rec.is_object()) throw Error(ErrorKind::parse, "record is not an object");
  auto str = [&](const char* name, bool required) -> std::string {
    if (!rec.contains(name)) {
      if (required) throw Error(ErrorKind::parse, std::string("missing field '") + name + "'");
      return {};
    }
    if (!rec[name].is_string()) {
      throw Error(ErrorKind::parse, std::string("field '") + name + "' is not a string");
    }
    return rec[name].get<std::string>();
  };
  KnowledgeChunk c;
  c.id = str("id", true);
  auto type = parse_source_type(str("source_type", true));
  if (!type) throw Error(ErrorKind::parse, "unknown source_type");
  c.source_type = *type;
  c.title = str("title", false);
  c.retrieval_key = str("retrieval_key", true);
  c.content = str("content", true);
  if (rec.contains("external_id") && !rec["external_id"].is_null()) c.external_id = str("external_id", true);
  if (rec.contains("metadata")) {
    const auto& m = rec["metadata"];
    if (!m.is_object()) throw Error(ErrorKind::parse, "field 'metadata' is not an object");
    for (auto& [k, v] : m.items()) {
      if (!v.is_string()) throw Error(ErrorKind::parse, "metadata value '" + k + "' is not a string");
      c.metadata[k] = v.get<std::string>();
    }
  }
  for (auto& [k, v] : rec.items()) {
    if (!is_known(k)) c.extra[k] = v;
  }
  return c;
}

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& c : corpus.chunks()) {
    out += ordered_record(c).dump(-1, ' ', false, json::error_handler_t::strict);
    out += '\n';
  }
  return out;
}

Corpus parse_corpus(std::string_view text) {
  Corpus corpus;
  auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (line.empty() && i + 1 == lines.size()) break;  // trailing newline
    KnowledgeChunk chunk;
    try {
      chunk = chunk_from_json(json::parse(line));
      validate_chunk(chunk);
    } catch (const json::parse_error& e) {
      throw ParseError(i + 1, std::string("malformed JSON: ") + e.what());
    } catch (const Error& e) {
      throw ParseError(i + 1, e.what());
    }
    if (corpus.find(chunk.id)) throw ParseError(i + 1, "duplicate id '" + chunk.id + "'");
    corpus.add(std::move(chunk));
  }
  return corpus;
}

void save_corpus(const Corpus& corpus, const fs::path& path) {
  write_file(path, serialize_corpus(corpus));
}

Corpus load_corpus(const fs::path& path) { return parse_corpus(read_file(path)); }

}  // namespace cryptaudit::corpus
