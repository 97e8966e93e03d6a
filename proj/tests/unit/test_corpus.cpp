#include <doctest.h>

#include <cmath>
#include <random>

#include "corpus.hpp"
#include "errors.hpp"
#include "support/generators.hpp"
#include "support/paths.hpp"

using namespace cryptaudit;
using namespace cryptaudit::corpus;

namespace {

std::size_t expected_count(std::size_t len, std::size_t max_chars, std::size_t overlap) {
  if (len == 0) return 0;
  if (len <= max_chars) return 1;
  std::size_t stride = max_chars - overlap;
  return (len - overlap + stride - 1) / stride;
}

std::string reconstruct(const std::vector<std::string>& pieces, std::size_t overlap) {
  std::string out;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (i == 0) {
      out = pieces[0];
      continue;
    }
    // Skip `overlap` code points of the next piece.
    std::size_t pos = 0;
    for (std::size_t cp = 0; cp < overlap; ++cp) {
      ++pos;
      while (pos < pieces[i].size() && (static_cast<unsigned char>(pieces[i][pos]) & 0xC0) == 0x80) ++pos;
    }
    out += pieces[i].substr(pos);
  }
  return out;
}

std::size_t codepoints(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("JSONL round trip is the identity on randomized chunks") {
  std::mt19937_64 rng(11);
  std::vector<KnowledgeChunk> chunks;
  for (std::size_t i = 0; i < 1000; ++i) chunks.push_back(gen::random_chunk(rng, i));
  Corpus original(chunks);
  auto text = serialize_corpus(original);
  auto parsed = parse_corpus(text);
  CHECK(parsed == original);
  CHECK(serialize_corpus(parsed) == text);
}

TEST_CASE("unknown fields survive a load/save cycle") {
  std::string line =
      R"({"id":"a","source_type":"blog","title":"t","retrieval_key":"k","content":"k","metadata":{},"added_by":"v2"})";
  auto c = parse_corpus(line + "\n");
  REQUIRE(c.size() == 1);
  CHECK(c.chunks()[0].extra.at("added_by") == "v2");
  CHECK(serialize_corpus(c).find("\"added_by\":\"v2\"") != std::string::npos);
}

TEST_CASE("duplicate ids are reported with their line") {
  std::string text =
      R"({"id":"a","source_type":"blog","retrieval_key":"k","content":"k"})" "\n"
      R"({"id":"a","source_type":"blog","retrieval_key":"j","content":"j"})" "\n";
  try {
    parse_corpus(text);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("schema violations are rejected") {
  CHECK_THROWS_AS(parse_corpus(R"({"id":"","source_type":"blog","retrieval_key":"k","content":"k"})"), ParseError);
  CHECK_THROWS_AS(parse_corpus(R"({"id":"s","source_type":"stackexchange","retrieval_key":"q","content":"q a"})"),
                  ParseError);
  CHECK_THROWS_AS(parse_corpus(R"({"id":"b","source_type":"blog","retrieval_key":"k","content":"other"})"),
                  ParseError);
  CHECK_THROWS_AS(parse_corpus(R"({"id":"b","source_type":"podcast","retrieval_key":"k","content":"k"})"),
                  ParseError);
  CHECK_THROWS_AS(parse_corpus("{not json\n"), ParseError);
}

TEST_CASE("chunk_fixed reconstructs its input") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 1000; ++trial) {
    auto text = gen::random_text(rng, 600, true);
    std::size_t max_chars = 1 + rng() % 80;
    std::size_t overlap = rng() % max_chars;
    auto pieces = chunk_fixed(text, max_chars, overlap);
    CHECK(reconstruct(pieces, overlap) == text);
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      CHECK(codepoints(pieces[i]) <= max_chars);
      if (i + 1 < pieces.size()) CHECK(codepoints(pieces[i]) == max_chars);
    }
  }
}

TEST_CASE("chunk_fixed count follows the stride formula") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t len = rng() % 3000;
    std::size_t max_chars = 1 + rng() % 500;
    std::size_t overlap = rng() % max_chars;
    auto pieces = chunk_fixed(std::string(len, 'x'), max_chars, overlap);
    CHECK(pieces.size() == expected_count(len, max_chars, overlap));
  }
}

TEST_CASE("chunk_fixed offsets for a 1000 character input") {
  std::string text;
  for (int i = 0; i < 1000; ++i) text += static_cast<char>('a' + i % 26);
  auto pieces = chunk_fixed(text, 400, 50);
  REQUIRE(pieces.size() == 3);
  CHECK(pieces[0] == text.substr(0, 400));
  CHECK(pieces[1] == text.substr(350, 400));
  CHECK(pieces[2] == text.substr(700, 300));
  CHECK_THROWS_AS(chunk_fixed(text, 10, 10), Error);
  CHECK_THROWS_AS(chunk_fixed(text, 0, 0), Error);
}

TEST_CASE("h3 segmentation preserves content and skips fenced headers") {
  std::mt19937_64 rng(14);
  for (int doc = 0; doc < 20; ++doc) {
    auto f = gen::markdown_fixture(rng);
    auto sections = segment_markdown_by_h3(f.text);
    auto lines = split_lines(f.text);

    std::vector<std::string> titles;
    std::size_t next = 0;
    for (const auto& s : sections) {
      CHECK(s.first_line == next);
      next = s.first_line + s.line_count;
      std::vector<std::string> body_lines = split_lines(s.body);
      std::size_t header = s.title.empty() && s.first_line == 0 && f.has_preamble ? 0 : 1;
      if (header) titles.push_back(s.title);
      // A header-only section has an empty body, which split_lines reads as one empty line.
      if (s.body.empty() && s.line_count == header) body_lines.clear();
      REQUIRE(body_lines.size() + header == s.line_count);
      for (std::size_t i = 0; i < body_lines.size(); ++i) {
        CHECK(body_lines[i] == lines[s.first_line + header + i]);
      }
    }
    CHECK(next == lines.size());
    CHECK(titles == f.titles);
    CHECK(sections.size() == f.titles.size() + (f.has_preamble ? 1 : 0));
  }
}

TEST_CASE("h3 header syntax") {
  auto s = segment_markdown_by_h3("### A\nx\n###B\n#### C\n    ### D\n   ### E\n");
  REQUIRE(s.size() == 2);
  CHECK(s[0].title == "A");
  CHECK(s[0].body == "x\n###B\n#### C\n    ### D");
  CHECK(s[1].title == "E");
}

TEST_CASE("an unterminated fence swallows the rest of the document") {
  auto s = segment_markdown_by_h3("### A\n```\n### B\n");
  REQUIRE(s.size() == 1);
  CHECK(s[0].title == "A");
}

TEST_CASE("build_chunks applies the per-source policy") {
  std::vector<RawDocument> docs = {
      {SourceType::blog, "intro\n### One\nfirst\n### Two\nsecond", "blog/post.md", "post"},
      {SourceType::cwe_rule, "whole rule text", "cwe/r.jsonl#1", "CWE-1"},
      {SourceType::stackexchange, R"({"id": 42, "question": "Q?", "answer": "A.", "url": "https://x/42"})",
       "se/qa.jsonl#1", ""},
      {SourceType::book, std::string(3000, 'b'), "book/b.txt", "b"},
  };
  auto chunks = build_chunks(docs, ChunkPolicy::defaults());
  REQUIRE(chunks.size() == 3 + 1 + 1 + 2);
  CHECK(chunks[0].title == "post");
  CHECK(chunks[1].title == "One");
  CHECK(chunks[1].content == "first");
  CHECK(chunks[3].title == "CWE-1");
  const auto& se = chunks[4];
  CHECK(se.source_type == SourceType::stackexchange);
  CHECK(se.retrieval_key == "Q?");
  CHECK(se.content == "Q?\n\nA.");
  CHECK(se.external_id == "42");
  CHECK(se.metadata.at("url") == "https://x/42");
  CHECK(chunks[5].content.size() == 1600);
  CHECK(chunks[6].content.size() == 1600);
  for (const auto& c : chunks) CHECK_NOTHROW(validate_chunk(c));
}

TEST_CASE("chunk ids are stable") {
  CHECK(chunk_id("blog/post.md", 1, 0) == chunk_id("blog/post.md", 1, 0));
  CHECK(chunk_id("blog/post.md", 1, 0) != chunk_id("blog/post.md", 0, 1));
  CHECK(chunk_id("x", 0, 0).size() == 16);
}

TEST_CASE("policy files") {
  auto p = ChunkPolicy::from_json(json::parse(R"({"book": {"mode": "fixed", "max_chars": 100, "overlap": 10}})"));
  CHECK(p.entries.at(SourceType::book).max_chars == 100);
  CHECK_THROWS_AS(ChunkPolicy::from_json(json::parse(R"({"book": {"mode": "fixed", "max_chars": 10, "overlap": 10}})")),
                  ConfigError);
  CHECK_THROWS_AS(ChunkPolicy::from_json(json::parse(R"({"podcast": {}})")), ConfigError);
  CHECK_THROWS_AS(ChunkPolicy::from_json(json::parse(R"({"blog": {"mode": "sentences"}})")), ConfigError);
  std::vector<RawDocument> se = {{SourceType::stackexchange, R"({"id":1,"question":"q","answer":"a"})", "o", ""}};
  auto bad = ChunkPolicy::from_json(json::parse(R"({"stackexchange": {"mode": "whole"}})"));
  CHECK_THROWS_AS(build_chunks(se, bad), ConfigError);
  std::vector<RawDocument> blog = {{SourceType::blog, "x", "o", ""}};
  auto llm = ChunkPolicy::from_json(json::parse(R"({"blog": {"mode": "llm"}})"));
  CHECK_THROWS_AS(build_chunks(blog, llm), ConfigError);
}

TEST_CASE("bundled knowledge sources") {
  auto docs = load_sources(testpaths::data_dir() / "kb" / "sources");
  auto chunks = build_chunks(docs, ChunkPolicy::defaults());
  CHECK(chunks.size() == 30);
  Corpus c(chunks);
  auto on_disk = load_corpus(testpaths::data_dir() / "kb" / "corpus.jsonl");
  CHECK(on_disk == c);
  const auto* se = c.find_by_external_id("101");
  REQUIRE(se != nullptr);
  CHECK(se->content.find("Reject the signature unless 1 <= r < n") != std::string::npos);
  CHECK(se->retrieval_key.find("Reject") == std::string::npos);
}

}  // TEST_SUITE
