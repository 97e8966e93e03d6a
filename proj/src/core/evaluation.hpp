#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "embedding.hpp"
#include "llm.hpp"
#include "predetection.hpp"

namespace cryptaudit::evaluation {

struct BenchmarkCase {
  std::string id;
  predetection::CodeSample sample;
  std::string reference_analysis;
  std::string source;  // cve, ctf or synthetic
  std::string language;
};

// JSONL, one case per line:
// {"id", "reference_analysis", "tags": {"source", "language"},
//  "sample": {"id", "language_hint", "source_text" | "source_path", "origin"}}
// source_path is resolved against base_dir.
std::vector<BenchmarkCase> parse_cases(std::string_view text, const std::filesystem::path& base_dir);
std::vector<BenchmarkCase> load_cases(const std::filesystem::path& path);

struct CredibilityScores {
  double relevance = 0.0;
  double informativeness = 0.0;
  double logical_soundness = 0.0;

  double mean() const { return (relevance + informativeness + logical_soundness) / 3.0; }
};

struct MetricSet {
  double credibility = 0.0;        // [0, 100]
  double cosine_similarity = 0.0;  // [0, 1]
  double semantic_match = 0.0;     // [0, 1]
  double coverage = 0.0;           // [0, 1]
  CredibilityScores credibility_parts;
};

// Embedding cosine clamped to [0, 1].
double cosine_metric(const std::string& generated, const std::string& reference,
                     embedding::EmbeddingProvider& provider);

// Each judge retries once on an unparseable or out-of-range reply and then
// throws StructuredOutputError.
double judge_semantic_match(const std::string& generated, const std::string& reference,
                            llm::Gateway& gateway);
double judge_coverage(const std::string& generated, const std::string& reference,
                      llm::Gateway& gateway);
CredibilityScores credibility(const std::string& generated, const std::string& reference,
                              llm::Gateway& gateway);

std::string judge_prompt(const std::string& instruction, const std::string& notice,
                         const std::string& generated, const std::string& reference);

// Scores a pair by comparing the GENERATED and REFERENCE sections of a judge
// prompt: identical texts get the maximum score, anything else zero.
class EchoJudgeBackend final : public llm::ChatBackend {
 public:
  std::string tag() const override { return "mock-echo-judge"; }
  llm::ChatResponse complete(const llm::ChatRequest& req) override;
};

// Produces the generated analysis for a case; throwing marks the case errored.
using Pipeline = std::function<std::string(const BenchmarkCase&)>;

struct CaseResult {
  std::string id;
  std::optional<MetricSet> metrics;
  std::string error;
};

struct Aggregate {
  std::vector<CaseResult> cases;  // input order
  std::size_t errored = 0;
  std::optional<MetricSet> means;  // absent when no case was scored
};

struct Judges {
  llm::Gateway& gateway;
  embedding::EmbeddingProvider& embedder;
};

Aggregate run_benchmark(const std::vector<BenchmarkCase>& cases, const Pipeline& pipeline,
                        const Judges& judges, std::size_t concurrency = 4);

inline constexpr const char* kEvalSchema = "cryptaudit.eval/1";

std::string render_aggregate_json(const Aggregate& agg);
std::string render_table(const Aggregate& agg);

}  // namespace cryptaudit::evaluation
