#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "llm.hpp"
#include "predetection.hpp"
#include "retrieval.hpp"

namespace cryptaudit::detection {

using predetection::Severity;

inline constexpr const char* kReportSchema = "cryptaudit.report/1";

enum class Verdict { vulnerable, likely_vulnerable, no_issue_found, analysis_failed };
const char* to_string(Verdict v);
std::optional<Verdict> parse_verdict(const std::string& s);

// Flaw taxonomy used for finding categories.
const std::vector<std::string>& categories();

struct Finding {
  std::string title;
  std::string category;
  Severity severity = Severity::info;
  std::string evidence;
  std::string remediation;
  std::vector<std::string> knowledge_citations;

  bool operator==(const Finding&) const = default;
};

struct RetrievedRef {
  std::string chunk_id;
  double cos_sim = 0.0;
  bool operator==(const RetrievedRef&) const = default;
};

struct CurveMeta {
  std::string p, a, b;
  std::string executor;
  std::vector<std::string> flags;
  std::optional<std::string> order;
  std::string evidence;
  bool operator==(const CurveMeta&) const = default;
};

struct PipelineMeta {
  std::string chat_model;
  std::string embedding_model;
  double tau = 0.75;
  std::size_t k = 5;
  std::vector<std::pair<std::string, long long>> timings_ms;
  std::vector<RetrievedRef> retrieved_semantic;
  std::vector<RetrievedRef> retrieved_cot;
  std::string route;
  std::vector<std::string> warnings;
  std::optional<CurveMeta> curve;

  bool operator==(const PipelineMeta&) const = default;
};

struct PreDetectionDigest {
  std::string summary;
  std::vector<std::string> algorithms;
  std::vector<std::pair<std::string, std::string>> compliance;  // check_id, status
  std::vector<std::string> candidate_flaws;

  bool operator==(const PreDetectionDigest&) const = default;
};

struct DetectionReport {
  std::string sample_id;
  std::string origin;
  std::optional<std::string> language;
  Verdict verdict = Verdict::analysis_failed;
  std::vector<Finding> findings;
  std::string diagnostic;  // set for analysis_failed
  std::string raw_output;  // model text that could not be parsed
  PreDetectionDigest predetection;
  PipelineMeta meta;

  bool operator==(const DetectionReport&) const = default;
};

Verdict derive_verdict(const std::vector<Finding>& findings);

// Violated report invariants; empty when the report is consistent.
std::vector<std::string> check_report(const DetectionReport& report);

struct PromptBudget {
  std::size_t knowledge_chars = 12000;
  std::size_t total_chars = 60000;
};

struct AssembledPrompt {
  std::string text;
  bool fits = true;           // false when the prompt without knowledge is over budget
  std::vector<std::string> dropped;  // chunk ids trimmed, in drop order
};

// Instruction, code, summary, compliance, reasoning trace, curve analysis, the
// two knowledge blocks, Notice. A chunk present in both blocks is written
// once; its second occurrence becomes a back-reference. Knowledge items are
// dropped lowest cos_sim first (later item first on ties) until the knowledge
// section and the whole prompt fit.
AssembledPrompt assemble_phase3_prompt(const predetection::CodeSample& sample,
                                       const predetection::PreDetectionBundle& bundle,
                                       const retrieval::RetrievedBlock& semantic,
                                       const retrieval::RetrievedBlock& cot,
                                       const PromptBudget& budget);

struct DetectOptions {
  PromptBudget budget;
  double tau = 0.75;
  std::size_t k = 5;
  std::string embedding_model;
};

DetectionReport detect(const predetection::CodeSample& sample,
                       const predetection::PreDetectionBundle& bundle,
                       const retrieval::RetrievedBlock& semantic,
                       const retrieval::RetrievedBlock& cot, llm::Gateway& gateway,
                       const DetectOptions& opts);

// A report for a sample whose analysis stopped before detection.
DetectionReport failed_report(const predetection::CodeSample& sample, const std::string& diagnostic,
                              const std::string& raw_output = {});

void fill_predetection(DetectionReport& report, const predetection::PreDetectionBundle& bundle);

enum class Format { machine, human };

std::string render_report(const DetectionReport& report, Format format);
// Inverse of the machine format. Throws ParseError on schema violations.
DetectionReport parse_report(const std::string& text);

}  // namespace cryptaudit::detection
