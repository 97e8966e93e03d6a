#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "curve.hpp"
#include "llm.hpp"

namespace cryptaudit::predetection {

struct CodeSample {
  std::string id;
  std::optional<std::string> language_hint;
  std::string source_text;
  std::string origin;
};

std::optional<std::string> language_from_extension(const std::filesystem::path& path);

// A single file, or every regular file under a directory (sorted). Sample ids
// are file names; a directory with two files of the same name is rejected.
std::vector<CodeSample> load_samples(const std::filesystem::path& input);

struct Parameter {
  std::string name;
  std::string value;
  std::string role;
};

struct SemanticSummary {
  std::string text;
  std::vector<std::string> extracted_algorithms;
  std::vector<Parameter> parameters;
};

// Maps spellings such as "RSA_OAEP" or "ECDSA-P256" onto bundled ids; unknown
// names are returned unchanged.
std::string normalize_algorithm(const std::string& name);

enum class Severity { critical, high, medium, low, info };
const char* to_string(Severity s);
std::optional<Severity> parse_severity(const std::string& s);

struct ChecklistItem {
  std::string check_id;
  std::string requirement;
  Severity severity = Severity::medium;
};

struct AlgorithmSpec {
  std::string algorithm_id;
  std::string title;
  // Other normalized algorithm names this checklist is applied to.
  std::vector<std::string> applies_to;
  std::vector<ChecklistItem> checklist;
  std::string source;
};

AlgorithmSpec parse_algorithm_spec(const json& doc);
// Every *.json file in dir, sorted by algorithm_id.
std::vector<AlgorithmSpec> load_specs(const std::filesystem::path& dir);

enum class CheckStatus { pass, violation, indeterminate };
const char* to_string(CheckStatus s);

struct CheckVerdict {
  std::string check_id;
  CheckStatus status = CheckStatus::indeterminate;
  std::string evidence;
};

struct ComplianceFindings {
  std::string algorithm_id;
  std::vector<CheckVerdict> verdicts;  // checklist order
};

enum class Confidence { low, medium, high };
const char* to_string(Confidence c);

struct CandidateFlaw {
  std::string label;
  Confidence confidence = Confidence::low;
  std::string evidence;
};

struct ReasoningTrace {
  std::vector<std::string> steps;
  std::vector<CandidateFlaw> candidate_flaws;
};

struct Route {
  enum class Kind { compliance, cot_only } kind = Kind::cot_only;
  std::string algorithm_id;  // set for compliance

  std::string str() const;
  bool operator==(const Route&) const = default;
};

SemanticSummary summarize(const CodeSample& sample, llm::Gateway& gateway);

Route identify_route(const SemanticSummary& summary, const std::vector<AlgorithmSpec>& specs);

ComplianceFindings verify_compliance(const CodeSample& sample, const AlgorithmSpec& spec,
                                     llm::Gateway& gateway);

ReasoningTrace cot_reason(const CodeSample& sample, const std::vector<std::string>& few_shot,
                          llm::Gateway& gateway);

// Reads *.md files from dir as few-shot examples; empty dir path yields the
// bundled defaults.
std::vector<std::string> load_few_shot(const std::filesystem::path& dir);

std::optional<curve::CurveParams> extract_curve_params(const CodeSample& sample,
                                                       llm::Gateway& gateway);

// Whether the summary suggests elliptic-curve code worth extracting.
bool mentions_curve(const SemanticSummary& summary);

struct PreDetectionBundle {
  SemanticSummary summary;
  Route route;
  std::optional<ComplianceFindings> compliance;
  ReasoningTrace trace;
  std::optional<curve::CurveParams> curve;
  std::optional<curve::CurveAssessment> curve_assessment;
  std::string curve_note;  // extraction rejections and executor errors
};

struct PreDetectionOptions {
  std::vector<AlgorithmSpec> specs;
  std::vector<std::string> few_shot;
  curve::ExecutorConfig curve_cfg;
  curve::RemoteCas* remote_cas = nullptr;
};

PreDetectionBundle run_predetection(const CodeSample& sample, const PreDetectionOptions& opts,
                                    llm::Gateway& gateway);

// Retrieval signal 1: summary text, with compliance findings appended.
std::string summary_signal(const PreDetectionBundle& bundle);
// Retrieval signal 2: the reasoning steps and candidate flaws.
std::string cot_signal(const ReasoningTrace& trace);

std::string render_compliance(const ComplianceFindings& findings);
std::string render_trace(const ReasoningTrace& trace);
std::string render_curve(const PreDetectionBundle& bundle);

}  // namespace cryptaudit::predetection
