#pragma once

#include <string>
#include <vector>

// Bundled prompt texts. Every template follows the Instruction / Example /
// Notice layout; each Notice mandates a single fenced ```json block.
namespace cryptaudit::prompts {

inline constexpr const char* kSummaryTemplate = "summary.v1";
inline constexpr const char* kComplianceTemplate = "compliance.v1";
inline constexpr const char* kCotTemplate = "cot.v1";
inline constexpr const char* kCurveTemplate = "curve_extract.v1";
inline constexpr const char* kDetectTemplate = "detect.v1";
inline constexpr const char* kDetectReformatTemplate = "detect.reformat.v1";
inline constexpr const char* kExtractUnitsTemplate = "kb.extract_units.v1";
inline constexpr const char* kJudgeSemanticTemplate = "judge.semantic_match.v1";
inline constexpr const char* kJudgeCoverageTemplate = "judge.coverage.v1";
inline constexpr const char* kJudgeCredibilityTemplate = "judge.credibility.v1";

// Suffix appended to a template id when a reply is re-requested after a
// schema violation.
inline constexpr const char* kRetrySuffix = ".retry";

const std::string& summary_instruction();
const std::string& summary_example();
const std::string& summary_notice();

const std::string& compliance_instruction();
const std::string& compliance_example();
const std::string& compliance_notice();

const std::string& cot_instruction();
const std::string& cot_notice();
const std::vector<std::string>& default_few_shot_examples();

const std::string& curve_instruction();
const std::string& curve_example();
const std::string& curve_notice();

const std::string& detect_instruction();
const std::string& detect_notice();

const std::string& extract_units_instruction();
const std::string& extract_units_example();
const std::string& extract_units_notice();

const std::string& judge_semantic_instruction();
const std::string& judge_coverage_instruction();
const std::string& judge_credibility_instruction();
const std::string& judge_example();
const std::string& judge_score_notice();
const std::string& judge_credibility_notice();

std::string retry_note(const std::string& error);

}  // namespace cryptaudit::prompts
