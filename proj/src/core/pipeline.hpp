#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "config.hpp"
#include "corpus.hpp"
#include "detection.hpp"
#include "embedding.hpp"
#include "evaluation.hpp"
#include "llm.hpp"
#include "predetection.hpp"

namespace cryptaudit::pipeline {

std::unique_ptr<embedding::EmbeddingProvider> make_embedding_provider(const config::AppConfig& cfg);

// Scripted replies under a mock script (optionally falling back to the echo
// judge), otherwise the HTTP chat backend.
std::shared_ptr<llm::ChatBackend> make_chat_backend(const config::AppConfig& cfg, bool echo_judge_fallback);

std::unique_ptr<llm::Gateway> make_gateway(const config::AppConfig& cfg, std::shared_ptr<llm::ChatBackend> backend);

// Knowledge units extracted by the chat model, for the "llm" chunking mode.
corpus::UnitExtractor llm_extractor(llm::Gateway& gateway);

struct KbSummary {
  std::size_t documents = 0;
  std::size_t chunks = 0;
  std::map<std::string, std::size_t> per_source_type;
  std::string index_provider;  // empty when no index was written
};

std::string to_json(const KbSummary& s);

KbSummary kb_build(const config::AppConfig& cfg, const std::filesystem::path& sources,
                   const std::filesystem::path& policy_file, const std::filesystem::path& corpus_out,
                   const std::filesystem::path& index_out);

KbSummary kb_index(const config::AppConfig& cfg, const std::filesystem::path& corpus_path,
                   const std::filesystem::path& index_out);

std::string curve_check(const config::AppConfig& cfg, const std::string& p, const std::string& a,
                        const std::string& b);

// Plain-text analysis used as the "generated" side of a benchmark case.
std::string analysis_text(const detection::DetectionReport& report);

struct ScanCounts {
  std::size_t samples = 0;
  std::size_t vulnerable = 0;
  std::size_t likely_vulnerable = 0;
  std::size_t no_issue_found = 0;
  std::size_t analysis_failed = 0;
};

struct ScanResult {
  std::vector<detection::DetectionReport> reports;  // input order
  ScanCounts counts;
  std::string summary_json;
};

enum class OutputFormat { machine, human, both };
OutputFormat parse_output_format(const std::string& s);

// Milliseconds since an arbitrary origin.
using Clock = std::function<double()>;

class Engine {
 public:
  // Loads corpus, index, specs and few-shot examples and connects the
  // backends. Throws ConfigError for the first violation of command's
  // requirements.
  static std::unique_ptr<Engine> create(const config::AppConfig& cfg, const std::string& command);

  std::string query(const std::string& text, const retrieval::RetrievalConfig& rc) const;

  detection::DetectionReport analyze(const predetection::CodeSample& sample);

  ScanResult scan(const std::filesystem::path& input, const std::filesystem::path& out_dir,
                  OutputFormat format);

  // pipeline is "full" (the scan pipeline) or "echo" (the reference itself).
  // Requires an engine created for "eval".
  evaluation::Aggregate eval(const std::filesystem::path& cases_path,
                             const std::filesystem::path& out_path, const std::string& pipeline);

  llm::Gateway* gateway() { return gateway_.get(); }
  const config::AppConfig& config() const { return cfg_; }

 private:
  Engine() = default;

  config::AppConfig cfg_;
  std::string command_;
  corpus::Corpus corpus_;
  std::unique_ptr<embedding::VectorIndex> index_;
  std::unique_ptr<embedding::EmbeddingProvider> embedder_;
  std::unique_ptr<llm::Gateway> gateway_;
  std::unique_ptr<curve::RemoteCas> cas_;
  predetection::PreDetectionOptions pre_opts_;
  Clock clock_;
};

}  // namespace cryptaudit::pipeline
