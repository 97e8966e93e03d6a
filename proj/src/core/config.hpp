#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "curve.hpp"
#include "retrieval.hpp"

namespace cryptaudit::config {

struct ChatSettings {
  std::string endpoint;
  std::string model;
  std::string api_key_env = "CRYPTAUDIT_API_KEY";
  std::size_t max_output_tokens = 2048;
  long timeout_s = 120;
};

struct EmbeddingSettings {
  std::string provider = "http";  // http, mock-hash or mock-bow
  std::string endpoint;
  std::string model;
  std::string api_key_env = "CRYPTAUDIT_API_KEY";
};

struct DetectionSettings {
  std::size_t knowledge_budget = 12000;
  std::size_t prompt_budget = 60000;
};

struct Paths {
  std::string corpus;
  std::string index;
  std::string specs_dir;
  std::string fewshot_dir;
  std::string mock_script;  // non-empty switches every backend to offline mocks
  std::string audit_log;
};

struct CurveSettings {
  std::string executor = "local";  // "local" or an http(s) endpoint
  std::uint64_t smooth_bound = 1ULL << 16;
  std::uint64_t local_bound = 1ULL << 20;
};

struct GatewaySettings {
  std::size_t concurrency = 4;
  int retry_attempts = 3;
  long retry_backoff_ms = 1000;
};

struct AppConfig {
  ChatSettings chat;
  EmbeddingSettings embedding;
  retrieval::RetrievalConfig retrieval;
  DetectionSettings detection;
  Paths paths;
  CurveSettings curve;
  GatewaySettings gateway;

  bool mock() const { return !paths.mock_script.empty(); }
};

// Defaults, with paths.specs_dir pointing at the bundled specs.
AppConfig defaults();

// Every settable key in "section.name" form, in documentation order.
const std::vector<std::string>& keys();

// Throws ConfigError naming the key for unknown keys and unparsable values.
void set(AppConfig& cfg, const std::string& key, const std::string& value);
std::string get(const AppConfig& cfg, const std::string& key);

// INI file with [chat], [embedding], [retrieval], [detection], [paths],
// [curve] and [gateway] sections. Relative paths resolve against the file.
void load_file(AppConfig& cfg, const std::filesystem::path& path);

struct Violation {
  std::string key;
  std::string value;
  std::string constraint;
};

// command is one of "", "kb-build", "kb-index", "kb-query", "scan", "eval",
// "curve-check"; it adds the path and endpoint requirements of that command.
std::vector<Violation> validate_config(const AppConfig& cfg, const std::string& command = "");

curve::ExecutorConfig executor_config(const AppConfig& cfg);

}  // namespace cryptaudit::config
