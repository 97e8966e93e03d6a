#include "config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <functional>
#include <map>

#include "errors.hpp"
#include "util.hpp"

#ifndef CRYPTAUDIT_DATA_DIR
#define CRYPTAUDIT_DATA_DIR "data"
#endif

namespace cryptaudit::config {

namespace fs = std::filesystem;

AppConfig defaults() {
  AppConfig cfg;
  cfg.paths.specs_dir = (fs::path(CRYPTAUDIT_DATA_DIR) / "specs").string();
  return cfg;
}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  auto v = trim(value);
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError(key, "'" + value + "' is not a valid number");
  }
  return out;
}

template <typename T>
std::string show(const T& v) {
  if constexpr (std::is_same_v<T, std::string>) {
    return v;
  } else if constexpr (std::is_floating_point_v<T>) {
    auto s = format_fixed(v, 6);
    while (s.size() > 1 && s.back() == '0' && s[s.size() - 2] != '.') s.pop_back();
    return s;
  } else {
    return std::to_string(v);
  }
}

struct Field {
  std::function<void(AppConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const AppConfig&)> get;
  bool is_path = false;
};

template <typename T>
Field field(T AppConfig::*section_ptr, auto member, bool is_path = false) {
  return {[=](AppConfig& c, const std::string& key, const std::string& value) {
            auto& target = (c.*section_ptr).*member;
            using V = std::remove_reference_t<decltype(target)>;
            if constexpr (std::is_same_v<V, std::string>) {
              target = trim(value);
            } else {
              target = parse_number<V>(key, value);
            }
          },
          [=](const AppConfig& c) { return show((c.*section_ptr).*member); }, is_path};
}

const std::vector<std::pair<std::string, Field>>& table() {
  static const std::vector<std::pair<std::string, Field>> kTable = {
      {"chat.endpoint", field(&AppConfig::chat, &ChatSettings::endpoint)},
      {"chat.model", field(&AppConfig::chat, &ChatSettings::model)},
      {"chat.api_key_env", field(&AppConfig::chat, &ChatSettings::api_key_env)},
      {"chat.max_output_tokens", field(&AppConfig::chat, &ChatSettings::max_output_tokens)},
      {"chat.timeout_s", field(&AppConfig::chat, &ChatSettings::timeout_s)},
      {"embedding.provider", field(&AppConfig::embedding, &EmbeddingSettings::provider)},
      {"embedding.endpoint", field(&AppConfig::embedding, &EmbeddingSettings::endpoint)},
      {"embedding.model", field(&AppConfig::embedding, &EmbeddingSettings::model)},
      {"embedding.api_key_env", field(&AppConfig::embedding, &EmbeddingSettings::api_key_env)},
      {"retrieval.k", field(&AppConfig::retrieval, &retrieval::RetrievalConfig::k)},
      {"retrieval.tau", field(&AppConfig::retrieval, &retrieval::RetrievalConfig::tau)},
      {"detection.knowledge_budget", field(&AppConfig::detection, &DetectionSettings::knowledge_budget)},
      {"detection.prompt_budget", field(&AppConfig::detection, &DetectionSettings::prompt_budget)},
      {"paths.corpus", field(&AppConfig::paths, &Paths::corpus, true)},
      {"paths.index", field(&AppConfig::paths, &Paths::index, true)},
      {"paths.specs_dir", field(&AppConfig::paths, &Paths::specs_dir, true)},
      {"paths.fewshot_dir", field(&AppConfig::paths, &Paths::fewshot_dir, true)},
      {"paths.mock_script", field(&AppConfig::paths, &Paths::mock_script, true)},
      {"paths.audit_log", field(&AppConfig::paths, &Paths::audit_log, true)},
      {"curve.executor", field(&AppConfig::curve, &CurveSettings::executor)},
      {"curve.smooth_bound", field(&AppConfig::curve, &CurveSettings::smooth_bound)},
      {"curve.local_bound", field(&AppConfig::curve, &CurveSettings::local_bound)},
      {"gateway.concurrency", field(&AppConfig::gateway, &GatewaySettings::concurrency)},
      {"gateway.retry_attempts", field(&AppConfig::gateway, &GatewaySettings::retry_attempts)},
      {"gateway.retry_backoff_ms", field(&AppConfig::gateway, &GatewaySettings::retry_backoff_ms)},
  };
  return kTable;
}

const Field& lookup(const std::string& key) {
  for (const auto& [k, f] : table()) {
    if (k == key) return f;
  }
  throw ConfigError(key, "unknown configuration key");
}

}  // namespace

const std::vector<std::string>& keys() {
  static const std::vector<std::string> kKeys = [] {
    std::vector<std::string> out;
    for (const auto& [k, f] : table()) out.push_back(k);
    return out;
  }();
  return kKeys;
}

void set(AppConfig& cfg, const std::string& key, const std::string& value) {
  lookup(key).set(cfg, key, value);
}

std::string get(const AppConfig& cfg, const std::string& key) { return lookup(key).get(cfg); }

void load_file(AppConfig& cfg, const fs::path& path) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    if (e.line() == 0) throw Error(ErrorKind::io, "cannot read config file " + path.string());
    throw ParseError(e.line(), path.string() + ": " + e.message());
  }
  for (const auto& [section, entries] : tree) {
    if (entries.empty() && !entries.data().empty()) {
      throw ConfigError(section, "keys must be inside a [section]");
    }
    for (const auto& [name, node] : entries) {
      auto key = section + "." + name;
      const auto& f = lookup(key);
      auto value = node.data();
      if (f.is_path && !trim(value).empty() && fs::path(trim(value)).is_relative()) {
        value = (path.parent_path() / trim(value)).lexically_normal().string();
      }
      f.set(cfg, key, value);
    }
  }
}

std::vector<Violation> validate_config(const AppConfig& cfg, const std::string& command) {
  std::vector<Violation> out;
  auto add = [&](const std::string& key, const std::string& constraint) {
    out.push_back({key, get(cfg, key), constraint});
  };
  static const std::vector<std::string> kCommands = {"", "kb-build", "kb-index", "kb-query",
                                                     "scan", "eval", "curve-check"};
  if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end()) {
    throw Error(ErrorKind::invalid_argument, "unknown command '" + command + "'");
  }

  if (cfg.retrieval.k < 1) add("retrieval.k", "must be >= 1");
  if (!(cfg.retrieval.tau >= -1.0 && cfg.retrieval.tau <= 1.0)) add("retrieval.tau", "must lie in [-1, 1]");
  if (cfg.detection.knowledge_budget < 1) add("detection.knowledge_budget", "must be >= 1");
  if (cfg.detection.prompt_budget < 1) add("detection.prompt_budget", "must be >= 1");
  if (cfg.chat.max_output_tokens < 1) add("chat.max_output_tokens", "must be >= 1");
  if (cfg.chat.timeout_s < 1) add("chat.timeout_s", "must be >= 1");
  if (cfg.gateway.concurrency < 1) add("gateway.concurrency", "must be >= 1");
  if (cfg.gateway.retry_attempts < 1) add("gateway.retry_attempts", "must be >= 1");
  if (cfg.gateway.retry_backoff_ms < 0) add("gateway.retry_backoff_ms", "must be >= 0");
  if (cfg.curve.smooth_bound < 2) add("curve.smooth_bound", "must be >= 2");
  if (cfg.curve.local_bound < 5 || cfg.curve.local_bound > (1ULL << 28)) {
    add("curve.local_bound", "must lie in [5, 2^28]");
  }
  const auto& ex = cfg.curve.executor;
  if (ex != "local" && ex.rfind("http://", 0) != 0 && ex.rfind("https://", 0) != 0) {
    add("curve.executor", "must be 'local' or an http(s) URL");
  }
  const auto& prov = cfg.embedding.provider;
  if (prov != "http" && prov != "mock-hash" && prov != "mock-bow") {
    add("embedding.provider", "must be one of http, mock-hash, mock-bow");
  }
  if (!cfg.paths.mock_script.empty() && !fs::is_regular_file(cfg.paths.mock_script)) {
    add("paths.mock_script", "file does not exist");
  }
  if (!cfg.paths.fewshot_dir.empty() && !fs::is_directory(cfg.paths.fewshot_dir)) {
    add("paths.fewshot_dir", "directory does not exist");
  }

  bool needs_index = command == "kb-query" || command == "scan" || command == "eval";
  bool embeds = needs_index || command == "kb-index";
  bool chats = command == "scan" || command == "eval";
  if (needs_index) {
    if (cfg.paths.corpus.empty()) add("paths.corpus", "required for " + command);
    else if (!fs::is_regular_file(cfg.paths.corpus)) add("paths.corpus", "file does not exist");
    if (cfg.paths.index.empty()) add("paths.index", "required for " + command);
    else if (!fs::is_regular_file(cfg.paths.index)) add("paths.index", "file does not exist");
  }
  if (command == "scan" || command == "eval") {
    if (!cfg.paths.specs_dir.empty() && !fs::is_directory(cfg.paths.specs_dir)) {
      add("paths.specs_dir", "directory does not exist");
    }
  }
  if (embeds && !cfg.mock() && prov == "http") {
    if (cfg.embedding.endpoint.empty()) add("embedding.endpoint", "required for the http provider");
    if (cfg.embedding.model.empty()) add("embedding.model", "required for the http provider");
  }
  if (chats && !cfg.mock()) {
    if (cfg.chat.endpoint.empty()) add("chat.endpoint", "required unless a mock script is set");
    if (cfg.chat.model.empty()) add("chat.model", "required unless a mock script is set");
  }
  return out;
}

curve::ExecutorConfig executor_config(const AppConfig& cfg) {
  curve::ExecutorConfig ec;
  ec.smooth_bound = cfg.curve.smooth_bound;
  ec.local_bound = cfg.curve.local_bound;
  return ec;
}

}  // namespace cryptaudit::config
