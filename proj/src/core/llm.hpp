#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "util.hpp"

namespace cryptaudit::llm {

struct ChatRequest {
  std::string template_id;
  std::string rendered_prompt;
  std::string model_tag;
  double temperature = 0.0;
  std::size_t max_output = 2048;
};

struct ChatResponse {
  std::string text;
  std::string finish_reason = "stop";
  std::optional<long> prompt_tokens;
  std::optional<long> completion_tokens;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string tag() const = 0;
  // Throws ProviderError; transient() marks failures worth retrying.
  virtual ChatResponse complete(const ChatRequest& req) = 0;
};

// OpenAI-style chat completions: one user message in, first choice out.
class HttpChatBackend final : public ChatBackend {
 public:
  HttpChatBackend(std::string endpoint, std::string model, std::string api_key,
                  std::chrono::seconds timeout = std::chrono::seconds(120));
  std::string tag() const override { return "http:" + model_; }
  ChatResponse complete(const ChatRequest& req) override;

 private:
  std::string endpoint_;
  std::string model_;
  std::string api_key_;
  std::chrono::seconds timeout_;
};

std::string prompt_hash(const std::string& rendered_prompt);

// Replays a script of canned replies. Lookup order: exact
// (template_id, prompt_hash), then the first entry for template_id whose
// `match` substrings all occur in the prompt, then the fallback backend.
// With no fallback an unknown call raises unscripted_call.
class ScriptedBackend final : public ChatBackend {
 public:
  struct Entry {
    std::string template_id;
    std::string prompt_hash;          // empty when selected by match
    std::vector<std::string> match;   // substrings that must all occur
    std::string reply;
  };

  explicit ScriptedBackend(std::vector<Entry> entries,
                           std::shared_ptr<ChatBackend> fallback = nullptr);

  // JSONL: {"template_id", "prompt_hash" | "match", "reply"}.
  static std::vector<Entry> parse_script(std::string_view text);
  static std::vector<Entry> load_script(const std::filesystem::path& path);

  std::string tag() const override { return "mock-script"; }
  ChatResponse complete(const ChatRequest& req) override;

 private:
  std::vector<Entry> entries_;
  std::shared_ptr<ChatBackend> fallback_;
};

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds base_backoff{1000};  // doubles per retry
};

struct AuditRecord {
  std::string template_id;
  std::string model_tag;
  std::string prompt_hash;
  int attempts = 0;
  double duration_ms = 0.0;
  std::optional<long> prompt_tokens;
  std::optional<long> completion_tokens;
  std::string status;  // "ok" or the error kind
  std::string prompt;
  std::string reply;
};

json to_json(const AuditRecord& rec);

using Sleeper = std::function<void(std::chrono::milliseconds)>;
using AuditSink = std::function<void(const AuditRecord&)>;

// Appends audit records as JSON lines to a file. Thread-safe.
AuditSink file_audit_sink(const std::filesystem::path& path);

class Gateway {
 public:
  Gateway(std::shared_ptr<ChatBackend> backend, std::string model_tag, RetryPolicy retry = {},
          std::size_t max_output = 2048, Sleeper sleeper = {}, AuditSink sink = {});

  // Sends a prompt under the given template id and returns the reply text.
  std::string chat(const std::string& template_id, const std::string& prompt);
  ChatResponse chat(const ChatRequest& req);

  const std::string& model_tag() const noexcept { return model_tag_; }
  std::string backend_tag() const { return backend_->tag(); }
  std::vector<AuditRecord> audit_log() const;

 private:
  std::shared_ptr<ChatBackend> backend_;
  std::string model_tag_;
  RetryPolicy retry_;
  std::size_t max_output_;
  Sleeper sleeper_;
  AuditSink sink_;
  mutable std::mutex mu_;
  std::vector<AuditRecord> log_;
};

struct CotPrompt {
  std::string instruction;  // principle and reasoning steps
  std::string example;      // worked code walkthrough
  std::string notice;       // output format and reminders
  std::string target_code;
};

// Labeled sections in fixed order: Instruction, Example, Notice, Target code.
std::string render_cot_prompt(const CotPrompt& p);

}  // namespace cryptaudit::llm
