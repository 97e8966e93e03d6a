#include "llm.hpp"

#include <algorithm>
#include <fstream>
#include <thread>

#include "errors.hpp"
#include "http.hpp"

namespace cryptaudit::llm {

HttpChatBackend::HttpChatBackend(std::string endpoint, std::string model, std::string api_key,
                                 std::chrono::seconds timeout)
    : endpoint_(std::move(endpoint)),
      model_(std::move(model)),
      api_key_(std::move(api_key)),
      timeout_(timeout) {}

ChatResponse HttpChatBackend::complete(const ChatRequest& req) {
  json body = {
      {"model", req.model_tag.empty() ? model_ : req.model_tag},
      {"messages", json::array({{{"role", "user"}, {"content", req.rendered_prompt}}})},
      {"temperature", req.temperature},
      {"max_tokens", req.max_output},
  };
  http::Headers headers;
  if (!api_key_.empty()) headers.emplace_back("Authorization", "Bearer " + api_key_);
  auto resp = http::post(endpoint_, body.dump(), "application/json", headers, timeout_, tag());
  if (resp.status != 200) {
    throw ProviderError(tag(), "HTTP " + std::to_string(resp.status) + ": " + resp.body.substr(0, 300),
                        http::is_transient_status(resp.status));
  }
  try {
    auto reply = json::parse(resp.body);
    const auto& choice = reply.at("choices").at(0);
    ChatResponse out;
    const auto& content = choice.at("message").at("content");
    out.text = content.is_string() ? content.get<std::string>() : std::string{};
    if (choice.contains("finish_reason") && choice["finish_reason"].is_string()) {
      out.finish_reason = choice["finish_reason"];
    }
    if (reply.contains("usage") && reply["usage"].is_object()) {
      const auto& u = reply["usage"];
      if (u.contains("prompt_tokens")) out.prompt_tokens = u["prompt_tokens"].get<long>();
      if (u.contains("completion_tokens")) out.completion_tokens = u["completion_tokens"].get<long>();
    }
    return out;
  } catch (const json::exception& e) {
    throw ProviderError(tag(), std::string("malformed chat reply: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

std::string prompt_hash(const std::string& rendered_prompt) { return sha256_hex(rendered_prompt); }

ScriptedBackend::ScriptedBackend(std::vector<Entry> entries, std::shared_ptr<ChatBackend> fallback)
    : entries_(std::move(entries)), fallback_(std::move(fallback)) {}

std::vector<ScriptedBackend::Entry> ScriptedBackend::parse_script(std::string_view text) {
  std::vector<Entry> entries;
  auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    try {
      auto rec = json::parse(lines[i]);
      Entry e;
      e.template_id = rec.at("template_id").get<std::string>();
      e.reply = rec.at("reply").get<std::string>();
      if (rec.contains("prompt_hash")) e.prompt_hash = rec["prompt_hash"].get<std::string>();
      if (rec.contains("match")) {
        const auto& m = rec["match"];
        if (m.is_string()) e.match.push_back(m.get<std::string>());
        else e.match = m.get<std::vector<std::string>>();
      }
      if (e.prompt_hash.empty() && e.match.empty()) {
        throw ParseError(i + 1, "script entry needs prompt_hash or match");
      }
      entries.push_back(std::move(e));
    } catch (const json::exception& e) {
      throw ParseError(i + 1, std::string("malformed script entry: ") + e.what());
    }
  }
  return entries;
}

std::vector<ScriptedBackend::Entry> ScriptedBackend::load_script(const std::filesystem::path& path) {
  return parse_script(read_file(path));
}

ChatResponse ScriptedBackend::complete(const ChatRequest& req) {
  auto hash = prompt_hash(req.rendered_prompt);
  for (const auto& e : entries_) {
    if (e.template_id == req.template_id && !e.prompt_hash.empty() && e.prompt_hash == hash) {
      return ChatResponse{e.reply, "stop", std::nullopt, std::nullopt};
    }
  }
  for (const auto& e : entries_) {
    if (e.template_id != req.template_id || e.match.empty() || !e.prompt_hash.empty()) continue;
    bool all = std::all_of(e.match.begin(), e.match.end(), [&](const std::string& m) {
      return req.rendered_prompt.find(m) != std::string::npos;
    });
    if (all) return ChatResponse{e.reply, "stop", std::nullopt, std::nullopt};
  }
  if (fallback_) return fallback_->complete(req);
  throw Error(ErrorKind::unscripted_call,
              "unscripted call: template_id=" + req.template_id + " prompt_hash=" + hash);
}

// ---------------------------------------------------------------------------

json to_json(const AuditRecord& rec) {
  json j = {{"template_id", rec.template_id}, {"model_tag", rec.model_tag},
            {"prompt_hash", rec.prompt_hash}, {"attempts", rec.attempts},
            {"duration_ms", rec.duration_ms}, {"status", rec.status},
            {"prompt", rec.prompt},           {"reply", rec.reply}};
  j["prompt_tokens"] = rec.prompt_tokens ? json(*rec.prompt_tokens) : json(nullptr);
  j["completion_tokens"] = rec.completion_tokens ? json(*rec.completion_tokens) : json(nullptr);
  return j;
}

AuditSink file_audit_sink(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto out = std::make_shared<std::ofstream>(path, std::ios::app);
  if (!*out) throw Error(ErrorKind::io, "cannot open audit log " + path.string());
  auto mu = std::make_shared<std::mutex>();
  return [out, mu](const AuditRecord& rec) {
    std::lock_guard lock(*mu);
    *out << to_json(rec).dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
    out->flush();
  };
}

Gateway::Gateway(std::shared_ptr<ChatBackend> backend, std::string model_tag, RetryPolicy retry,
                 std::size_t max_output, Sleeper sleeper, AuditSink sink)
    : backend_(std::move(backend)),
      model_tag_(std::move(model_tag)),
      retry_(retry),
      max_output_(max_output),
      sleeper_(std::move(sleeper)),
      sink_(std::move(sink)) {
  if (!backend_) throw ConfigError("chat.endpoint", "no chat backend configured");
  if (retry_.attempts < 1) throw ConfigError("gateway.retry_attempts", "must be >= 1");
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::string Gateway::chat(const std::string& template_id, const std::string& prompt) {
  ChatRequest req;
  req.template_id = template_id;
  req.rendered_prompt = prompt;
  req.model_tag = model_tag_;
  req.max_output = max_output_;
  return chat(req).text;
}

ChatResponse Gateway::chat(const ChatRequest& req) {
  if (req.rendered_prompt.empty()) {
    throw Error(ErrorKind::invalid_argument, "empty prompt for template " + req.template_id);
  }
  AuditRecord rec;
  rec.template_id = req.template_id;
  rec.model_tag = req.model_tag;
  rec.prompt_hash = prompt_hash(req.rendered_prompt);
  rec.prompt = req.rendered_prompt;

  auto start = std::chrono::steady_clock::now();
  auto finish = [&](std::string status) {
    rec.status = std::move(status);
    rec.duration_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (sink_) sink_(rec);
    std::lock_guard lock(mu_);
    log_.push_back(rec);
  };

  std::string last_error;
  for (int attempt = 1; attempt <= retry_.attempts; ++attempt) {
    rec.attempts = attempt;
    if (attempt > 1) sleeper_(retry_.base_backoff * (1 << (attempt - 2)));
    try {
      auto resp = backend_->complete(req);
      rec.prompt_tokens = resp.prompt_tokens;
      rec.completion_tokens = resp.completion_tokens;
      rec.reply = resp.text;
      if (resp.finish_reason == "length" ||
          (resp.completion_tokens && *resp.completion_tokens > static_cast<long>(req.max_output))) {
        finish(to_string(ErrorKind::budget_exceeded));
        throw Error(ErrorKind::budget_exceeded,
                    "reply for " + req.template_id + " exceeded the output budget of " +
                        std::to_string(req.max_output) + " tokens");
      }
      finish("ok");
      return resp;
    } catch (const ProviderError& e) {
      if (!e.transient()) {
        finish(to_string(ErrorKind::provider));
        throw;
      }
      last_error = e.what();
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::budget_exceeded) finish(to_string(e.kind()));
      throw;
    }
  }
  finish(to_string(ErrorKind::retries_exhausted));
  throw Error(ErrorKind::retries_exhausted,
              req.template_id + ": giving up after " + std::to_string(retry_.attempts) +
                  " attempts: " + last_error);
}

std::vector<AuditRecord> Gateway::audit_log() const {
  std::lock_guard lock(mu_);
  return log_;
}

// ---------------------------------------------------------------------------

std::string render_cot_prompt(const CotPrompt& p) {
  auto require = [](const std::string& s, const char* name) {
    if (trim(s).empty()) {
      throw Error(ErrorKind::invalid_argument, std::string("prompt section '") + name + "' is empty");
    }
  };
  require(p.instruction, "instruction");
  require(p.example, "example");
  require(p.notice, "notice");
  require(p.target_code, "target_code");

  std::string out;
  out += "## Instruction\n" + trim(p.instruction) + "\n\n";
  out += "## Example\n" + trim(p.example) + "\n\n";
  out += "## Notice\n" + trim(p.notice) + "\n\n";
  out += "## Target code\n----- BEGIN CODE -----\n" + p.target_code;
  if (p.target_code.back() != '\n') out += '\n';
  out += "----- END CODE -----\n";
  return out;
}

}  // namespace cryptaudit::llm
