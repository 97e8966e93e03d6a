#include "cryptaudit/cryptaudit.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "config.hpp"
#include "errors.hpp"
#include "pipeline.hpp"

using namespace cryptaudit;

struct ca_config {
  config::AppConfig cfg = config::defaults();
};

struct ca_engine {
  std::unique_ptr<pipeline::Engine> engine;
};

namespace {

thread_local std::string g_last_error;
thread_local std::string g_last_key;

ca_status status_of(ErrorKind k) {
  switch (k) {
    case ErrorKind::invalid_argument: return CA_ERR_INVALID_ARGUMENT;
    case ErrorKind::config: return CA_ERR_CONFIG;
    case ErrorKind::io: return CA_ERR_IO;
    case ErrorKind::parse: return CA_ERR_PARSE;
    case ErrorKind::provider: return CA_ERR_PROVIDER;
    case ErrorKind::inconsistent: return CA_ERR_INCONSISTENT;
    case ErrorKind::structured_output: return CA_ERR_STRUCTURED_OUTPUT;
    case ErrorKind::unscripted_call: return CA_ERR_UNSCRIPTED_CALL;
    case ErrorKind::retries_exhausted: return CA_ERR_RETRIES_EXHAUSTED;
    case ErrorKind::budget_exceeded: return CA_ERR_BUDGET_EXCEEDED;
    case ErrorKind::internal: return CA_ERR_INTERNAL;
  }
  return CA_ERR_INTERNAL;
}

template <typename F>
ca_status guard(F&& f) {
  g_last_error.clear();
  g_last_key.clear();
  try {
    f();
    return CA_OK;
  } catch (const ConfigError& e) {
    g_last_error = e.what();
    g_last_key = e.key();
    return CA_ERR_CONFIG;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return CA_ERR_INTERNAL;
  } catch (const std::filesystem::filesystem_error& e) {
    g_last_error = e.what();
    return CA_ERR_IO;
  } catch (const nlohmann::json::exception& e) {
    g_last_error = e.what();
    return CA_ERR_PARSE;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CA_ERR_INTERNAL;
  }
}

char* dup(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void put(char** out, const std::string& s) {
  if (out) *out = dup(s);
}

void require(const void* p, const char* name) {
  if (!p) throw Error(ErrorKind::invalid_argument, std::string(name) + " must not be NULL");
}

std::string opt(const char* s) { return s ? s : ""; }

}  // namespace

extern "C" {

const char* ca_version(void) { return "0.3.0"; }

const char* ca_last_error(void) { return g_last_error.c_str(); }

const char* ca_last_error_key(void) { return g_last_key.c_str(); }

void ca_string_free(char* s) { std::free(s); }

ca_status ca_config_create(ca_config** out) {
  return guard([&] {
    require(out, "out");
    *out = new ca_config();
  });
}

void ca_config_destroy(ca_config* cfg) { delete cfg; }

ca_status ca_config_set(ca_config* cfg, const char* key, const char* value) {
  return guard([&] {
    require(cfg, "cfg");
    require(key, "key");
    require(value, "value");
    config::set(cfg->cfg, key, value);
  });
}

ca_status ca_config_get(const ca_config* cfg, const char* key, char** out_value) {
  return guard([&] {
    require(cfg, "cfg");
    require(key, "key");
    require(out_value, "out_value");
    *out_value = dup(config::get(cfg->cfg, key));
  });
}

ca_status ca_config_load_file(ca_config* cfg, const char* path) {
  return guard([&] {
    require(cfg, "cfg");
    require(path, "path");
    config::load_file(cfg->cfg, path);
  });
}

ca_status ca_config_keys(char** out_json) {
  return guard([&] {
    require(out_json, "out_json");
    *out_json = dup(json(config::keys()).dump());
  });
}

ca_status ca_config_validate(const ca_config* cfg, const char* command, char** out_violations_json) {
  return guard([&] {
    require(cfg, "cfg");
    require(out_violations_json, "out_violations_json");
    auto violations = config::validate_config(cfg->cfg, opt(command));
    auto arr = ordered_json::array();
    for (const auto& v : violations) {
      arr.push_back({{"key", v.key}, {"value", v.value}, {"constraint", v.constraint}});
    }
    *out_violations_json = dup(arr.dump());
  });
}

ca_status ca_kb_build(const ca_config* cfg, const char* sources_dir, const char* policy_path,
                      const char* corpus_out, const char* index_out, char** out_summary_json) {
  return guard([&] {
    require(cfg, "cfg");
    require(sources_dir, "sources_dir");
    require(corpus_out, "corpus_out");
    auto s = pipeline::kb_build(cfg->cfg, sources_dir, opt(policy_path), corpus_out, opt(index_out));
    put(out_summary_json, pipeline::to_json(s));
  });
}

ca_status ca_kb_index(const ca_config* cfg, const char* corpus_path, const char* index_out,
                      char** out_summary_json) {
  return guard([&] {
    require(cfg, "cfg");
    require(corpus_path, "corpus_path");
    require(index_out, "index_out");
    auto s = pipeline::kb_index(cfg->cfg, corpus_path, index_out);
    put(out_summary_json, pipeline::to_json(s));
  });
}

ca_status ca_engine_create(const ca_config* cfg, const char* command, ca_engine** out) {
  return guard([&] {
    require(cfg, "cfg");
    require(command, "command");
    require(out, "out");
    auto e = std::make_unique<ca_engine>();
    e->engine = pipeline::Engine::create(cfg->cfg, command);
    *out = e.release();
  });
}

void ca_engine_destroy(ca_engine* engine) { delete engine; }

ca_status ca_engine_query(ca_engine* engine, const char* text, char** out_block) {
  return guard([&] {
    require(engine, "engine");
    require(text, "text");
    require(out_block, "out_block");
    if (!*text) throw Error(ErrorKind::invalid_argument, "query text must not be empty");
    *out_block = dup(engine->engine->query(text, engine->engine->config().retrieval));
  });
}

ca_status ca_engine_scan(ca_engine* engine, const char* input, const char* out_dir, const char* format,
                         ca_scan_counts* out_counts, char** out_summary_json) {
  return guard([&] {
    require(engine, "engine");
    require(input, "input");
    require(out_dir, "out_dir");
    auto fmt = pipeline::parse_output_format(format ? format : "machine");
    auto res = engine->engine->scan(input, out_dir, fmt);
    if (out_counts) {
      *out_counts = {res.counts.samples, res.counts.vulnerable, res.counts.likely_vulnerable,
                     res.counts.no_issue_found, res.counts.analysis_failed};
    }
    put(out_summary_json, res.summary_json);
  });
}

ca_status ca_engine_eval(ca_engine* engine, const char* cases_path, const char* out_path, const char* pipeline,
                         char** out_table) {
  return guard([&] {
    require(engine, "engine");
    require(cases_path, "cases_path");
    auto agg = engine->engine->eval(cases_path, opt(out_path), pipeline ? pipeline : "full");
    put(out_table, evaluation::render_table(agg));
  });
}

ca_status ca_curve_check(const ca_config* cfg, const char* p, const char* a, const char* b, char** out_text) {
  return guard([&] {
    require(cfg, "cfg");
    require(p, "p");
    require(a, "a");
    require(b, "b");
    require(out_text, "out_text");
    *out_text = dup(pipeline::curve_check(cfg->cfg, p, a, b));
  });
}

}  // extern "C"
