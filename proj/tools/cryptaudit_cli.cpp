// Command-line front end. Talks to the library only through the C API.
#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <utility>

#include "cryptaudit/cryptaudit.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVulnerable = 1;
constexpr int kExitError = 2;

struct CaString {
  char* p = nullptr;
  CaString() = default;
  CaString(const CaString&) = delete;
  CaString& operator=(const CaString&) = delete;
  ~CaString() { ca_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

struct Config {
  ca_config* cfg = nullptr;
  Config() {
    if (ca_config_create(&cfg) != CA_OK) throw std::bad_alloc();
  }
  Config(const Config&) = delete;
  Config& operator=(const Config&) = delete;
  ~Config() { ca_config_destroy(cfg); }
};

struct Engine {
  ca_engine* e = nullptr;
  Engine() = default;
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;
  ~Engine() { ca_engine_destroy(e); }
};

int fail(ca_status st) {
  std::string key = ca_last_error_key();
  std::cerr << "cryptaudit: ";
  if (st == CA_ERR_CONFIG && !key.empty() && std::string(ca_last_error()).rfind(key, 0) != 0) {
    std::cerr << key << ": ";
  }
  std::cerr << ca_last_error() << "\n";
  return kExitError;
}

// Option values shared by subcommands; unset ones keep the config file value.
struct Options {
  std::string config_file;
  std::optional<std::string> corpus, index, mock, embedding, specs_dir, audit_log;
  std::optional<std::string> k, tau, concurrency, knowledge_budget;
};

int configure(Config& c, const Options& o) {
  if (!o.config_file.empty()) {
    if (auto st = ca_config_load_file(c.cfg, o.config_file.c_str()); st != CA_OK) return fail(st);
  }
  const std::pair<const char*, const std::optional<std::string>*> flags[] = {
      {"paths.corpus", &o.corpus},
      {"paths.index", &o.index},
      {"paths.mock_script", &o.mock},
      {"embedding.provider", &o.embedding},
      {"paths.specs_dir", &o.specs_dir},
      {"paths.audit_log", &o.audit_log},
      {"retrieval.k", &o.k},
      {"retrieval.tau", &o.tau},
      {"gateway.concurrency", &o.concurrency},
      {"detection.knowledge_budget", &o.knowledge_budget},
  };
  for (const auto& [key, value] : flags) {
    if (!*value) continue;
    if (auto st = ca_config_set(c.cfg, key, (*value)->c_str()); st != CA_OK) return fail(st);
  }
  return kExitOk;
}

int validate(Config& c, const char* command) {
  CaString out;
  if (auto st = ca_config_validate(c.cfg, command, &out.p); st != CA_OK) return fail(st);
  auto violations = nlohmann::json::parse(out.str());
  for (const auto& v : violations) {
    std::cerr << "cryptaudit: configuration error: " << v["key"].get<std::string>() << " = '"
              << v["value"].get<std::string>() << "': " << v["constraint"].get<std::string>() << "\n";
  }
  return violations.empty() ? kExitOk : kExitError;
}

int prepare(Config& c, const Options& o, const char* command) {
  if (int rc = configure(c, o)) return rc;
  return validate(c, command);
}

void add_config_flag(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config_file, "INI configuration file (flags override it)");
}

void add_retrieval_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--k", o.k, "Number of nearest neighbours per query (default 5)");
  cmd->add_option("--tau", o.tau, "Cosine similarity threshold in [-1, 1] (default 0.75)");
}

// Not marked required: a --config file may supply them.
void add_store_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--index", o.index, "Vector index file");
  cmd->add_option("--corpus", o.corpus, "Knowledge corpus (JSON Lines)");
}

int run_kb_build(const Options& o, const std::string& sources, const std::string& out,
                 const std::string& policy, const std::string& index_out) {
  Config c;
  if (int rc = prepare(c, o, index_out.empty() ? "kb-build" : "kb-index")) return rc;
  CaString summary;
  auto st = ca_kb_build(c.cfg, sources.c_str(), policy.empty() ? nullptr : policy.c_str(), out.c_str(),
                        index_out.empty() ? nullptr : index_out.c_str(), &summary.p);
  if (st != CA_OK) return fail(st);
  std::cout << summary.str();
  return kExitOk;
}

int run_kb_index(const Options& o, const std::string& corpus, const std::string& out) {
  Config c;
  if (int rc = prepare(c, o, "kb-index")) return rc;
  CaString summary;
  if (auto st = ca_kb_index(c.cfg, corpus.c_str(), out.c_str(), &summary.p); st != CA_OK) return fail(st);
  std::cout << summary.str();
  return kExitOk;
}

int run_kb_query(const Options& o, const std::string& text) {
  Config c;
  if (int rc = prepare(c, o, "kb-query")) return rc;
  Engine e;
  if (auto st = ca_engine_create(c.cfg, "kb-query", &e.e); st != CA_OK) return fail(st);
  CaString block;
  if (auto st = ca_engine_query(e.e, text.c_str(), &block.p); st != CA_OK) return fail(st);
  std::cout << block.str();
  return kExitOk;
}

int run_scan(const Options& o, const std::string& input, const std::string& out, const std::string& format) {
  Config c;
  if (int rc = prepare(c, o, "scan")) return rc;
  Engine e;
  if (auto st = ca_engine_create(c.cfg, "scan", &e.e); st != CA_OK) return fail(st);
  ca_scan_counts counts{};
  CaString summary;
  auto st = ca_engine_scan(e.e, input.c_str(), out.c_str(), format.c_str(), &counts, &summary.p);
  if (st != CA_OK) return fail(st);
  auto doc = nlohmann::json::parse(summary.str());
  for (const auto& s : doc["samples"]) {
    std::cout << s["sample_id"].get<std::string>() << ": " << s["verdict"].get<std::string>() << " ("
              << s["findings"].get<std::size_t>() << " finding(s))\n";
  }
  std::cout << counts.samples << " sample(s): " << counts.vulnerable << " vulnerable, " << counts.likely_vulnerable
            << " likely vulnerable, " << counts.no_issue_found << " clean, " << counts.analysis_failed
            << " failed; reports in " << out << "\n";
  if (counts.samples > 0 && counts.analysis_failed == counts.samples) return kExitError;
  return counts.vulnerable > 0 ? kExitVulnerable : kExitOk;
}

int run_eval(const Options& o, const std::string& cases, const std::string& out, const std::string& pipeline) {
  Config c;
  if (int rc = prepare(c, o, "eval")) return rc;
  Engine e;
  if (auto st = ca_engine_create(c.cfg, "eval", &e.e); st != CA_OK) return fail(st);
  CaString table;
  if (auto st = ca_engine_eval(e.e, cases.c_str(), out.c_str(), pipeline.c_str(), &table.p); st != CA_OK) {
    return fail(st);
  }
  std::cout << table.str();
  return kExitOk;
}

int run_curve_check(const Options& o, const std::string& p, const std::string& a, const std::string& b) {
  Config c;
  if (int rc = prepare(c, o, "curve-check")) return rc;
  CaString text;
  if (auto st = ca_curve_check(c.cfg, p.c_str(), a.c_str(), b.c_str(), &text.p); st != CA_OK) return fail(st);
  std::cout << text.str();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cryptaudit: audits source code for cryptographic logic vulnerabilities"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ca_version());

  Options o;
  std::string sources, corpus_in, out, policy, index_out, text, input, format = "machine", cases, pipeline = "full";
  std::string p, a, b;

  auto* kb = app.add_subcommand("kb", "Build, index and query the knowledge corpus");
  kb->require_subcommand(1);

  auto* build = kb->add_subcommand("build", "Chunk source documents into a corpus");
  build->add_option("--sources", sources, "Directory with one subdirectory per source type")->required();
  build->add_option("--out", out, "Corpus file to write (JSON Lines)")->required();
  build->add_option("--policy", policy, "Chunking policy file (JSON)");
  build->add_option("--index", index_out, "Also embed the corpus and write this index file");
  build->add_option("--embedding", o.embedding, "Embedding provider: http, mock-hash or mock-bow");
  build->add_option("--mock", o.mock, "Scripted chat replies for llm chunking (JSON Lines)");
  add_config_flag(build, o);

  auto* index = kb->add_subcommand("index", "Embed an existing corpus into an index");
  index->add_option("--corpus", corpus_in, "Corpus file")->required();
  index->add_option("--out", out, "Index file to write")->required();
  index->add_option("--embedding", o.embedding, "Embedding provider: http, mock-hash or mock-bow");
  add_config_flag(index, o);

  auto* query = kb->add_subcommand("query", "Print the knowledge block retrieved for a text");
  add_store_flags(query, o);
  query->add_option("--text", text, "Query text")->required();
  add_retrieval_flags(query, o);
  query->add_option("--embedding", o.embedding, "Embedding provider: http, mock-hash or mock-bow");
  add_config_flag(query, o);

  auto* scan = app.add_subcommand("scan", "Analyze a source file or every file in a directory");
  scan->add_option("--input", input, "Source file or directory")->required();
  add_store_flags(scan, o);
  scan->add_option("--out", out, "Directory for reports")->required();
  add_retrieval_flags(scan, o);
  scan->add_option("--format", format, "Report format: machine, human or both")
      ->check(CLI::IsMember({"machine", "human", "both"}));
  scan->add_option("--mock", o.mock, "Scripted chat replies (JSON Lines); also selects offline embeddings");
  scan->add_option("--specs", o.specs_dir, "Directory of algorithm checklists");
  scan->add_option("--concurrency", o.concurrency, "Samples analyzed in parallel (default 4)");
  scan->add_option("--knowledge-budget", o.knowledge_budget, "Characters of retrieved knowledge per prompt");
  scan->add_option("--audit-log", o.audit_log, "Append every model call to this JSON Lines file");
  add_config_flag(scan, o);

  auto* eval = app.add_subcommand("eval", "Score a pipeline on benchmark cases");
  eval->add_option("--cases", cases, "Benchmark cases (JSON Lines)")->required();
  add_store_flags(eval, o);
  eval->add_option("--out", out, "Aggregate JSON to write (table goes next to it as .txt)")->required();
  eval->add_option("--pipeline", pipeline, "full (scan pipeline) or echo (reference copied)")
      ->check(CLI::IsMember({"full", "echo"}));
  add_retrieval_flags(eval, o);
  eval->add_option("--mock", o.mock, "Scripted chat replies; unscripted judge calls use the echo judge");
  eval->add_option("--concurrency", o.concurrency, "Cases scored in parallel (default 4)");
  add_config_flag(eval, o);

  auto* curve = app.add_subcommand("curve-check", "Assess y^2 = x^3 + ax + b over F_p");
  curve->add_option("--p", p, "Prime modulus (decimal or 0x hex)")->required();
  curve->add_option("--a", a, "Coefficient a")->required();
  curve->add_option("--b", b, "Coefficient b")->required();
  add_config_flag(curve, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  try {
    if (build->parsed()) return run_kb_build(o, sources, out, policy, index_out);
    if (index->parsed()) return run_kb_index(o, corpus_in, out);
    if (query->parsed()) return run_kb_query(o, text);
    if (scan->parsed()) return run_scan(o, input, out, format);
    if (eval->parsed()) return run_eval(o, cases, out, pipeline);
    if (curve->parsed()) return run_curve_check(o, p, a, b);
  } catch (const std::exception& e) {
    std::cerr << "cryptaudit: " << e.what() << "\n";
    return kExitError;
  }
  std::cerr << app.help();
  return kExitError;
}
