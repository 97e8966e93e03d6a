#include "pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <set>

#include "errors.hpp"
#include "prompts.hpp"
#include "retrieval.hpp"

namespace cryptaudit::pipeline {

namespace fs = std::filesystem;

namespace {

std::string env_or_empty(const std::string& name) {
  if (name.empty()) return {};
  const char* v = std::getenv(name.c_str());
  return v ? v : "";
}

}  // namespace

std::unique_ptr<embedding::EmbeddingProvider> make_embedding_provider(const config::AppConfig& cfg) {
  using Mode = embedding::HashEmbeddingProvider::Mode;
  if (cfg.mock() || cfg.embedding.provider == "mock-bow") {
    return std::make_unique<embedding::HashEmbeddingProvider>(Mode::tokens);
  }
  if (cfg.embedding.provider == "mock-hash") {
    return std::make_unique<embedding::HashEmbeddingProvider>(Mode::whole_text);
  }
  if (cfg.embedding.provider != "http") {
    throw ConfigError("embedding.provider", "unknown provider '" + cfg.embedding.provider + "'");
  }
  if (cfg.embedding.endpoint.empty()) throw ConfigError("embedding.endpoint", "required for the http provider");
  if (cfg.embedding.model.empty()) throw ConfigError("embedding.model", "required for the http provider");
  return std::make_unique<embedding::HttpEmbeddingProvider>(cfg.embedding.endpoint, cfg.embedding.model,
                                                            env_or_empty(cfg.embedding.api_key_env));
}

std::shared_ptr<llm::ChatBackend> make_chat_backend(const config::AppConfig& cfg, bool echo_judge_fallback) {
  if (cfg.mock()) {
    std::shared_ptr<llm::ChatBackend> fallback;
    if (echo_judge_fallback) fallback = std::make_shared<evaluation::EchoJudgeBackend>();
    return std::make_shared<llm::ScriptedBackend>(llm::ScriptedBackend::load_script(cfg.paths.mock_script),
                                                  fallback);
  }
  if (cfg.chat.endpoint.empty()) throw ConfigError("chat.endpoint", "required unless a mock script is set");
  if (cfg.chat.model.empty()) throw ConfigError("chat.model", "required unless a mock script is set");
  return std::make_shared<llm::HttpChatBackend>(cfg.chat.endpoint, cfg.chat.model,
                                                env_or_empty(cfg.chat.api_key_env),
                                                std::chrono::seconds(cfg.chat.timeout_s));
}

std::unique_ptr<llm::Gateway> make_gateway(const config::AppConfig& cfg,
                                           std::shared_ptr<llm::ChatBackend> backend) {
  llm::RetryPolicy retry{cfg.gateway.retry_attempts, std::chrono::milliseconds(cfg.gateway.retry_backoff_ms)};
  llm::Sleeper sleeper;
  if (cfg.mock()) sleeper = [](std::chrono::milliseconds) {};
  llm::AuditSink sink;
  if (!cfg.paths.audit_log.empty()) sink = llm::file_audit_sink(cfg.paths.audit_log);
  std::string model = cfg.mock() ? backend->tag() : cfg.chat.model;
  return std::make_unique<llm::Gateway>(std::move(backend), model, retry, cfg.chat.max_output_tokens,
                                        sleeper, sink);
}

corpus::UnitExtractor llm_extractor(llm::Gateway& gateway) {
  return [&gateway](const corpus::RawDocument& doc) {
    llm::CotPrompt p{prompts::extract_units_instruction(), prompts::extract_units_example(),
                     prompts::extract_units_notice(), doc.body};
    auto raw = gateway.chat(prompts::kExtractUnitsTemplate, llm::render_cot_prompt(p));
    auto j = parse_fenced_json(raw);
    if (!j.is_object() || !j.contains("units") || !j["units"].is_array()) {
      throw StructuredOutputError("reply lacks a \"units\" array", raw);
    }
    std::vector<corpus::Section> out;
    for (const auto& u : j["units"]) {
      if (!u.is_object() || !u.contains("content") || !u["content"].is_string()) {
        throw StructuredOutputError("each unit needs string content", raw);
      }
      out.push_back({u.value("title", doc.title), u["content"].get<std::string>(), 0, 0});
    }
    return out;
  };
}

std::string to_json(const KbSummary& s) {
  ordered_json j;
  j["documents"] = s.documents;
  j["chunks"] = s.chunks;
  ordered_json per = ordered_json::object();
  for (const auto& [k, v] : s.per_source_type) per[k] = v;
  j["per_source_type"] = per;
  j["index_provider"] = s.index_provider.empty() ? ordered_json(nullptr) : ordered_json(s.index_provider);
  return j.dump(2) + "\n";
}

KbSummary kb_build(const config::AppConfig& cfg, const fs::path& sources, const fs::path& policy_file,
                   const fs::path& corpus_out, const fs::path& index_out) {
  auto docs = corpus::load_sources(sources);
  auto policy = policy_file.empty() ? corpus::ChunkPolicy::defaults()
                                    : corpus::ChunkPolicy::from_json(json::parse(read_file(policy_file)));
  bool needs_model = false;
  for (const auto& [type, entry] : policy.entries) needs_model |= entry.mode == corpus::ChunkMode::llm;

  std::unique_ptr<llm::Gateway> gateway;
  corpus::UnitExtractor extractor;
  if (needs_model) {
    gateway = make_gateway(cfg, make_chat_backend(cfg, false));
    extractor = llm_extractor(*gateway);
  }
  corpus::Corpus corpus(corpus::build_chunks(docs, policy, extractor));
  corpus::save_corpus(corpus, corpus_out);

  KbSummary s;
  s.documents = docs.size();
  s.chunks = corpus.size();
  for (const auto& c : corpus.chunks()) ++s.per_source_type[corpus::to_string(c.source_type)];
  if (!index_out.empty()) {
    auto provider = make_embedding_provider(cfg);
    auto index = embedding::build_index(corpus, *provider);
    embedding::save_index(index, index_out);
    s.index_provider = index.provider_tag();
  }
  return s;
}

KbSummary kb_index(const config::AppConfig& cfg, const fs::path& corpus_path, const fs::path& index_out) {
  auto corpus = corpus::load_corpus(corpus_path);
  auto provider = make_embedding_provider(cfg);
  auto index = embedding::build_index(corpus, *provider);
  embedding::save_index(index, index_out);
  KbSummary s;
  s.chunks = corpus.size();
  for (const auto& c : corpus.chunks()) ++s.per_source_type[corpus::to_string(c.source_type)];
  s.index_provider = index.provider_tag();
  return s;
}

std::string curve_check(const config::AppConfig& cfg, const std::string& p, const std::string& a,
                        const std::string& b) {
  auto params = curve::make_curve_params(curve::parse_integer(p), curve::parse_integer(a),
                                         curve::parse_integer(b));
  std::unique_ptr<curve::RemoteCas> cas;
  if (!cfg.mock() && cfg.curve.executor != "local") cas = curve::make_http_cas(cfg.curve.executor);
  auto res = curve::assess_curve(params, config::executor_config(cfg), cas.get());
  std::string out = "curve: y^2 = x^3 + " + params.a.str() + "x + " + params.b.str() + " over F_" +
                    params.p.str() + "\n";
  out += "executor: " + std::string(curve::to_string(res.executor)) + "\n";
  out += "order: " + (res.order ? res.order->str() : std::string("-")) + "\n";
  out += "flags:";
  if (res.flags.empty()) out += " none";
  for (auto f : res.flags) out += std::string(" ") + curve::to_string(f);
  out += "\nevidence: " + res.evidence + "\n";
  return out;
}

std::string analysis_text(const detection::DetectionReport& r) {
  if (r.findings.empty()) return "No cryptographic logic vulnerability found.";
  std::string out;
  for (const auto& f : r.findings) {
    if (!out.empty()) out += "\n\n";
    out += f.title + " (" + predetection::to_string(f.severity) + ", " + f.category + "). " + f.evidence;
    if (!f.remediation.empty()) out += " Fix: " + f.remediation;
  }
  return out;
}

OutputFormat parse_output_format(const std::string& s) {
  if (s == "machine") return OutputFormat::machine;
  if (s == "human") return OutputFormat::human;
  if (s == "both") return OutputFormat::both;
  throw Error(ErrorKind::invalid_argument, "format must be machine, human or both, got '" + s + "'");
}

// ---------------------------------------------------------------------------

std::unique_ptr<Engine> Engine::create(const config::AppConfig& cfg, const std::string& command) {
  auto violations = config::validate_config(cfg, command);
  if (!violations.empty()) {
    const auto& v = violations.front();
    throw ConfigError(v.key, v.constraint + " (value: '" + v.value + "')");
  }
  std::unique_ptr<Engine> e(new Engine());
  e->cfg_ = cfg;
  e->command_ = command;
  e->corpus_ = corpus::load_corpus(cfg.paths.corpus);
  e->index_ = std::make_unique<embedding::VectorIndex>(embedding::load_index(cfg.paths.index));
  e->embedder_ = make_embedding_provider(cfg);
  if (e->index_->provider_tag() != e->embedder_->tag()) {
    throw ProviderError(e->embedder_->tag(), "index was built with '" + e->index_->provider_tag() +
                                                 "'; rebuild the index with the configured provider");
  }
  for (std::size_t i = 0; i < e->index_->size(); ++i) {
    if (!e->corpus_.find(e->index_->id(i))) {
      throw Error(ErrorKind::inconsistent, "index entry '" + e->index_->id(i) +
                                               "' is not in the corpus; rebuild the index");
    }
  }
  if (command == "scan" || command == "eval") {
    e->gateway_ = make_gateway(cfg, make_chat_backend(cfg, command == "eval"));
    e->pre_opts_.specs = predetection::load_specs(cfg.paths.specs_dir);
    e->pre_opts_.few_shot = predetection::load_few_shot(cfg.paths.fewshot_dir);
    e->pre_opts_.curve_cfg = config::executor_config(cfg);
    if (!cfg.mock() && cfg.curve.executor != "local") {
      e->cas_ = curve::make_http_cas(cfg.curve.executor);
      e->pre_opts_.remote_cas = e->cas_.get();
    }
  }
  if (cfg.mock()) {
    e->clock_ = [] { return 0.0; };
  } else {
    e->clock_ = [] {
      return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now().time_since_epoch())
          .count();
    };
  }
  return e;
}

std::string Engine::query(const std::string& text, const retrieval::RetrievalConfig& rc) const {
  auto block = retrieval::threshold_retrieve(*index_, corpus_, text, rc, *embedder_);
  return retrieval::render_block(block);
}

detection::DetectionReport Engine::analyze(const predetection::CodeSample& sample) {
  if (!gateway_) {
    throw Error(ErrorKind::invalid_argument, "engine was created for '" + command_ + "', not 'scan'");
  }
  const double t0 = clock_();
  auto elapsed = [&](double since) { return static_cast<long long>(clock_() - since + 0.5); };
  auto stamp = [&](detection::DetectionReport& r) {
    r.meta.chat_model = gateway_->model_tag();
    r.meta.embedding_model = embedder_->tag();
    r.meta.tau = cfg_.retrieval.tau;
    r.meta.k = cfg_.retrieval.k;
  };

  predetection::PreDetectionBundle bundle;
  try {
    bundle = predetection::run_predetection(sample, pre_opts_, *gateway_);
  } catch (const StructuredOutputError& e) {
    auto r = detection::failed_report(sample, std::string("pre-detection: ") + e.what(), e.raw());
    stamp(r);
    return r;
  } catch (const Error& e) {
    auto r = detection::failed_report(sample, std::string("pre-detection: ") + e.what());
    stamp(r);
    return r;
  }
  const long long t_pre = elapsed(t0);

  const double t1 = clock_();
  retrieval::RetrievedBlock semantic, cot;
  try {
    std::tie(semantic, cot) = retrieval::dual_retrieve(*index_, corpus_, predetection::summary_signal(bundle),
                                                       predetection::cot_signal(bundle.trace), cfg_.retrieval,
                                                       *embedder_);
  } catch (const Error& e) {
    auto r = detection::failed_report(sample, std::string("retrieval: ") + e.what());
    detection::fill_predetection(r, bundle);
    stamp(r);
    return r;
  }
  const long long t_ret = elapsed(t1);

  const double t2 = clock_();
  detection::DetectOptions opts;
  opts.budget = {cfg_.detection.knowledge_budget, cfg_.detection.prompt_budget};
  opts.tau = cfg_.retrieval.tau;
  opts.k = cfg_.retrieval.k;
  opts.embedding_model = embedder_->tag();
  detection::DetectionReport report;
  try {
    report = detection::detect(sample, bundle, semantic, cot, *gateway_, opts);
  } catch (const Error& e) {
    report = detection::failed_report(sample, std::string("detection: ") + e.what());
    detection::fill_predetection(report, bundle);
    stamp(report);
    for (const auto& it : semantic.items) report.meta.retrieved_semantic.push_back({it.chunk_id, it.cos_sim});
    for (const auto& it : cot.items) report.meta.retrieved_cot.push_back({it.chunk_id, it.cos_sim});
  }
  report.meta.timings_ms = {{"predetection", t_pre},
                            {"retrieval", t_ret},
                            {"detection", elapsed(t2)},
                            {"total", elapsed(t0)}};
  if (auto problems = detection::check_report(report); !problems.empty()) {
    throw Error(ErrorKind::internal, "report for " + sample.id + " violates invariants: " + problems.front());
  }
  return report;
}

ScanResult Engine::scan(const fs::path& input, const fs::path& out_dir, OutputFormat format) {
  if (!gateway_) {
    throw Error(ErrorKind::invalid_argument, "engine was created for '" + command_ + "', not 'scan'");
  }
  auto samples = predetection::load_samples(input);
  ScanResult res;
  res.reports.resize(samples.size());
  parallel_for(samples.size(), cfg_.gateway.concurrency, [&](std::size_t i) {
    res.reports[i] = analyze(samples[i]);
    const auto& r = res.reports[i];
    if (format != OutputFormat::human) {
      write_file(out_dir / (r.sample_id + ".report.json"), detection::render_report(r, detection::Format::machine));
    }
    if (format != OutputFormat::machine) {
      write_file(out_dir / (r.sample_id + ".report.txt"), detection::render_report(r, detection::Format::human));
    }
  });

  ordered_json summary;
  summary["schema_version"] = "cryptaudit.scan/1";
  auto list = ordered_json::array();
  for (const auto& r : res.reports) {
    ++res.counts.samples;
    switch (r.verdict) {
      case detection::Verdict::vulnerable: ++res.counts.vulnerable; break;
      case detection::Verdict::likely_vulnerable: ++res.counts.likely_vulnerable; break;
      case detection::Verdict::no_issue_found: ++res.counts.no_issue_found; break;
      case detection::Verdict::analysis_failed: ++res.counts.analysis_failed; break;
    }
    list.push_back({{"sample_id", r.sample_id},
                    {"verdict", detection::to_string(r.verdict)},
                    {"findings", r.findings.size()}});
  }
  summary["counts"] = {{"samples", res.counts.samples},
                       {"vulnerable", res.counts.vulnerable},
                       {"likely_vulnerable", res.counts.likely_vulnerable},
                       {"no_issue_found", res.counts.no_issue_found},
                       {"analysis_failed", res.counts.analysis_failed}};
  summary["samples"] = list;
  res.summary_json = summary.dump(2) + "\n";
  write_file(out_dir / "scan_summary.json", res.summary_json);
  return res;
}

evaluation::Aggregate Engine::eval(const fs::path& cases_path, const fs::path& out_path,
                                   const std::string& pipeline) {
  if (command_ != "eval") {
    throw Error(ErrorKind::invalid_argument, "engine was created for '" + command_ + "', not 'eval'");
  }
  auto cases = evaluation::load_cases(cases_path);
  evaluation::Pipeline run;
  if (pipeline == "echo") {
    run = [](const evaluation::BenchmarkCase& c) { return c.reference_analysis; };
  } else if (pipeline == "full") {
    run = [this](const evaluation::BenchmarkCase& c) {
      auto report = analyze(c.sample);
      if (report.verdict == detection::Verdict::analysis_failed) {
        throw Error(ErrorKind::structured_output, "analysis_failed: " + report.diagnostic);
      }
      return analysis_text(report);
    };
  } else {
    throw Error(ErrorKind::invalid_argument, "pipeline must be full or echo, got '" + pipeline + "'");
  }
  auto agg = evaluation::run_benchmark(cases, run, {*gateway_, *embedder_}, cfg_.gateway.concurrency);
  if (!out_path.empty()) {
    write_file(out_path, evaluation::render_aggregate_json(agg));
    auto table_path = out_path;
    table_path.replace_extension(".txt");
    write_file(table_path, evaluation::render_table(agg));
  }
  return agg;
}

}  // namespace cryptaudit::pipeline
