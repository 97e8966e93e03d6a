#include "detection.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "errors.hpp"
#include "prompts.hpp"

namespace cryptaudit::detection {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::vulnerable: return "vulnerable";
    case Verdict::likely_vulnerable: return "likely_vulnerable";
    case Verdict::no_issue_found: return "no_issue_found";
    case Verdict::analysis_failed: return "analysis_failed";
  }
  return "analysis_failed";
}

std::optional<Verdict> parse_verdict(const std::string& s) {
  for (auto v : {Verdict::vulnerable, Verdict::likely_vulnerable, Verdict::no_issue_found,
                 Verdict::analysis_failed}) {
    if (s == to_string(v)) return v;
  }
  return std::nullopt;
}

const std::vector<std::string>& categories() {
  static const std::vector<std::string> kCategories = {
      "signature_verification", "padding_scheme", "block_cipher_mode", "randomness_bias",
      "key_derivation",         "weak_parameters", "nonce_misuse",     "side_channel",
      "key_management",         "input_validation", "other",
  };
  return kCategories;
}

namespace {

bool at_least_medium(Severity s) {
  return s == Severity::critical || s == Severity::high || s == Severity::medium;
}

}  // namespace

Verdict derive_verdict(const std::vector<Finding>& findings) {
  if (findings.empty()) return Verdict::no_issue_found;
  bool serious = std::any_of(findings.begin(), findings.end(),
                             [](const Finding& f) { return at_least_medium(f.severity); });
  return serious ? Verdict::vulnerable : Verdict::likely_vulnerable;
}

std::vector<std::string> check_report(const DetectionReport& r) {
  std::vector<std::string> out;
  if (r.verdict == Verdict::analysis_failed) {
    if (r.diagnostic.empty()) out.push_back("analysis_failed without a diagnostic");
    if (!r.findings.empty()) out.push_back("analysis_failed with findings");
    return out;
  }
  if (r.verdict != derive_verdict(r.findings)) {
    out.push_back(std::string("verdict ") + to_string(r.verdict) + " does not follow from the findings");
  }
  std::set<std::string> retrieved;
  for (const auto& h : r.meta.retrieved_semantic) retrieved.insert(h.chunk_id);
  for (const auto& h : r.meta.retrieved_cot) retrieved.insert(h.chunk_id);
  for (const auto& f : r.findings) {
    for (const auto& c : f.knowledge_citations) {
      if (!retrieved.count(c)) out.push_back("citation '" + c + "' was not retrieved in this run");
    }
    if (std::find(categories().begin(), categories().end(), f.category) == categories().end()) {
      out.push_back("unknown category '" + f.category + "'");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct Slot {
  const retrieval::RetrievedItem* item;
  retrieval::QueryKind kind;
  bool kept = true;
};

std::string render_knowledge(const retrieval::RetrievedBlock& block, retrieval::QueryKind kind,
                             const std::vector<Slot>& slots,
                             std::map<std::string, std::pair<retrieval::QueryKind, std::size_t>>& seen) {
  std::string out = std::string("## Knowledge: ") + retrieval::to_string(kind) + "\n";
  if (block.items.empty()) return out + retrieval::render_block(block);
  bool any = false;
  for (const auto& s : slots) {
    if (s.kind != kind || !s.kept) continue;
    if (any) out += "\n";
    any = true;
    auto [it, fresh] = seen.try_emplace(s.item->chunk_id, kind, s.item->index_number);
    if (fresh) {
      out += s.item->rendered_text + "\n";
    } else {
      out += "[" + std::to_string(s.item->index_number) + "] (duplicate of " +
             retrieval::to_string(it->second.first) + " [" + std::to_string(it->second.second) +
             "], id: " + s.item->chunk_id + ")\n";
    }
  }
  if (!any) out += "(all entries omitted to fit the prompt budget)\n";
  return out;
}

}  // namespace

AssembledPrompt assemble_phase3_prompt(const predetection::CodeSample& sample,
                                       const predetection::PreDetectionBundle& bundle,
                                       const retrieval::RetrievedBlock& semantic,
                                       const retrieval::RetrievedBlock& cot,
                                       const PromptBudget& budget) {
  std::string head = "## Instruction\n" + prompts::detect_instruction() + "\n\n## Target code";
  if (sample.language_hint) head += " (" + *sample.language_hint + ")";
  head += "\n----- BEGIN CODE -----\n" + sample.source_text;
  if (!sample.source_text.empty() && sample.source_text.back() != '\n') head += "\n";
  head += "----- END CODE -----\n\n## Semantic summary\n" + bundle.summary.text + "\n\n";
  if (bundle.compliance) {
    head += "## Compliance findings\n" + predetection::render_compliance(*bundle.compliance) + "\n\n";
  }
  head += "## Reasoning trace\n" + predetection::render_trace(bundle.trace) + "\n\n";
  if (auto curve_text = predetection::render_curve(bundle); !curve_text.empty()) {
    head += "## Curve analysis\n" + curve_text + "\n\n";
  }
  std::string tail = "\n## Notice\n" + prompts::detect_notice() + "\n";

  std::vector<Slot> slots;
  for (const auto& it : semantic.items) {
    slots.push_back({&it, retrieval::QueryKind::semantic_summary});
  }
  for (const auto& it : cot.items) slots.push_back({&it, retrieval::QueryKind::cot_trace});

  AssembledPrompt out;
  if (head.size() + tail.size() > budget.total_chars) {
    out.fits = false;
    return out;
  }
  for (;;) {
    std::map<std::string, std::pair<retrieval::QueryKind, std::size_t>> seen;
    // Two statements: the shared map must see the semantic block first.
    std::string knowledge = render_knowledge(semantic, retrieval::QueryKind::semantic_summary, slots, seen);
    knowledge += "\n" + render_knowledge(cot, retrieval::QueryKind::cot_trace, slots, seen);
    bool fits = knowledge.size() <= budget.knowledge_chars &&
                head.size() + knowledge.size() + tail.size() <= budget.total_chars;
    Slot* victim = nullptr;
    if (!fits) {
      for (auto& s : slots) {
        if (s.kept && (!victim || s.item->cos_sim <= victim->item->cos_sim)) victim = &s;
      }
    }
    if (fits || !victim) {
      out.text = head + knowledge + tail;
      out.fits = fits;
      return out;
    }
    victim->kept = false;
    out.dropped.push_back(victim->item->chunk_id);
  }
}

// ---------------------------------------------------------------------------

namespace {

std::string field_text(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

std::vector<Finding> parse_findings(const std::string& raw, const std::set<std::string>& retrieved,
                                    std::vector<std::string>& warnings) {
  auto doc = parse_fenced_json(raw);
  if (!doc.is_object() || !doc.contains("findings") || !doc["findings"].is_array()) {
    throw StructuredOutputError("reply lacks a \"findings\" array", raw);
  }
  std::vector<Finding> out;
  for (const auto& f : doc["findings"]) {
    if (!f.is_object()) throw StructuredOutputError("each finding must be an object", raw);
    for (const char* key : {"title", "category", "severity", "evidence"}) {
      if (!f.contains(key)) throw StructuredOutputError(std::string("finding lacks \"") + key + "\"", raw);
    }
    Finding fd;
    fd.title = field_text(f["title"]);
    auto sev = predetection::parse_severity(field_text(f["severity"]));
    if (!sev) throw StructuredOutputError("unknown severity '" + field_text(f["severity"]) + "'", raw);
    fd.severity = *sev;
    fd.category = to_lower(trim(field_text(f["category"])));
    if (std::find(categories().begin(), categories().end(), fd.category) == categories().end()) {
      warnings.push_back("finding '" + fd.title + "': unknown category '" + fd.category +
                         "' mapped to other");
      fd.category = "other";
    }
    fd.evidence = field_text(f["evidence"]);
    fd.remediation = f.contains("remediation") ? field_text(f["remediation"]) : "";
    if (f.contains("citations")) {
      if (!f["citations"].is_array()) throw StructuredOutputError("citations must be an array", raw);
      for (const auto& c : f["citations"]) {
        auto id = field_text(c);
        if (!retrieved.count(id)) {
          warnings.push_back("finding '" + fd.title + "': dropped citation '" + id +
                             "' (not retrieved in this run)");
          continue;
        }
        if (std::find(fd.knowledge_citations.begin(), fd.knowledge_citations.end(), id) ==
            fd.knowledge_citations.end()) {
          fd.knowledge_citations.push_back(id);
        }
      }
    }
    out.push_back(std::move(fd));
  }
  return out;
}

std::vector<RetrievedRef> refs(const retrieval::RetrievedBlock& b) {
  std::vector<RetrievedRef> out;
  for (const auto& it : b.items) out.push_back({it.chunk_id, it.cos_sim});
  return out;
}

}  // namespace

void fill_predetection(DetectionReport& r, const predetection::PreDetectionBundle& b) {
  r.predetection.summary = b.summary.text;
  r.predetection.algorithms = b.summary.extracted_algorithms;
  r.predetection.compliance.clear();
  if (b.compliance) {
    for (const auto& v : b.compliance->verdicts) {
      r.predetection.compliance.emplace_back(v.check_id, predetection::to_string(v.status));
    }
  }
  r.predetection.candidate_flaws.clear();
  for (const auto& f : b.trace.candidate_flaws) r.predetection.candidate_flaws.push_back(f.label);
  r.meta.route = b.route.str();
  if (b.curve) {
    CurveMeta cm;
    cm.p = b.curve->p.str();
    cm.a = b.curve->a.str();
    cm.b = b.curve->b.str();
    if (b.curve_assessment) {
      cm.executor = curve::to_string(b.curve_assessment->executor);
      for (auto f : b.curve_assessment->flags) cm.flags.push_back(curve::to_string(f));
      if (b.curve_assessment->order) cm.order = b.curve_assessment->order->str();
      cm.evidence = b.curve_assessment->evidence;
    }
    r.meta.curve = cm;
  }
  if (!b.curve_note.empty()) r.meta.warnings.push_back(b.curve_note);
}

DetectionReport failed_report(const predetection::CodeSample& sample, const std::string& diagnostic,
                              const std::string& raw_output) {
  DetectionReport r;
  r.sample_id = sample.id;
  r.origin = sample.origin;
  r.language = sample.language_hint;
  r.verdict = Verdict::analysis_failed;
  r.diagnostic = diagnostic;
  r.raw_output = raw_output;
  return r;
}

DetectionReport detect(const predetection::CodeSample& sample,
                       const predetection::PreDetectionBundle& bundle,
                       const retrieval::RetrievedBlock& semantic,
                       const retrieval::RetrievedBlock& cot, llm::Gateway& gateway,
                       const DetectOptions& opts) {
  DetectionReport r;
  r.sample_id = sample.id;
  r.origin = sample.origin;
  r.language = sample.language_hint;
  r.meta.chat_model = gateway.model_tag();
  r.meta.embedding_model = opts.embedding_model;
  r.meta.tau = opts.tau;
  r.meta.k = opts.k;
  r.meta.retrieved_semantic = refs(semantic);
  r.meta.retrieved_cot = refs(cot);
  fill_predetection(r, bundle);

  auto prompt = assemble_phase3_prompt(sample, bundle, semantic, cot, opts.budget);
  if (!prompt.fits) {
    r.verdict = Verdict::analysis_failed;
    r.diagnostic = "the code and pre-detection context exceed the prompt budget of " +
                   std::to_string(opts.budget.total_chars) + " characters";
    return r;
  }
  for (const auto& id : prompt.dropped) {
    r.meta.warnings.push_back("knowledge entry '" + id + "' omitted to fit the prompt budget");
  }

  std::set<std::string> retrieved;
  for (const auto& h : r.meta.retrieved_semantic) retrieved.insert(h.chunk_id);
  for (const auto& h : r.meta.retrieved_cot) retrieved.insert(h.chunk_id);

  auto raw = gateway.chat(prompts::kDetectTemplate, prompt.text);
  std::vector<std::string> warnings;
  try {
    r.findings = parse_findings(raw, retrieved, warnings);
  } catch (const StructuredOutputError& first) {
    raw = gateway.chat(prompts::kDetectReformatTemplate, prompt.text + prompts::retry_note(first.what()));
    warnings.clear();
    try {
      r.findings = parse_findings(raw, retrieved, warnings);
      r.meta.warnings.push_back(std::string("first detection reply was unusable: ") + first.what());
    } catch (const StructuredOutputError& second) {
      r.verdict = Verdict::analysis_failed;
      r.diagnostic = std::string("detection reply unusable after one reformat request: ") + second.what();
      r.raw_output = second.raw();
      return r;
    }
  }
  r.meta.warnings.insert(r.meta.warnings.end(), warnings.begin(), warnings.end());
  r.verdict = derive_verdict(r.findings);
  return r;
}

// ---------------------------------------------------------------------------

namespace {

ordered_json refs_json(const std::vector<RetrievedRef>& refs) {
  auto a = ordered_json::array();
  for (const auto& h : refs) a.push_back({{"chunk_id", h.chunk_id}, {"cos_sim", h.cos_sim}});
  return a;
}

ordered_json to_machine(const DetectionReport& r) {
  ordered_json j;
  j["schema_version"] = kReportSchema;
  j["sample_id"] = r.sample_id;
  j["origin"] = r.origin;
  j["language"] = r.language ? ordered_json(*r.language) : ordered_json(nullptr);
  j["verdict"] = to_string(r.verdict);
  if (r.verdict == Verdict::analysis_failed) {
    j["diagnostic"] = r.diagnostic;
    j["raw_output"] = r.raw_output;
  }
  auto findings = ordered_json::array();
  for (const auto& f : r.findings) {
    findings.push_back({{"title", f.title},
                        {"category", f.category},
                        {"severity", predetection::to_string(f.severity)},
                        {"evidence", f.evidence},
                        {"remediation", f.remediation},
                        {"knowledge_citations", f.knowledge_citations}});
  }
  j["findings"] = findings;

  ordered_json pd;
  pd["summary"] = r.predetection.summary;
  pd["algorithms"] = r.predetection.algorithms;
  auto comp = ordered_json::array();
  for (const auto& [id, status] : r.predetection.compliance) {
    comp.push_back({{"check_id", id}, {"status", status}});
  }
  pd["compliance"] = comp;
  pd["candidate_flaws"] = r.predetection.candidate_flaws;
  j["predetection"] = pd;

  ordered_json m;
  m["chat_model"] = r.meta.chat_model;
  m["embedding_model"] = r.meta.embedding_model;
  m["tau"] = r.meta.tau;
  m["k"] = r.meta.k;
  ordered_json timings = ordered_json::object();
  for (const auto& [stage, ms] : r.meta.timings_ms) timings[stage] = ms;
  m["timings_ms"] = timings;
  m["retrieved"] = {{"semantic_summary", refs_json(r.meta.retrieved_semantic)},
                    {"cot_trace", refs_json(r.meta.retrieved_cot)}};
  m["route"] = r.meta.route;
  m["warnings"] = r.meta.warnings;
  if (r.meta.curve) {
    const auto& c = *r.meta.curve;
    m["curve"] = {{"p", c.p},
                  {"a", c.a},
                  {"b", c.b},
                  {"executor", c.executor},
                  {"flags", c.flags},
                  {"order", c.order ? ordered_json(*c.order) : ordered_json(nullptr)},
                  {"evidence", c.evidence}};
  } else {
    m["curve"] = nullptr;
  }
  j["pipeline_meta"] = m;
  return j;
}

std::string to_upper_label(Severity s) {
  std::string out = to_lower(predetection::to_string(s));
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out + "\n";
}

std::string wrap(const std::string& label, const std::string& text) {
  std::string out;
  auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    out += (i == 0 ? "     " + label + ": " : "     " + std::string(label.size() + 2, ' ')) + lines[i] + "\n";
  }
  return out;
}

std::string to_human(const DetectionReport& r) {
  std::string out = "Sample: " + r.sample_id;
  if (r.language) out += " (" + *r.language + ")";
  out += "\nVerdict: " + std::string(to_string(r.verdict)) + "\n";
  if (!r.meta.route.empty()) out += "Route: " + r.meta.route + "\n";
  out += "Knowledge: " + std::to_string(r.meta.retrieved_semantic.size()) + " summary hit(s), " +
         std::to_string(r.meta.retrieved_cot.size()) + " reasoning hit(s) at tau " +
         format_fixed(r.meta.tau, 2) + "\n";
  if (r.meta.curve) {
    out += "Curve: p = " + r.meta.curve->p;
    if (!r.meta.curve->flags.empty()) {
      out += ", flags:";
      for (const auto& f : r.meta.curve->flags) out += " " + f;
    }
    out += "\n";
  }
  out += "\n";
  if (r.verdict == Verdict::analysis_failed) {
    out += "Analysis failed: " + r.diagnostic + "\n";
  } else if (r.findings.empty()) {
    out += "No issues found.\n";
  } else {
    std::size_t n = 0;
    for (auto sev : {Severity::critical, Severity::high, Severity::medium, Severity::low, Severity::info}) {
      bool header = false;
      for (const auto& f : r.findings) {
        if (f.severity != sev) continue;
        if (!header) {
          out += to_upper_label(sev);
          header = true;
        }
        out += "  " + std::to_string(++n) + ". " + f.title + " [" + f.category + "]\n";
        out += wrap("Evidence", f.evidence);
        if (!f.remediation.empty()) out += wrap("Fix", f.remediation);
        if (!f.knowledge_citations.empty()) {
          std::string cites;
          for (const auto& c : f.knowledge_citations) cites += (cites.empty() ? "" : ", ") + c;
          out += wrap("Sources", cites);
        }
      }
      if (header) out += "\n";
    }
  }
  if (!r.meta.warnings.empty()) {
    if (out.back() != '\n' || out.size() < 2 || out[out.size() - 2] != '\n') out += "\n";
    out += "Warnings:\n";
    for (const auto& w : r.meta.warnings) out += "  - " + w + "\n";
  }
  return out;
}

}  // namespace

std::string render_report(const DetectionReport& report, Format format) {
  if (format == Format::machine) return to_machine(report).dump(2) + "\n";
  return to_human(report);
}

// ---------------------------------------------------------------------------

namespace {

const ordered_json& need(const ordered_json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ParseError(0, std::string("report lacks \"") + key + "\"");
  }
  return obj.at(key);
}

std::vector<RetrievedRef> parse_refs(const ordered_json& a) {
  std::vector<RetrievedRef> out;
  for (const auto& h : a) out.push_back({need(h, "chunk_id").get<std::string>(), need(h, "cos_sim").get<double>()});
  return out;
}

}  // namespace

DetectionReport parse_report(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(0, std::string("report is not JSON: ") + e.what());
  }
  if (need(j, "schema_version") != kReportSchema) {
    throw ParseError(0, "unsupported schema_version " + j["schema_version"].dump());
  }
  DetectionReport r;
  try {
    r.sample_id = need(j, "sample_id").get<std::string>();
    r.origin = need(j, "origin").get<std::string>();
    if (!need(j, "language").is_null()) r.language = j["language"].get<std::string>();
    auto verdict = parse_verdict(need(j, "verdict").get<std::string>());
    if (!verdict) throw ParseError(0, "unknown verdict " + j["verdict"].dump());
    r.verdict = *verdict;
    if (r.verdict == Verdict::analysis_failed) {
      r.diagnostic = need(j, "diagnostic").get<std::string>();
      r.raw_output = need(j, "raw_output").get<std::string>();
    }
    for (const auto& f : need(j, "findings")) {
      Finding fd;
      fd.title = need(f, "title").get<std::string>();
      fd.category = need(f, "category").get<std::string>();
      auto sev = predetection::parse_severity(need(f, "severity").get<std::string>());
      if (!sev) throw ParseError(0, "unknown severity " + f["severity"].dump());
      fd.severity = *sev;
      fd.evidence = need(f, "evidence").get<std::string>();
      fd.remediation = need(f, "remediation").get<std::string>();
      fd.knowledge_citations = need(f, "knowledge_citations").get<std::vector<std::string>>();
      r.findings.push_back(std::move(fd));
    }
    const auto& pd = need(j, "predetection");
    r.predetection.summary = need(pd, "summary").get<std::string>();
    r.predetection.algorithms = need(pd, "algorithms").get<std::vector<std::string>>();
    for (const auto& c : need(pd, "compliance")) {
      r.predetection.compliance.emplace_back(need(c, "check_id").get<std::string>(),
                                             need(c, "status").get<std::string>());
    }
    r.predetection.candidate_flaws = need(pd, "candidate_flaws").get<std::vector<std::string>>();

    const auto& m = need(j, "pipeline_meta");
    r.meta.chat_model = need(m, "chat_model").get<std::string>();
    r.meta.embedding_model = need(m, "embedding_model").get<std::string>();
    r.meta.tau = need(m, "tau").get<double>();
    r.meta.k = need(m, "k").get<std::size_t>();
    for (const auto& [stage, ms] : need(m, "timings_ms").items()) r.meta.timings_ms.emplace_back(stage, ms.get<long long>());
    const auto& ret = need(m, "retrieved");
    r.meta.retrieved_semantic = parse_refs(need(ret, "semantic_summary"));
    r.meta.retrieved_cot = parse_refs(need(ret, "cot_trace"));
    r.meta.route = need(m, "route").get<std::string>();
    r.meta.warnings = need(m, "warnings").get<std::vector<std::string>>();
    if (!need(m, "curve").is_null()) {
      const auto& c = m["curve"];
      CurveMeta cm;
      cm.p = need(c, "p").get<std::string>();
      cm.a = need(c, "a").get<std::string>();
      cm.b = need(c, "b").get<std::string>();
      cm.executor = need(c, "executor").get<std::string>();
      cm.flags = need(c, "flags").get<std::vector<std::string>>();
      if (!need(c, "order").is_null()) cm.order = c["order"].get<std::string>();
      cm.evidence = need(c, "evidence").get<std::string>();
      r.meta.curve = cm;
    }
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("malformed report: ") + e.what());
  }
  return r;
}

}  // namespace cryptaudit::detection
