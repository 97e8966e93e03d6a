#include "predetection.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "errors.hpp"
#include "prompts.hpp"

namespace cryptaudit::predetection {

namespace fs = std::filesystem;

std::optional<std::string> language_from_extension(const fs::path& path) {
  static const std::map<std::string, std::string> kByExt = {
      {".c", "c"},         {".h", "c"},         {".cc", "cpp"},     {".cpp", "cpp"},
      {".hpp", "cpp"},     {".py", "python"},   {".js", "javascript"}, {".mjs", "javascript"},
      {".ts", "typescript"}, {".go", "go"},     {".java", "java"},  {".rs", "rust"},
      {".nim", "nim"},     {".rb", "ruby"},     {".php", "php"},    {".cs", "csharp"},
      {".sol", "solidity"}, {".kt", "kotlin"},  {".swift", "swift"},
  };
  auto it = kByExt.find(to_lower(path.extension().string()));
  if (it == kByExt.end()) return std::nullopt;
  return it->second;
}

std::vector<CodeSample> load_samples(const fs::path& input) {
  std::vector<fs::path> files;
  if (fs::is_regular_file(input)) {
    files.push_back(input);
  } else if (fs::is_directory(input)) {
    for (const auto& e : fs::recursive_directory_iterator(input)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    throw Error(ErrorKind::io, "input not found: " + input.string());
  }
  std::vector<CodeSample> samples;
  std::set<std::string> seen;
  for (const auto& f : files) {
    CodeSample s;
    s.id = f.filename().string();
    if (!seen.insert(s.id).second) {
      throw Error(ErrorKind::invalid_argument, "two input files are named " + s.id);
    }
    s.language_hint = language_from_extension(f);
    s.source_text = read_file(f);
    s.origin = fs::is_directory(input) ? fs::relative(f, input).generic_string()
                                       : f.filename().string();
    if (trim(s.source_text).empty()) {
      throw Error(ErrorKind::invalid_argument, "input file is empty: " + f.string());
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

// ---------------------------------------------------------------------------

std::string normalize_algorithm(const std::string& name) {
  static const std::map<std::string, std::string> kAliases = {
      {"oaep", "rsa-oaep"},
      {"rsaes-oaep", "rsa-oaep"},
      {"rsa-oaep-sha256", "rsa-oaep"},
      {"pkcs1v15", "rsa-pkcs1v15"},
      {"pkcs1-v1.5", "rsa-pkcs1v15"},
      {"rsa-pkcs1-v1.5", "rsa-pkcs1v15"},
      {"rsa-pkcs1-v1-5", "rsa-pkcs1v15"},
      {"rsaes-pkcs1-v1-5", "rsa-pkcs1v15"},
      {"rsa", "rsa-textbook"},
      {"textbook-rsa", "rsa-textbook"},
      {"raw-rsa", "rsa-textbook"},
      {"rsa-raw", "rsa-textbook"},
      {"rsa-nopadding", "rsa-textbook"},
      {"ecdsa-p256", "ecdsa"},
      {"ecdsa-p-256", "ecdsa"},
      {"ecdsa-secp256k1", "ecdsa"},
      {"ecdh-p256", "ecdh"},
      {"aes-128-gcm", "aes-gcm"},
      {"aes-256-gcm", "aes-gcm"},
      {"aesgcm", "aes-gcm"},
      {"aes-128-ecb", "aes-ecb"},
      {"aes-256-ecb", "aes-ecb"},
      {"aes-128-cbc", "aes-cbc"},
      {"aes-256-cbc", "aes-cbc"},
      {"pbkdf2", "pbkdf2-hmac-sha256"},
      {"pbkdf2-sha256", "pbkdf2-hmac-sha256"},
      {"hmac", "hmac-sha256"},
      {"dh", "ffdh"},
      {"diffie-hellman", "ffdh"},
      {"random-range", "drbg-uniform-int"},
      {"uniform-random-int", "drbg-uniform-int"},
      {"custom-curve", "ec-custom"},
      {"elliptic-curve", "ec-custom"},
  };
  static const std::set<std::string> kCanonical = {
      "rsa-oaep", "rsa-pkcs1v15", "rsa-textbook",       "ecdsa",       "ecdh",
      "ec-custom", "aes-gcm",     "aes-cbc",            "aes-ecb",     "aes-ctr",
      "pbkdf2-hmac-sha256",       "hmac-sha256",        "ffdh",        "drbg-uniform-int",
      "chacha20-poly1305",        "sha256",             "md5",
  };
  std::string key = to_lower(trim(name));
  std::replace(key.begin(), key.end(), '_', '-');
  std::replace(key.begin(), key.end(), ' ', '-');
  if (kCanonical.count(key)) return key;
  if (auto it = kAliases.find(key); it != kAliases.end()) return it->second;
  return name;
}

const char* to_string(Severity s) {
  switch (s) {
    case Severity::critical: return "critical";
    case Severity::high: return "high";
    case Severity::medium: return "medium";
    case Severity::low: return "low";
    case Severity::info: return "info";
  }
  return "info";
}

std::optional<Severity> parse_severity(const std::string& s) {
  auto v = to_lower(trim(s));
  for (auto sev : {Severity::critical, Severity::high, Severity::medium, Severity::low, Severity::info}) {
    if (v == to_string(sev)) return sev;
  }
  return std::nullopt;
}

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::violation: return "violation";
    case CheckStatus::indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

const char* to_string(Confidence c) {
  switch (c) {
    case Confidence::low: return "low";
    case Confidence::medium: return "medium";
    case Confidence::high: return "high";
  }
  return "low";
}

std::string Route::str() const {
  return kind == Kind::compliance ? "compliance:" + algorithm_id : "cot_only";
}

AlgorithmSpec parse_algorithm_spec(const json& doc) {
  AlgorithmSpec spec;
  try {
    spec.algorithm_id = doc.at("algorithm_id").get<std::string>();
    spec.title = doc.value("title", spec.algorithm_id);
    spec.source = doc.value("source", std::string{});
    if (doc.contains("applies_to")) {
      for (const auto& a : doc["applies_to"]) spec.applies_to.push_back(a.get<std::string>());
    }
    std::set<std::string> ids;
    for (const auto& item : doc.at("checklist")) {
      ChecklistItem ci;
      ci.check_id = item.at("check_id").get<std::string>();
      ci.requirement = item.at("requirement").get<std::string>();
      auto sev = parse_severity(item.value("severity", std::string("medium")));
      if (!sev) throw Error(ErrorKind::parse, "unknown severity in " + ci.check_id);
      ci.severity = *sev;
      if (!ids.insert(ci.check_id).second) {
        throw Error(ErrorKind::parse, "duplicate check_id '" + ci.check_id + "'");
      }
      spec.checklist.push_back(std::move(ci));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("algorithm spec: ") + e.what());
  }
  if (spec.checklist.empty()) {
    throw Error(ErrorKind::parse, "algorithm spec '" + spec.algorithm_id + "' has an empty checklist");
  }
  return spec;
}

std::vector<AlgorithmSpec> load_specs(const fs::path& dir) {
  std::vector<AlgorithmSpec> specs;
  if (dir.empty()) return specs;
  if (!fs::is_directory(dir)) throw Error(ErrorKind::io, "specs directory not found: " + dir.string());
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() != ".json") continue;
    try {
      specs.push_back(parse_algorithm_spec(json::parse(read_file(e.path()))));
    } catch (const json::parse_error& ex) {
      throw Error(ErrorKind::parse, e.path().string() + ": " + ex.what());
    } catch (const Error& ex) {
      throw Error(ex.kind(), e.path().string() + ": " + ex.what());
    }
  }
  std::sort(specs.begin(), specs.end(),
            [](const auto& a, const auto& b) { return a.algorithm_id < b.algorithm_id; });
  for (std::size_t i = 1; i < specs.size(); ++i) {
    if (specs[i].algorithm_id == specs[i - 1].algorithm_id) {
      throw Error(ErrorKind::parse, "two specs define " + specs[i].algorithm_id);
    }
  }
  return specs;
}

// ---------------------------------------------------------------------------

namespace {

std::string as_text(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

std::string language_line(const CodeSample& sample) {
  return sample.language_hint ? "\nLanguage of the target code: " + *sample.language_hint + "." : "";
}

const json& require_field(const json& obj, const char* name, const std::string& raw) {
  if (!obj.is_object() || !obj.contains(name)) {
    throw StructuredOutputError(std::string("reply lacks field '") + name + "'", raw);
  }
  return obj.at(name);
}

}  // namespace

SemanticSummary summarize(const CodeSample& sample, llm::Gateway& gateway) {
  llm::CotPrompt p{prompts::summary_instruction() + language_line(sample), prompts::summary_example(),
                   prompts::summary_notice(), sample.source_text};
  auto raw = gateway.chat(prompts::kSummaryTemplate, llm::render_cot_prompt(p));
  auto doc = parse_fenced_json(raw);
  SemanticSummary out;
  const auto& text = require_field(doc, "summary", raw);
  if (!text.is_string() || trim(text.get<std::string>()).empty()) {
    throw StructuredOutputError("summary must be a non-empty string", raw);
  }
  out.text = text.get<std::string>();
  if (doc.contains("algorithms")) {
    if (!doc["algorithms"].is_array()) throw StructuredOutputError("algorithms must be an array", raw);
    for (const auto& a : doc["algorithms"]) out.extracted_algorithms.push_back(normalize_algorithm(as_text(a)));
  }
  if (doc.contains("parameters")) {
    if (!doc["parameters"].is_array()) throw StructuredOutputError("parameters must be an array", raw);
    for (const auto& prm : doc["parameters"]) {
      if (!prm.is_object() || !prm.contains("name")) {
        throw StructuredOutputError("each parameter needs a name", raw);
      }
      out.parameters.push_back({as_text(prm["name"]), prm.contains("value") ? as_text(prm["value"]) : "",
                                prm.contains("role") ? as_text(prm["role"]) : ""});
    }
  }
  return out;
}

Route identify_route(const SemanticSummary& summary, const std::vector<AlgorithmSpec>& specs) {
  for (const auto& alg : summary.extracted_algorithms) {
    for (const auto& spec : specs) {
      if (spec.algorithm_id == alg ||
          std::find(spec.applies_to.begin(), spec.applies_to.end(), alg) != spec.applies_to.end()) {
        return {Route::Kind::compliance, spec.algorithm_id};
      }
    }
  }
  return {};
}

ComplianceFindings verify_compliance(const CodeSample& sample, const AlgorithmSpec& spec,
                                     llm::Gateway& gateway) {
  std::string instruction = prompts::compliance_instruction() + language_line(sample);
  instruction += "\n\nReference checklist for " + spec.title + " (" + spec.algorithm_id + ")";
  if (!spec.source.empty()) instruction += ", derived from " + spec.source;
  instruction += ":";
  for (const auto& item : spec.checklist) {
    instruction += "\n- [" + item.check_id + "] (" + to_string(item.severity) + ") " + item.requirement;
  }
  llm::CotPrompt p{instruction, prompts::compliance_example(), prompts::compliance_notice(),
                   sample.source_text};
  auto raw = gateway.chat(prompts::kComplianceTemplate, llm::render_cot_prompt(p));
  auto doc = parse_fenced_json(raw);
  const auto& verdicts = require_field(doc, "verdicts", raw);
  if (!verdicts.is_array()) throw StructuredOutputError("verdicts must be an array", raw);

  std::map<std::string, CheckVerdict> by_id;
  for (const auto& v : verdicts) {
    CheckVerdict cv;
    if (!v.is_object() || !v.contains("check_id") || !v.contains("status")) {
      throw StructuredOutputError("each verdict needs check_id and status", raw);
    }
    cv.check_id = as_text(v["check_id"]);
    auto status = to_lower(as_text(v["status"]));
    if (status == "pass") cv.status = CheckStatus::pass;
    else if (status == "violation") cv.status = CheckStatus::violation;
    else if (status == "indeterminate") cv.status = CheckStatus::indeterminate;
    else throw StructuredOutputError("unknown status '" + status + "' for " + cv.check_id, raw);
    cv.evidence = v.contains("evidence") ? as_text(v["evidence"]) : "";
    bool known = std::any_of(spec.checklist.begin(), spec.checklist.end(),
                             [&](const ChecklistItem& c) { return c.check_id == cv.check_id; });
    if (!known) throw StructuredOutputError("verdict for unknown check '" + cv.check_id + "'", raw);
    if (!by_id.emplace(cv.check_id, cv).second) {
      throw StructuredOutputError("check '" + cv.check_id + "' answered twice", raw);
    }
  }
  ComplianceFindings out;
  out.algorithm_id = spec.algorithm_id;
  for (const auto& item : spec.checklist) {
    auto it = by_id.find(item.check_id);
    if (it == by_id.end()) {
      throw StructuredOutputError("check '" + item.check_id + "' was not answered", raw);
    }
    out.verdicts.push_back(it->second);
  }
  return out;
}

std::vector<std::string> load_few_shot(const fs::path& dir) {
  if (dir.empty()) return prompts::default_few_shot_examples();
  if (!fs::is_directory(dir)) throw Error(ErrorKind::io, "few-shot directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".md") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<std::string> out;
  for (const auto& f : files) {
    auto text = trim(read_file(f));
    if (!text.empty()) out.push_back(text);
  }
  if (out.empty()) throw Error(ErrorKind::invalid_argument, "no few-shot examples in " + dir.string());
  return out;
}

ReasoningTrace cot_reason(const CodeSample& sample, const std::vector<std::string>& few_shot,
                          llm::Gateway& gateway) {
  if (few_shot.empty()) throw Error(ErrorKind::invalid_argument, "few-shot example set is empty");
  std::string example;
  for (std::size_t i = 0; i < few_shot.size(); ++i) {
    if (i) example += "\n\n";
    example += few_shot[i];
  }
  llm::CotPrompt p{prompts::cot_instruction() + language_line(sample), example, prompts::cot_notice(),
                   sample.source_text};
  auto raw = gateway.chat(prompts::kCotTemplate, llm::render_cot_prompt(p));
  auto doc = parse_fenced_json(raw);
  ReasoningTrace out;
  const auto& steps = require_field(doc, "steps", raw);
  if (!steps.is_array() || steps.empty()) throw StructuredOutputError("steps must be a non-empty array", raw);
  for (const auto& s : steps) out.steps.push_back(as_text(s));
  if (doc.contains("candidate_flaws")) {
    if (!doc["candidate_flaws"].is_array()) {
      throw StructuredOutputError("candidate_flaws must be an array", raw);
    }
    for (const auto& f : doc["candidate_flaws"]) {
      if (!f.is_object() || !f.contains("label")) {
        throw StructuredOutputError("each candidate flaw needs a label", raw);
      }
      CandidateFlaw cf;
      cf.label = as_text(f["label"]);
      auto conf = to_lower(f.contains("confidence") ? as_text(f["confidence"]) : "low");
      if (conf == "high") cf.confidence = Confidence::high;
      else if (conf == "medium") cf.confidence = Confidence::medium;
      else if (conf == "low") cf.confidence = Confidence::low;
      else throw StructuredOutputError("unknown confidence '" + conf + "'", raw);
      cf.evidence = f.contains("evidence") ? as_text(f["evidence"]) : "";
      out.candidate_flaws.push_back(std::move(cf));
    }
  }
  return out;
}

std::optional<curve::CurveParams> extract_curve_params(const CodeSample& sample,
                                                       llm::Gateway& gateway) {
  llm::CotPrompt p{prompts::curve_instruction(), prompts::curve_example(), prompts::curve_notice(),
                   sample.source_text};
  auto raw = gateway.chat(prompts::kCurveTemplate, llm::render_cot_prompt(p));
  auto doc = parse_fenced_json(raw);
  const auto& c = require_field(doc, "curve", raw);
  if (c.is_null()) return std::nullopt;
  if (!c.is_object()) throw StructuredOutputError("curve must be an object or null", raw);
  auto num = [&](const char* name) {
    const auto& v = require_field(c, name, raw);
    try {
      return curve::parse_integer(as_text(v));
    } catch (const Error&) {
      throw StructuredOutputError(std::string("curve.") + name + " is not an integer", raw);
    }
  };
  auto p_val = num("p");
  auto a_val = num("a");
  auto b_val = num("b");
  std::optional<curve::BigInt> order;
  if (c.contains("order") && !c["order"].is_null()) order = num("order");
  // Primality is checked here; the model's claim is not trusted.
  return curve::make_curve_params(p_val, a_val, b_val, order);
}

bool mentions_curve(const SemanticSummary& summary) {
  for (const auto& a : summary.extracted_algorithms) {
    if (a == "ecdsa" || a == "ecdh" || a == "ec-custom") return true;
  }
  auto text = to_lower(summary.text);
  return text.find("elliptic") != std::string::npos || text.find("curve") != std::string::npos;
}

PreDetectionBundle run_predetection(const CodeSample& sample, const PreDetectionOptions& opts,
                                    llm::Gateway& gateway) {
  PreDetectionBundle b;
  b.summary = summarize(sample, gateway);
  b.route = identify_route(b.summary, opts.specs);
  if (b.route.kind == Route::Kind::compliance) {
    auto spec = std::find_if(opts.specs.begin(), opts.specs.end(),
                             [&](const AlgorithmSpec& s) { return s.algorithm_id == b.route.algorithm_id; });
    b.compliance = verify_compliance(sample, *spec, gateway);
  }
  b.trace = cot_reason(sample, opts.few_shot.empty() ? prompts::default_few_shot_examples() : opts.few_shot,
                       gateway);
  if (mentions_curve(b.summary)) {
    try {
      b.curve = extract_curve_params(sample, gateway);
    } catch (const StructuredOutputError&) {
      throw;
    } catch (const Error& e) {
      b.curve_note = std::string("curve parameters rejected: ") + e.what();
    }
    if (b.curve) {
      try {
        b.curve_assessment = curve::assess_curve(*b.curve, opts.curve_cfg, opts.remote_cas);
      } catch (const Error& e) {
        b.curve_note = std::string("curve assessment failed: ") + e.what();
      }
    }
  }
  return b;
}

// ---------------------------------------------------------------------------

std::string render_compliance(const ComplianceFindings& f) {
  std::string out = "Checklist " + f.algorithm_id + ":";
  for (const auto& v : f.verdicts) {
    out += "\n- [" + v.check_id + "] " + to_string(v.status);
    if (!v.evidence.empty()) out += ": " + v.evidence;
  }
  return out;
}

std::string render_trace(const ReasoningTrace& t) {
  std::string out = "Reasoning steps:";
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    out += "\n" + std::to_string(i + 1) + ". " + t.steps[i];
  }
  out += "\nCandidate flaws:";
  if (t.candidate_flaws.empty()) out += " none";
  for (const auto& f : t.candidate_flaws) {
    out += "\n- " + f.label + " (" + to_string(f.confidence) + ")";
    if (!f.evidence.empty()) out += ": " + f.evidence;
  }
  return out;
}

std::string render_curve(const PreDetectionBundle& b) {
  std::string out;
  if (b.curve) {
    out += "Curve y^2 = x^3 + " + b.curve->a.str() + "x + " + b.curve->b.str() + " over F_p, p = " +
           b.curve->p.str();
  }
  if (b.curve_assessment) {
    const auto& a = *b.curve_assessment;
    out += "\nExecutor: " + std::string(curve::to_string(a.executor));
    out += "\nFlags:";
    if (a.flags.empty()) out += " none";
    for (auto f : a.flags) out += std::string(" ") + curve::to_string(f);
    out += "\nEvidence: " + a.evidence;
  }
  if (!b.curve_note.empty()) out += (out.empty() ? "" : "\n") + b.curve_note;
  return out;
}

std::string summary_signal(const PreDetectionBundle& b) {
  std::string s = b.summary.text;
  if (b.compliance) s += "\n" + render_compliance(*b.compliance);
  return s;
}

std::string cot_signal(const ReasoningTrace& t) {
  std::string s;
  for (const auto& step : t.steps) s += step + "\n";
  for (const auto& f : t.candidate_flaws) s += f.label + ": " + f.evidence + "\n";
  return s;
}

}  // namespace cryptaudit::predetection
