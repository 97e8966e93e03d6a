#include "evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "prompts.hpp"

namespace cryptaudit::evaluation {

namespace fs = std::filesystem;

std::vector<BenchmarkCase> parse_cases(std::string_view text, const fs::path& base_dir) {
  std::vector<BenchmarkCase> out;
  auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const std::size_t line_no = i + 1;
    try {
      auto j = json::parse(lines[i]);
      BenchmarkCase c;
      c.id = j.at("id").get<std::string>();
      c.reference_analysis = j.at("reference_analysis").get<std::string>();
      if (trim(c.reference_analysis).empty()) throw ParseError(line_no, "empty reference_analysis");
      if (j.contains("tags")) {
        c.source = j["tags"].value("source", "");
        c.language = j["tags"].value("language", "");
      }
      if (!c.source.empty() && c.source != "cve" && c.source != "ctf" && c.source != "synthetic") {
        throw ParseError(line_no, "tags.source must be cve, ctf or synthetic");
      }
      const auto& s = j.at("sample");
      c.sample.id = s.value("id", c.id);
      if (s.contains("language_hint") && !s["language_hint"].is_null()) {
        c.sample.language_hint = s["language_hint"].get<std::string>();
      } else if (!c.language.empty()) {
        c.sample.language_hint = c.language;
      }
      if (s.contains("source_text")) {
        c.sample.source_text = s["source_text"].get<std::string>();
        c.sample.origin = s.value("origin", c.id);
      } else {
        auto rel = s.at("source_path").get<std::string>();
        c.sample.source_text = read_file(base_dir / rel);
        c.sample.origin = s.value("origin", rel);
      }
      if (trim(c.sample.source_text).empty()) throw ParseError(line_no, "empty sample source");
      out.push_back(std::move(c));
    } catch (const json::exception& e) {
      throw ParseError(line_no, e.what());
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return out;
}

std::vector<BenchmarkCase> load_cases(const fs::path& path) {
  return parse_cases(read_file(path), path.parent_path());
}

double cosine_metric(const std::string& generated, const std::string& reference,
                     embedding::EmbeddingProvider& provider) {
  if (generated.empty() || reference.empty()) {
    throw Error(ErrorKind::invalid_argument, "cosine_metric needs two non-empty texts");
  }
  auto v = provider.embed_batch({generated, reference});
  double c = embedding::dot(v[0].values, v[1].values);
  return std::clamp(c, 0.0, 1.0);
}

// ---------------------------------------------------------------------------

namespace {

constexpr const char* kRefBegin = "----- BEGIN REFERENCE -----\n";
constexpr const char* kRefEnd = "----- END REFERENCE -----\n";
constexpr const char* kGenBegin = "----- BEGIN GENERATED -----\n";
constexpr const char* kGenEnd = "----- END GENERATED -----\n";

std::string fenced(const char* begin, const std::string& body, const char* end) {
  std::string out = begin + body;
  if (body.empty() || body.back() != '\n') out += "\n";
  return out + end;
}

std::optional<std::string> section(const std::string& prompt, const char* begin, const char* end) {
  auto b = prompt.find(begin);
  if (b == std::string::npos) return std::nullopt;
  b += std::char_traits<char>::length(begin);
  auto e = prompt.find(end, b);
  if (e == std::string::npos) return std::nullopt;
  return prompt.substr(b, e - b);
}

double number_in(const json& doc, const char* key, double lo, double hi, const std::string& raw) {
  if (!doc.is_object() || !doc.contains(key) || !doc[key].is_number()) {
    throw StructuredOutputError(std::string("reply lacks numeric \"") + key + "\"", raw);
  }
  double v = doc[key].get<double>();
  if (!std::isfinite(v) || v < lo || v > hi) {
    throw StructuredOutputError(std::string("\"") + key + "\" = " + doc[key].dump() + " outside [" +
                                    format_fixed(lo, 0) + ", " + format_fixed(hi, 0) + "]",
                                raw);
  }
  return v;
}

// One retry with the error appended, then the structured-output error escapes.
template <typename Parse>
auto ask_judge(llm::Gateway& gateway, const std::string& template_id, const std::string& prompt,
               Parse parse) {
  auto raw = gateway.chat(template_id, prompt);
  try {
    return parse(raw);
  } catch (const StructuredOutputError& e) {
    auto again = gateway.chat(template_id + prompts::kRetrySuffix, prompt + prompts::retry_note(e.what()));
    return parse(again);
  }
}

double score_judge(const std::string& instruction, const std::string& template_id,
                   const std::string& generated, const std::string& reference, llm::Gateway& gateway) {
  auto prompt = judge_prompt(instruction, prompts::judge_score_notice(), generated, reference);
  return ask_judge(gateway, template_id, prompt, [](const std::string& raw) {
    return number_in(parse_fenced_json(raw), "score", 0.0, 1.0, raw);
  });
}

}  // namespace

std::string judge_prompt(const std::string& instruction, const std::string& notice,
                         const std::string& generated, const std::string& reference) {
  return "## Instruction\n" + instruction + "\n\n## Example\n" + prompts::judge_example() +
         "\n\n## Notice\n" + notice + "\n\n## Reference analysis\n" +
         fenced(kRefBegin, reference, kRefEnd) + "\n## Generated analysis\n" +
         fenced(kGenBegin, generated, kGenEnd);
}

double judge_semantic_match(const std::string& generated, const std::string& reference,
                            llm::Gateway& gateway) {
  return score_judge(prompts::judge_semantic_instruction(), prompts::kJudgeSemanticTemplate, generated,
                     reference, gateway);
}

double judge_coverage(const std::string& generated, const std::string& reference,
                      llm::Gateway& gateway) {
  return score_judge(prompts::judge_coverage_instruction(), prompts::kJudgeCoverageTemplate, generated,
                     reference, gateway);
}

CredibilityScores credibility(const std::string& generated, const std::string& reference,
                              llm::Gateway& gateway) {
  auto prompt = judge_prompt(prompts::judge_credibility_instruction(), prompts::judge_credibility_notice(),
                             generated, reference);
  return ask_judge(gateway, prompts::kJudgeCredibilityTemplate, prompt, [](const std::string& raw) {
    auto doc = parse_fenced_json(raw);
    return CredibilityScores{number_in(doc, "relevance", 0, 100, raw),
                             number_in(doc, "informativeness", 0, 100, raw),
                             number_in(doc, "logical_soundness", 0, 100, raw)};
  });
}

llm::ChatResponse EchoJudgeBackend::complete(const llm::ChatRequest& req) {
  auto gen = section(req.rendered_prompt, kGenBegin, kGenEnd);
  auto ref = section(req.rendered_prompt, kRefBegin, kRefEnd);
  if (!gen || !ref) {
    throw Error(ErrorKind::unscripted_call,
                "echo judge cannot answer template '" + req.template_id + "' (no judge sections)");
  }
  bool same = *gen == *ref;
  std::string body;
  if (req.template_id.rfind(prompts::kJudgeCredibilityTemplate, 0) == 0) {
    int v = same ? 100 : 0;
    body = "{\"relevance\": " + std::to_string(v) + ", \"informativeness\": " + std::to_string(v) +
           ", \"logical_soundness\": " + std::to_string(v) + "}";
  } else {
    body = std::string("{\"score\": ") + (same ? "1.0" : "0.0") + "}";
  }
  return llm::ChatResponse{"```json\n" + body + "\n```\n", "stop", std::nullopt, std::nullopt};
}

// ---------------------------------------------------------------------------

Aggregate run_benchmark(const std::vector<BenchmarkCase>& cases, const Pipeline& pipeline,
                        const Judges& judges, std::size_t concurrency) {
  Aggregate agg;
  agg.cases.resize(cases.size());
  parallel_for(cases.size(), concurrency, [&](std::size_t i) {
    const auto& c = cases[i];
    auto& res = agg.cases[i];
    res.id = c.id;
    try {
      auto generated = pipeline(c);
      if (trim(generated).empty()) throw Error(ErrorKind::invalid_argument, "pipeline produced no analysis");
      MetricSet m;
      m.cosine_similarity = cosine_metric(generated, c.reference_analysis, judges.embedder);
      m.semantic_match = judge_semantic_match(generated, c.reference_analysis, judges.gateway);
      m.coverage = judge_coverage(generated, c.reference_analysis, judges.gateway);
      m.credibility_parts = credibility(generated, c.reference_analysis, judges.gateway);
      m.credibility = m.credibility_parts.mean();
      res.metrics = m;
    } catch (const std::exception& e) {
      res.error = e.what();
    }
  });

  std::vector<const MetricSet*> scored;
  for (const auto& r : agg.cases) {
    if (r.metrics) scored.push_back(&*r.metrics);
    else ++agg.errored;
  }
  if (scored.empty()) return agg;

  // Mean of one column, kept inside [min, max] against rounding in the sum.
  auto mean = [&](auto field) {
    double sum = 0.0, lo = scored.front()->*field, hi = lo;
    for (const auto* m : scored) {
      sum += m->*field;
      lo = std::min(lo, m->*field);
      hi = std::max(hi, m->*field);
    }
    return std::clamp(sum / static_cast<double>(scored.size()), lo, hi);
  };
  MetricSet means;
  means.credibility = mean(&MetricSet::credibility);
  means.cosine_similarity = mean(&MetricSet::cosine_similarity);
  means.semantic_match = mean(&MetricSet::semantic_match);
  means.coverage = mean(&MetricSet::coverage);
  agg.means = means;
  return agg;
}

namespace {

ordered_json metrics_json(const MetricSet& m, bool with_parts) {
  ordered_json j;
  j["credibility"] = m.credibility;
  j["cosine_similarity"] = m.cosine_similarity;
  j["semantic_match"] = m.semantic_match;
  j["coverage"] = m.coverage;
  if (with_parts) {
    j["credibility_subscores"] = {{"relevance", m.credibility_parts.relevance},
                                  {"informativeness", m.credibility_parts.informativeness},
                                  {"logical_soundness", m.credibility_parts.logical_soundness}};
  }
  return j;
}

}  // namespace

std::string render_aggregate_json(const Aggregate& agg) {
  ordered_json j;
  j["schema_version"] = kEvalSchema;
  j["case_count"] = agg.cases.size();
  j["scored_count"] = agg.cases.size() - agg.errored;
  j["errored_count"] = agg.errored;
  j["zero_cases"] = agg.cases.empty();
  j["columns"] = {"credibility", "cosine_similarity", "semantic_match", "coverage"};
  j["means"] = agg.means ? metrics_json(*agg.means, false) : ordered_json(nullptr);
  auto cases = ordered_json::array();
  auto errored = ordered_json::array();
  for (const auto& c : agg.cases) {
    if (c.metrics) {
      cases.push_back({{"id", c.id}, {"metrics", metrics_json(*c.metrics, true)}});
    } else {
      errored.push_back({{"id", c.id}, {"error", c.error}});
    }
  }
  j["cases"] = cases;
  j["errored"] = errored;
  return j.dump(2) + "\n";
}

std::string render_table(const Aggregate& agg) {
  std::size_t w = 4;
  for (const auto& c : agg.cases) w = std::max(w, c.id.size());
  auto pad = [](std::string s, std::size_t width, bool left) {
    if (s.size() >= width) return s;
    return left ? s + std::string(width - s.size(), ' ') : std::string(width - s.size(), ' ') + s;
  };
  auto row = [&](const std::string& name, const MetricSet& m) {
    return pad(name, w, true) + "  " + pad(format_fixed(m.credibility, 2), 11, false) + "  " +
           pad(format_fixed(m.cosine_similarity, 4), 17, false) + "  " +
           pad(format_fixed(m.semantic_match, 4), 14, false) + "  " +
           pad(format_fixed(m.coverage, 4), 8, false) + "\n";
  };
  std::string out = pad("case", w, true) + "  credibility  cosine_similarity  semantic_match  coverage\n";
  if (agg.cases.empty()) return out + "(zero cases)\n";
  for (const auto& c : agg.cases) {
    if (c.metrics) out += row(c.id, *c.metrics);
  }
  if (agg.means) out += row("mean", *agg.means);
  out += "errored: " + std::to_string(agg.errored) + "\n";
  for (const auto& c : agg.cases) {
    if (!c.metrics) out += "  " + c.id + ": " + c.error + "\n";
  }
  return out;
}

}  // namespace cryptaudit::evaluation
