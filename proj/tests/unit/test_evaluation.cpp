#include <doctest.h>

#include <cmath>
#include <random>

#include "errors.hpp"
#include "evaluation.hpp"
#include "prompts.hpp"
#include "support/generators.hpp"
#include "support/paths.hpp"
#include "support/scripted.hpp"

using namespace cryptaudit;
using namespace cryptaudit::evaluation;

namespace {

// Returns fixed vectors so the raw cosine can be negative.
class FixedProvider final : public embedding::EmbeddingProvider {
 public:
  std::string tag() const override { return "fixed"; }
  std::size_t dimension() const override { return 2; }
  std::vector<embedding::EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override {
    std::vector<embedding::EmbeddingVector> out;
    for (const auto& t : texts) {
      if (t == "a") out.push_back({{1.0, 0.0}, tag()});
      else out.push_back({{-0.2, std::sqrt(1.0 - 0.04)}, tag()});
    }
    return out;
  }
};

std::vector<BenchmarkCase> cases(std::size_t n) {
  std::vector<BenchmarkCase> out;
  for (std::size_t i = 0; i < n; ++i) {
    BenchmarkCase c;
    c.id = "case" + std::to_string(i);
    c.sample = {c.id, "c", "int x;", c.id};
    c.reference_analysis = "reference analysis " + std::to_string(i);
    out.push_back(c);
  }
  return out;
}

std::unique_ptr<llm::Gateway> echo_gateway() {
  return std::make_unique<llm::Gateway>(std::make_shared<EchoJudgeBackend>(), "echo", llm::RetryPolicy{}, 2048,
                                        [](std::chrono::milliseconds) {});
}

}  // namespace

TEST_SUITE("evaluation") {

TEST_CASE("cosine metric: identity, symmetry, clamping") {
  embedding::HashEmbeddingProvider bow(embedding::HashEmbeddingProvider::Mode::tokens);
  std::mt19937_64 rng(51);
  for (int i = 0; i < 100; ++i) {
    auto x = gen::vocab_text(rng), y = gen::vocab_text(rng);
    CHECK(cosine_metric(x, x, bow) == doctest::Approx(1.0).epsilon(1e-6));
    double xy = cosine_metric(x, y, bow), yx = cosine_metric(y, x, bow);
    CHECK(xy == doctest::Approx(yx).epsilon(1e-12));
    CHECK(xy >= 0.0);
    CHECK(xy <= 1.0);
  }
  FixedProvider fixed;
  CHECK(cosine_metric("a", "b", fixed) == 0.0);
  CHECK_THROWS_AS(cosine_metric("", "b", fixed), Error);
}

TEST_CASE("credibility is the mean of its three parts") {
  CredibilityScores s{60, 70, 80};
  CHECK(s.mean() == doctest::Approx(70.0));
  auto gw = scripted::Script{}
                .on("judge.credibility.v1", {"GENERATED"},
                    json{{"relevance", 60}, {"informativeness", 70}, {"logical_soundness", 80}})
                .gateway();
  auto got = credibility("gen", "ref", *gw);
  CHECK(got.relevance == 60);
  CHECK(got.mean() == doctest::Approx(70.0));
}

TEST_CASE("judge prompts carry both analyses") {
  auto p = judge_prompt("Compare.", "Reply.", "gen text", "ref text");
  CHECK(p.find("## Reference analysis\n----- BEGIN REFERENCE -----\nref text\n----- END REFERENCE -----\n") !=
        std::string::npos);
  CHECK(p.find("## Generated analysis\n----- BEGIN GENERATED -----\ngen text\n----- END GENERATED -----\n") !=
        std::string::npos);
  CHECK(p.find("## Instruction") < p.find("## Example"));
}

TEST_CASE("out-of-range judge replies are retried once, then fail") {
  auto gw = scripted::Script{}
                .on("judge.semantic_match.v1", {"GENERATED"}, json{{"score", 1.5}})
                .on("judge.semantic_match.v1.retry", {"GENERATED"}, json{{"score", 1.5}})
                .on("judge.coverage.v1", {"GENERATED"}, json{{"score", -0.1}})
                .on("judge.coverage.v1.retry", {"GENERATED"}, json{{"score", 0.25}})
                .on("judge.credibility.v1", {"GENERATED"}, json{{"relevance", 101}, {"informativeness", 1},
                                                                {"logical_soundness", 1}})
                .on("judge.credibility.v1.retry", {"GENERATED"}, std::string("no json"))
                .gateway();
  CHECK_THROWS_AS(judge_semantic_match("g", "r", *gw), StructuredOutputError);
  CHECK(gw->audit_log().back().template_id == "judge.semantic_match.v1.retry");
  CHECK(gw->audit_log().back().prompt.find("1.5") != std::string::npos);
  CHECK(judge_coverage("g", "r", *gw) == 0.25);
  CHECK_THROWS_AS(credibility("g", "r", *gw), StructuredOutputError);
}

TEST_CASE("echo pipeline scores every case perfectly") {
  embedding::HashEmbeddingProvider bow(embedding::HashEmbeddingProvider::Mode::tokens);
  auto gw = echo_gateway();
  auto cs = cases(5);
  auto agg = run_benchmark(cs, [](const BenchmarkCase& c) { return c.reference_analysis; }, {*gw, bow}, 3);
  REQUIRE(agg.means);
  CHECK(agg.errored == 0);
  CHECK(agg.means->cosine_similarity == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(agg.means->semantic_match == 1.0);
  CHECK(agg.means->coverage == 1.0);
  CHECK(agg.means->credibility == 100.0);
  for (std::size_t i = 0; i < cs.size(); ++i) CHECK(agg.cases[i].id == cs[i].id);
  auto table = render_table(agg);
  CHECK(table.find("credibility  cosine_similarity  semantic_match  coverage") != std::string::npos);
  CHECK(table.find("\nmean ") != std::string::npos);
}

TEST_CASE("errored cases are excluded from the means") {
  embedding::HashEmbeddingProvider bow(embedding::HashEmbeddingProvider::Mode::tokens);
  auto gw = echo_gateway();
  auto agg = run_benchmark(cases(4), [](const BenchmarkCase& c) -> std::string {
    if (c.id == "case1") throw Error(ErrorKind::provider, "down");
    return c.id == "case2" ? "something else" : c.reference_analysis;
  }, {*gw, bow}, 2);
  CHECK(agg.errored == 1);
  CHECK(agg.cases[1].error.find("down") != std::string::npos);
  REQUIRE(agg.means);
  CHECK(agg.means->semantic_match == doctest::Approx(2.0 / 3.0));
  auto j = json::parse(render_aggregate_json(agg));
  CHECK(j["schema_version"] == kEvalSchema);
  CHECK(j["errored_count"] == 1);
  CHECK(j["scored_count"] == 3);
  CHECK(j["errored"][0]["id"] == "case1");
}

TEST_CASE("zero cases") {
  embedding::HashEmbeddingProvider bow;
  auto gw = echo_gateway();
  auto agg = run_benchmark({}, [](const BenchmarkCase&) { return std::string("x"); }, {*gw, bow});
  CHECK_FALSE(agg.means);
  CHECK(render_table(agg).find("(zero cases)") != std::string::npos);
  auto j = json::parse(render_aggregate_json(agg));
  CHECK(j["zero_cases"] == true);
  CHECK(j["means"].is_null());
}

TEST_CASE("echo judge needs judge sections") {
  EchoJudgeBackend echo;
  CHECK_THROWS_AS(echo.complete({"summary.v1", "## Instruction\nx"}), Error);
  auto r = echo.complete({"judge.coverage.v1", judge_prompt("i", "n", "same", "same")});
  CHECK(r.text.find("1.0") != std::string::npos);
}

TEST_CASE("benchmark case files") {
  auto cs = load_cases(testpaths::data_dir() / "bench" / "cases.jsonl");
  REQUIRE(cs.size() == 5);
  CHECK(cs[0].sample.source_text.find("ecdsa_verify") != std::string::npos);
  CHECK(cs[0].source == "cve");
  CHECK(cs[0].sample.language_hint == "c");
  CHECK_THROWS_AS(parse_cases("{\"id\":\"x\"}\n", "."), ParseError);
  try {
    parse_cases(R"({"id":"a","reference_analysis":"r","sample":{"source_text":"x"}})" "\n"
                R"({"id":"b","reference_analysis":"r","tags":{"source":"blog"},"sample":{"source_text":"x"}})",
                ".");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

}  // TEST_SUITE
