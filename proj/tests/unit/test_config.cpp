#include <doctest.h>

#include <fstream>

#include "config.hpp"
#include "errors.hpp"
#include "support/paths.hpp"

using namespace cryptaudit;
using namespace cryptaudit::config;

namespace {

bool has_key(const std::vector<Violation>& v, const std::string& key) {
  for (const auto& x : v) {
    if (x.key == key) return true;
  }
  return false;
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("defaults are valid without a command") {
  auto cfg = defaults();
  CHECK(validate_config(cfg).empty());
  CHECK(cfg.retrieval.k == 5);
  CHECK(cfg.retrieval.tau == doctest::Approx(0.75));
  CHECK(validate_config(cfg, "curve-check").empty());
  CHECK_THROWS_AS(validate_config(cfg, "frobnicate"), Error);
}

TEST_CASE("each bad value is one violation naming its key") {
  auto cfg = defaults();
  cfg.retrieval.k = 0;
  auto v = validate_config(cfg);
  REQUIRE(v.size() == 1);
  CHECK(v[0].key == "retrieval.k");
  CHECK(v[0].value == "0");

  cfg = defaults();
  set(cfg, "retrieval.tau", "1.5");
  v = validate_config(cfg);
  REQUIRE(v.size() == 1);
  CHECK(v[0].key == "retrieval.tau");
  CHECK(v[0].value == "1.5");

  cfg = defaults();
  cfg.curve.executor = "ftp://x";
  cfg.embedding.provider = "word2vec";
  v = validate_config(cfg);
  CHECK(v.size() == 2);
  CHECK(has_key(v, "curve.executor"));
  CHECK(has_key(v, "embedding.provider"));
}

TEST_CASE("command requirements") {
  auto cfg = defaults();
  auto v = validate_config(cfg, "scan");
  CHECK(has_key(v, "paths.corpus"));
  CHECK(has_key(v, "paths.index"));
  CHECK(has_key(v, "chat.endpoint"));
  CHECK(has_key(v, "embedding.endpoint"));

  auto data = testpaths::data_dir();
  cfg.paths.corpus = (data / "kb" / "missing.jsonl").string();
  cfg.paths.index = (data / "kb" / "index.bin").string();
  cfg.paths.mock_script = (data / "mock" / "scan_script.jsonl").string();
  cfg.embedding.provider = "mock-bow";
  v = validate_config(cfg, "scan");
  REQUIRE(v.size() == 1);
  CHECK(v[0].key == "paths.corpus");
  CHECK(v[0].constraint == "file does not exist");

  cfg.paths.corpus = (data / "kb" / "corpus.jsonl").string();
  CHECK(validate_config(cfg, "scan").empty());
  CHECK(validate_config(cfg, "kb-query").empty());
}

TEST_CASE("set and get round trip every key") {
  auto cfg = defaults();
  for (const auto& key : keys()) {
    auto before = get(cfg, key);
    set(cfg, key, before);
    CHECK(get(cfg, key) == before);
  }
  set(cfg, "retrieval.k", " 7 ");
  CHECK(cfg.retrieval.k == 7);
  set(cfg, "chat.model", "m1");
  CHECK(get(cfg, "chat.model") == "m1");
  try {
    set(cfg, "retrieval.kk", "1");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "retrieval.kk");
  }
  CHECK_THROWS_AS(set(cfg, "retrieval.k", "five"), ConfigError);
  CHECK_THROWS_AS(set(cfg, "retrieval.k", "5x"), ConfigError);
  CHECK_THROWS_AS(set(cfg, "retrieval.k", ""), ConfigError);
  CHECK_THROWS_AS(get(cfg, "nope"), ConfigError);
}

TEST_CASE("INI files resolve relative paths against their directory") {
  auto dir = testpaths::scratch("config_ini");
  {
    std::ofstream f(dir / "audit.ini");
    f << "[retrieval]\nk = 3\ntau = 0.8\n\n[paths]\ncorpus = kb/corpus.jsonl\nindex = /abs/index.bin\n"
         "\n[chat]\nmodel = local-model\n";
  }
  auto cfg = defaults();
  load_file(cfg, dir / "audit.ini");
  CHECK(cfg.retrieval.k == 3);
  CHECK(cfg.retrieval.tau == doctest::Approx(0.8));
  CHECK(cfg.paths.corpus == (dir / "kb" / "corpus.jsonl").lexically_normal().string());
  CHECK(cfg.paths.index == "/abs/index.bin");
  CHECK(cfg.chat.model == "local-model");

  {
    std::ofstream f(dir / "bad_key.ini");
    f << "[retrieval]\ntop_k = 3\n";
  }
  try {
    load_file(cfg, dir / "bad_key.ini");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "retrieval.top_k");
  }
  {
    std::ofstream f(dir / "broken.ini");
    f << "[retrieval]\nk = 3\n[unterminated\n";
  }
  CHECK_THROWS_AS(load_file(cfg, dir / "broken.ini"), ParseError);
  CHECK_THROWS_AS(load_file(cfg, dir / "absent.ini"), Error);
}

}  // TEST_SUITE
