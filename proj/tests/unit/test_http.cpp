#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <cmath>
#include <thread>

#include "embedding.hpp"
#include "errors.hpp"
#include "http.hpp"
#include "llm.hpp"
#include "util.hpp"

using namespace cryptaudit;

namespace {

// A loopback server that runs for the lifetime of the object.
class LocalServer {
 public:
  LocalServer() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }
  httplib::Server& operator*() { return server_; }
  std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

std::string chat_reply(const std::string& content, const std::string& finish) {
  return json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}, {"finish_reason", finish}}}},
              {"usage", {{"prompt_tokens", 12}, {"completion_tokens", 3}}}}
      .dump();
}

}  // namespace

TEST_SUITE("http") {

TEST_CASE("status classification") {
  CHECK(http::is_transient_status(408));
  CHECK(http::is_transient_status(429));
  CHECK(http::is_transient_status(503));
  CHECK_FALSE(http::is_transient_status(400));
  CHECK_FALSE(http::is_transient_status(401));
  CHECK_FALSE(http::is_transient_status(200));
}

TEST_CASE("chat backend against a local server") {
  LocalServer srv;
  json last_request;
  std::string last_auth;
  std::atomic<int> flaky_calls{0};
  (*srv).Post("/ok", [&](const httplib::Request& req, httplib::Response& res) {
    last_request = json::parse(req.body);
    last_auth = req.get_header_value("Authorization");
    res.set_content(chat_reply("hello", "stop"), "application/json");
  });
  (*srv).Post("/long", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(chat_reply("trunc", "length"), "application/json");
  });
  (*srv).Post("/flaky", [&](const httplib::Request&, httplib::Response& res) {
    if (flaky_calls++ == 0) {
      res.status = 503;
      res.set_content("busy", "text/plain");
    } else {
      res.set_content(chat_reply("recovered", "stop"), "application/json");
    }
  });
  (*srv).Post("/denied", [](const httplib::Request&, httplib::Response& res) {
    res.status = 401;
    res.set_content("bad key", "text/plain");
  });
  (*srv).Post("/junk", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"choices\": []}", "application/json");
  });

  SUBCASE("success carries usage and the request shape") {
    llm::HttpChatBackend b(srv.url("/ok"), "model-x", "secret");
    auto r = b.complete({"t", "prompt text", "", 0.0, 77});
    CHECK(r.text == "hello");
    CHECK(r.finish_reason == "stop");
    CHECK(r.prompt_tokens == 12);
    CHECK(r.completion_tokens == 3);
    CHECK(last_auth == "Bearer secret");
    CHECK(last_request["model"] == "model-x");
    CHECK(last_request["max_tokens"] == 77);
    CHECK(last_request["messages"][0]["content"] == "prompt text");
  }
  SUBCASE("length finish is a budget error at the gateway") {
    llm::Gateway gw(std::make_shared<llm::HttpChatBackend>(srv.url("/long"), "m", ""), "m", {}, 2048,
                    [](std::chrono::milliseconds) {});
    try {
      gw.chat("t", "p");
      FAIL("expected budget_exceeded");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::budget_exceeded);
    }
  }
  SUBCASE("503 is retried, 401 is not") {
    std::vector<long> sleeps;
    llm::Gateway gw(std::make_shared<llm::HttpChatBackend>(srv.url("/flaky"), "m", ""), "m", {3, std::chrono::milliseconds(5)}, 2048,
                    [&](std::chrono::milliseconds d) { sleeps.push_back(static_cast<long>(d.count())); });
    CHECK(gw.chat("t", "p") == "recovered");
    CHECK(flaky_calls == 2);
    CHECK(sleeps == std::vector<long>{5});

    llm::HttpChatBackend denied(srv.url("/denied"), "m", "");
    try {
      denied.complete({"t", "p"});
      FAIL("expected ProviderError");
    } catch (const ProviderError& e) {
      CHECK_FALSE(e.transient());
      CHECK(std::string(e.what()).find("HTTP 401") != std::string::npos);
    }
  }
  SUBCASE("malformed body") {
    llm::HttpChatBackend b(srv.url("/junk"), "m", "");
    CHECK_THROWS_AS(b.complete({"t", "p"}), ProviderError);
  }
  SUBCASE("unreachable endpoint is transient") {
    llm::HttpChatBackend b("http://127.0.0.1:1/v1", "m", "", std::chrono::seconds(2));
    try {
      b.complete({"t", "p"});
      FAIL("expected ProviderError");
    } catch (const ProviderError& e) {
      CHECK(e.transient());
    }
  }
}

TEST_CASE("embedding provider against a local server") {
  LocalServer srv;
  std::atomic<int> requests{0};
  (*srv).Post("/embed", [&](const httplib::Request& req, httplib::Response& res) {
    ++requests;
    auto in = json::parse(req.body);
    json data = json::array();
    // Reverse order with explicit indexes; the provider must reorder.
    for (std::size_t i = in["input"].size(); i-- > 0;) {
      auto len = static_cast<double>(in["input"][i].get<std::string>().size());
      data.push_back({{"index", i}, {"embedding", {len, 1.0, 0.0}}});
    }
    res.set_content(json{{"data", data}}.dump(), "application/json");
  });
  (*srv).Post("/short", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"data": []})", "application/json");
  });
  (*srv).Post("/grow", [&](const httplib::Request&, httplib::Response& res) {
    json v = json::array();
    for (int i = 0; i <= requests; ++i) v.push_back(1.0);
    ++requests;
    res.set_content(json{{"data", {{{"index", 0}, {"embedding", v}}}}}.dump(), "application/json");
  });

  SUBCASE("batched, ordered and normalized") {
    embedding::HttpEmbeddingProvider p(srv.url("/embed"), "emb", "", 2);
    CHECK(p.dimension() == 0);
    auto v = p.embed_batch({"a", "bbb", "cc", "dddd", "e"});
    CHECK(requests == 3);
    REQUIRE(v.size() == 5);
    CHECK(p.dimension() == 3);
    CHECK(v[1].values[0] == doctest::Approx(3.0 / std::sqrt(10.0)));
    CHECK(v[3].values[0] == doctest::Approx(4.0 / std::sqrt(17.0)));
    for (const auto& e : v) {
      CHECK(embedding::norm(e.values) == doctest::Approx(1.0));
      CHECK(e.provider_tag == "http:emb");
    }
    CHECK_THROWS_AS(p.embed_batch({"x", ""}), Error);
  }
  SUBCASE("wrong vector count") {
    embedding::HttpEmbeddingProvider p(srv.url("/short"), "emb", "");
    CHECK_THROWS_AS(p.embed_batch({"x"}), ProviderError);
  }
  SUBCASE("dimension drift") {
    embedding::HttpEmbeddingProvider p(srv.url("/grow"), "emb", "");
    CHECK_NOTHROW(p.embed_batch({"x"}));
    CHECK_THROWS_AS(p.embed_batch({"x"}), ProviderError);
  }
}

}  // TEST_SUITE
