#include <doctest.h>

#include <random>

#include "curve.hpp"
#include "errors.hpp"
#include "support/curve_check.hpp"

using namespace cryptaudit;
using namespace cryptaudit::curve;

namespace {

class FakeCas final : public RemoteCas {
 public:
  explicit FakeCas(std::string out) : out_(std::move(out)) {}
  std::string run(const std::string& script) override {
    last_script = script;
    return out_;
  }
  std::string last_script;

 private:
  std::string out_;
};

}  // namespace

TEST_SUITE("curve") {

TEST_CASE("small fields: counts, Hasse, twists, singularity") {
  auto why = ccheck::small_field_suite();
  CHECK_MESSAGE(why.empty(), why);
}

TEST_CASE("point counts match the oracle on random primes below 2^12") {
  std::mt19937_64 rng(41);
  int done = 0;
  while (done < 40) {
    std::uint64_t p = 5 + rng() % 4091;
    if (!oracle::is_prime(p)) continue;
    std::uint64_t a = rng() % p, b = rng() % p;
    if (oracle::has_repeated_root(p, a, b)) continue;
    auto n = count_points(p, a, b);
    CHECK(n == oracle::count_points(p, a, b));
    auto c = oracle::non_residue(p);
    CHECK(n + count_points(p, c * c % p * a % p, c * c % p * c % p * b % p) == 2 * p + 2);
    ++done;
  }
}

TEST_CASE("singularity agrees with a repeated-root search for p <= 31") {
  for (std::uint64_t p : {5, 7, 11, 13, 17, 19, 23, 29, 31}) {
    for (std::uint64_t a = 0; a < p; ++a) {
      for (std::uint64_t b = 0; b < p; ++b) {
        CHECK(is_singular(make_curve_params(p, a, b)) == oracle::has_repeated_root(p, a, b));
      }
    }
  }
}

TEST_CASE("known curves") {
  ExecutorConfig cfg;
  auto e = assess_curve(make_curve_params(5, 1, 1), cfg);
  REQUIRE(e.order);
  CHECK(*e.order == 9);
  CHECK(e.executor == Executor::local_bruteforce);
  CHECK(e.has(Flag::small_order));
  CHECK(e.has(Flag::smooth_order));
  CHECK_FALSE(e.has(Flag::anomalous));
  auto s = assess_curve(make_curve_params(5, 0, 0), cfg);
  CHECK(s.has(Flag::singular));
  CHECK_FALSE(s.order);
}

TEST_CASE("the frozen anomalous example is the first one the oracle finds") {
  std::uint64_t fp = 0, fa = 0, fb = 0;
  for (std::uint64_t p = 5; p <= 97 && !fp; ++p) {
    if (!oracle::is_prime(p)) continue;
    for (std::uint64_t a = 0; a < p && !fp; ++a) {
      for (std::uint64_t b = 0; b < p && !fp; ++b) {
        if (!oracle::has_repeated_root(p, a, b) && oracle::count_points(p, a, b) == p) fp = p, fa = a, fb = b;
      }
    }
  }
  CHECK(fp == ccheck::kAnomalousP);
  CHECK(fa == ccheck::kAnomalousA);
  CHECK(fb == ccheck::kAnomalousB);
  auto as = assess_curve(make_curve_params(fp, fa, fb), ExecutorConfig{});
  CHECK(as.has(Flag::anomalous));
  CHECK(*as.order == fp);
}

TEST_CASE("parameter validation") {
  CHECK(parse_integer("0x1F") == 31);
  CHECK(parse_integer("-7") == -7);
  CHECK_THROWS_AS(parse_integer("12z"), Error);
  CHECK_THROWS_AS(parse_integer(""), Error);
  CHECK_THROWS_AS(make_curve_params(15, 1, 1), Error);
  CHECK_THROWS_AS(make_curve_params(2, 1, 1), Error);
  auto c = make_curve_params(7, -1, 9);
  CHECK(c.a == 6);
  CHECK(c.b == 2);
  CHECK(is_probable_prime(BigInt("115792089210356248762697446949407573530086143415290314195533631308867097853951")));
  CHECK_FALSE(is_probable_prime(BigInt("115792089210356248762697446949407573530086143415290314195533631308867097853953")));
}

TEST_CASE("large fields use the remote executor when configured") {
  ExecutorConfig cfg;
  cfg.local_bound = 1000;
  auto c = make_curve_params(1009, 2, 3);
  auto skipped = assess_curve(c, cfg);
  CHECK(skipped.executor == Executor::skipped);
  CHECK_FALSE(skipped.order);

  FakeCas cas("order=1009\nlargest_prime_factor=1009\nembedding_degree=0\n");
  auto r = assess_curve(c, cfg, &cas);
  CHECK(r.executor == Executor::remote_cas);
  CHECK(*r.order == 1009);
  CHECK(r.has(Flag::anomalous));
  CHECK(cas.last_script == sage_script(c, cfg.max_embedding_degree));
  CHECK(cas.last_script.find("EllipticCurve(GF(p), [2, 3])") != std::string::npos);

  FakeCas junk("Traceback: NameError");
  auto j = assess_curve(c, cfg, &junk);
  CHECK(j.executor == Executor::skipped);
  CHECK(j.evidence.find("Traceback") != std::string::npos);
}

TEST_CASE("low embedding degree is detected") {
  // y^2 = x^3 + x over F_p with p = 3 mod 4 is supersingular: order p + 1, k = 2.
  auto as = assess_curve(make_curve_params(1019, 1, 0), ExecutorConfig{});
  REQUIRE(as.order);
  CHECK(*as.order == 1020);
  REQUIRE(as.embedding_degree);
  CHECK(*as.embedding_degree == 2);
}

}  // TEST_SUITE
