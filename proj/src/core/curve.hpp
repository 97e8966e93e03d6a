#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace cryptaudit::curve {

using BigInt = boost::multiprecision::cpp_int;

// Short Weierstrass curve y^2 = x^3 + ax + b over F_p.
struct CurveParams {
  BigInt p;
  BigInt a;
  BigInt b;
  std::optional<BigInt> claimed_order;

  bool operator==(const CurveParams&) const = default;
};

// Decimal or 0x-prefixed hex, optional leading '-'.
BigInt parse_integer(std::string_view text);

bool is_probable_prime(const BigInt& n);

// Validates p (>= 3, prime) and reduces a, b into [0, p). Throws
// Error(invalid_argument) with the reason.
CurveParams make_curve_params(const BigInt& p, const BigInt& a, const BigInt& b,
                              std::optional<BigInt> claimed_order = std::nullopt);

bool is_singular(const CurveParams& c);

enum class Flag { singular, anomalous, smooth_order, small_order, low_embedding_degree_checked };
const char* to_string(Flag f);

enum class Executor { local_bruteforce, remote_cas, skipped };
const char* to_string(Executor e);

struct CurveAssessment {
  std::optional<BigInt> order;
  std::set<Flag> flags;
  std::string evidence;
  Executor executor = Executor::skipped;
  std::optional<BigInt> largest_prime_factor;
  // Smallest k <= max_embedding_degree with p^k = 1 mod q; 0 when none.
  std::optional<unsigned> embedding_degree;

  bool has(Flag f) const { return flags.count(f) != 0; }
};

// Computer-algebra service: takes a script, returns its printed output.
class RemoteCas {
 public:
  virtual ~RemoteCas() = default;
  virtual std::string run(const std::string& script) = 0;
};

// POSTs the script as text/plain to endpoint and returns the response body.
std::unique_ptr<RemoteCas> make_http_cas(std::string endpoint);

struct ExecutorConfig {
  std::uint64_t local_bound = 1ULL << 20;      // local brute force only when p < bound
  std::uint64_t smooth_bound = 1ULL << 16;     // smooth iff largest prime factor < bound
  BigInt small_order_bound = BigInt(1) << 128;
  unsigned max_embedding_degree = 20;
};

// Affine solutions plus the point at infinity, by table lookup of squares.
// Requires p < 2^32.
std::uint64_t count_points(std::uint64_t p, std::uint64_t a, std::uint64_t b);

std::string sage_script(const CurveParams& c, unsigned max_embedding_degree);

CurveAssessment assess_curve(const CurveParams& c, const ExecutorConfig& cfg,
                             RemoteCas* remote = nullptr);

}  // namespace cryptaudit::curve
