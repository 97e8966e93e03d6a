#include "curve.hpp"

#include <boost/multiprecision/miller_rabin.hpp>

#include <cctype>
#include <vector>

#include "errors.hpp"
#include "http.hpp"
#include "util.hpp"

namespace cryptaudit::curve {

namespace mp = boost::multiprecision;

BigInt parse_integer(std::string_view text) {
  auto s = trim(text);
  bool negative = false;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    negative = s[0] == '-';
    s.erase(0, 1);
  }
  if (s.empty()) throw Error(ErrorKind::invalid_argument, "empty integer literal");
  bool hex = s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X');
  for (std::size_t i = hex ? 2 : 0; i < s.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (hex ? !std::isxdigit(c) : !std::isdigit(c)) {
      throw Error(ErrorKind::invalid_argument, "not an integer: '" + std::string(text) + "'");
    }
  }
  BigInt v(s);
  return negative ? BigInt(-v) : v;
}

bool is_probable_prime(const BigInt& n) {
  if (n < 2) return false;
  return mp::miller_rabin_test(n, 32);
}

namespace {

BigInt mod(const BigInt& x, const BigInt& p) {
  BigInt r = x % p;
  if (r < 0) r += p;
  return r;
}

}  // namespace

CurveParams make_curve_params(const BigInt& p, const BigInt& a, const BigInt& b,
                              std::optional<BigInt> claimed_order) {
  if (p < 3) throw Error(ErrorKind::invalid_argument, "p must be >= 3, got " + p.str());
  if (!is_probable_prime(p)) {
    throw Error(ErrorKind::invalid_argument, "p = " + p.str() + " is not prime");
  }
  return CurveParams{p, mod(a, p), mod(b, p), std::move(claimed_order)};
}

bool is_singular(const CurveParams& c) {
  BigInt disc = 4 * c.a * c.a * c.a + 27 * c.b * c.b;
  return mod(disc, c.p) == 0;
}

const char* to_string(Flag f) {
  switch (f) {
    case Flag::singular: return "singular";
    case Flag::anomalous: return "anomalous";
    case Flag::smooth_order: return "smooth_order";
    case Flag::small_order: return "small_order";
    case Flag::low_embedding_degree_checked: return "low_embedding_degree_checked";
  }
  return "unknown";
}

const char* to_string(Executor e) {
  switch (e) {
    case Executor::local_bruteforce: return "local_bruteforce";
    case Executor::remote_cas: return "remote_cas";
    case Executor::skipped: return "skipped";
  }
  return "unknown";
}

std::uint64_t count_points(std::uint64_t p, std::uint64_t a, std::uint64_t b) {
  if (p >= (1ULL << 32)) throw Error(ErrorKind::invalid_argument, "p too large for local count");
  // roots[v] = number of y with y^2 = v (mod p)
  std::vector<std::uint8_t> roots(p, 0);
  for (std::uint64_t y = 0; y < p; ++y) ++roots[(y * y) % p];
  std::uint64_t count = 1;  // point at infinity
  for (std::uint64_t x = 0; x < p; ++x) {
    std::uint64_t rhs = ((x * x) % p * x + a * x + b) % p;
    count += roots[rhs];
  }
  return count;
}

namespace {

BigInt largest_prime_factor(BigInt n) {
  BigInt largest = 1;
  for (BigInt d = 2; d * d <= n; d += (d == 2 ? 1 : 2)) {
    while (n % d == 0) {
      largest = d;
      n /= d;
    }
  }
  if (n > 1) largest = n;
  return largest;
}

unsigned embedding_degree(const BigInt& p, const BigInt& q, unsigned max_k) {
  if (q <= 1 || q == p) return 0;
  BigInt pk = 1;
  BigInt pm = p % q;
  for (unsigned k = 1; k <= max_k; ++k) {
    pk = (pk * pm) % q;
    if (pk == 1) return k;
  }
  return 0;
}

class HttpCas final : public RemoteCas {
 public:
  explicit HttpCas(std::string endpoint) : endpoint_(std::move(endpoint)) {}

  std::string run(const std::string& script) override {
    auto resp = http::post(endpoint_, script, "text/plain", {}, std::chrono::seconds(300),
                           "remote-cas");
    if (resp.status != 200) {
      throw ProviderError("remote-cas", "HTTP " + std::to_string(resp.status) + ": " +
                                            resp.body.substr(0, 200),
                          http::is_transient_status(resp.status));
    }
    return resp.body;
  }

 private:
  std::string endpoint_;
};

// Applies the order-derived flags shared by both executors.
void classify(const CurveParams& c, const ExecutorConfig& cfg, CurveAssessment& out) {
  const BigInt& n = *out.order;
  std::string& ev = out.evidence;
  ev += "order = " + n.str() + "; ";
  BigInt deviation = n - (c.p + 1);
  if (deviation < 0) deviation = -deviation;
  if (deviation * deviation > 4 * c.p) ev += "WARNING: order violates the Hasse bound; ";
  if (n == c.p) {
    out.flags.insert(Flag::anomalous);
    ev += "anomalous (order equals p; discrete logs are solvable in polynomial time); ";
  }
  if (out.largest_prime_factor) {
    ev += "largest prime factor = " + out.largest_prime_factor->str() + "; ";
    if (*out.largest_prime_factor < cfg.smooth_bound) {
      out.flags.insert(Flag::smooth_order);
      ev += "order is smooth (Pohlig-Hellman applies); ";
    }
  }
  if (n < cfg.small_order_bound) {
    out.flags.insert(Flag::small_order);
    ev += "group order below 2^" + std::to_string(msb(cfg.small_order_bound)) + "; ";
  }
  if (out.embedding_degree) {
    out.flags.insert(Flag::low_embedding_degree_checked);
    if (*out.embedding_degree == 0) {
      ev += "embedding degree > " + std::to_string(cfg.max_embedding_degree) + "; ";
    } else {
      ev += "embedding degree " + std::to_string(*out.embedding_degree) +
            " (pairing transfer to F_p^k is feasible); ";
    }
  }
  if (c.claimed_order && *c.claimed_order != n) {
    ev += "claimed order " + c.claimed_order->str() + " does not match; ";
  }
  while (!ev.empty() && (ev.back() == ' ' || ev.back() == ';')) ev.pop_back();
}

std::optional<BigInt> find_value(const std::string& output, const std::string& key) {
  for (const auto& line : split_lines(output)) {
    auto t = trim(line);
    if (t.rfind(key + "=", 0) == 0) return parse_integer(t.substr(key.size() + 1));
  }
  return std::nullopt;
}

}  // namespace

std::string sage_script(const CurveParams& c, unsigned max_embedding_degree) {
  std::string s;
  s += "p = " + c.p.str() + "\n";
  s += "E = EllipticCurve(GF(p), [" + c.a.str() + ", " + c.b.str() + "])\n";
  s += "n = E.order()\n";
  s += "print(\"order=%d\" % n)\n";
  s += "q = max(prime_factors(n)) if n > 1 else 1\n";
  s += "print(\"largest_prime_factor=%d\" % q)\n";
  s += "k = next((k for k in range(1, " + std::to_string(max_embedding_degree + 1) +
       ") if q > 1 and q != p and power_mod(p, k, q) == 1), 0)\n";
  s += "print(\"embedding_degree=%d\" % k)\n";
  return s;
}

std::unique_ptr<RemoteCas> make_http_cas(std::string endpoint) {
  return std::make_unique<HttpCas>(std::move(endpoint));
}

CurveAssessment assess_curve(const CurveParams& c, const ExecutorConfig& cfg, RemoteCas* remote) {
  CurveAssessment out;
  if (is_singular(c)) {
    out.flags.insert(Flag::singular);
    out.executor = Executor::local_bruteforce;
    out.evidence = "discriminant 4a^3 + 27b^2 = 0 mod p: the curve is singular and not a group";
    return out;
  }
  if (c.p < cfg.local_bound) {
    out.executor = Executor::local_bruteforce;
    out.order = BigInt(count_points(c.p.convert_to<std::uint64_t>(), c.a.convert_to<std::uint64_t>(),
                                    c.b.convert_to<std::uint64_t>()));
    out.largest_prime_factor = largest_prime_factor(*out.order);
    out.embedding_degree =
        embedding_degree(c.p, *out.largest_prime_factor, cfg.max_embedding_degree);
    classify(c, cfg, out);
    return out;
  }
  if (!remote) {
    out.executor = Executor::skipped;
    out.evidence = "p has " + std::to_string(msb(c.p) + 1) +
                   " bits, beyond the local point-counting bound, and no remote executor is "
                   "configured; order not computed";
    return out;
  }
  auto output = remote->run(sage_script(c, cfg.max_embedding_degree));
  out.executor = Executor::remote_cas;
  out.order = find_value(output, "order");
  if (!out.order) {
    out.executor = Executor::skipped;
    out.evidence = "remote executor returned no order: " + output.substr(0, 200);
    return out;
  }
  out.largest_prime_factor = find_value(output, "largest_prime_factor");
  if (auto k = find_value(output, "embedding_degree")) {
    out.embedding_degree = k->convert_to<unsigned>();
  }
  classify(c, cfg, out);
  return out;
}

}  // namespace cryptaudit::curve
