#pragma once

// Brute-force reference implementations. They share no code with the library
// beyond the embedding provider and the data types they compare.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "embedding.hpp"

namespace oracle {

struct Hit {
  std::size_t number;
  std::string id;
  double cos_sim;
};

// Scores every chunk, sorts by similarity (ties by insertion order), keeps k,
// then drops everything below tau and numbers the survivors from 1.
inline std::vector<Hit> retrieve(const std::vector<std::string>& ids,
                                 const std::vector<std::vector<double>>& vectors,
                                 const std::vector<double>& query, std::size_t k, double tau) {
  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    double acc = 0;
    for (std::size_t d = 0; d < query.size(); ++d) acc += vectors[i][d] * query[d];
    scored.emplace_back(acc, i);
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  std::vector<Hit> out;
  for (std::size_t r = 0; r < std::min(k, scored.size()); ++r) {
    if (scored[r].first < tau) continue;
    out.push_back({out.size() + 1, ids[scored[r].second], scored[r].first});
  }
  return out;
}

// #{(x, y) in F_p^2 : y^2 = x^3 + ax + b} + 1, by enumerating both coordinates.
inline std::uint64_t count_points(std::uint64_t p, std::uint64_t a, std::uint64_t b) {
  std::uint64_t n = 1;
  for (std::uint64_t x = 0; x < p; ++x) {
    std::uint64_t rhs = (x * x % p * x + a * x + b) % p;
    for (std::uint64_t y = 0; y < p; ++y) {
      if (y * y % p == rhs) ++n;
    }
  }
  return n;
}

// x^3 + ax + b has a repeated root in F_p (p > 3 prime) iff some x is a
// common root of the cubic and its derivative.
inline bool has_repeated_root(std::uint64_t p, std::uint64_t a, std::uint64_t b) {
  for (std::uint64_t x = 0; x < p; ++x) {
    bool root = (x * x % p * x + a * x + b) % p == 0;
    bool droot = (3 * x * x + a) % p == 0;
    if (root && droot) return true;
  }
  return false;
}

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

// A quadratic non-residue mod p, used to build the quadratic twist.
inline std::uint64_t non_residue(std::uint64_t p) {
  for (std::uint64_t c = 2; c < p; ++c) {
    bool square = false;
    for (std::uint64_t y = 1; y < p && !square; ++y) square = y * y % p == c;
    if (!square) return c;
  }
  return 0;
}

}  // namespace oracle
