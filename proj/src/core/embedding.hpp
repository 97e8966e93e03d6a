#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace cryptaudit::corpus {
class Corpus;
}

namespace cryptaudit::embedding {

struct EmbeddingVector {
  std::vector<double> values;
  // Identifies the provider/model that produced the vector; empty means
  // "unknown" and skips the provider check.
  std::string provider_tag;
};

double norm(const std::vector<double>& v);
double dot(const std::vector<double>& a, const std::vector<double>& b);
// Scales to unit length; throws when the vector is all zeros.
void normalize(std::vector<double>& v, const std::string& provider_tag);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual std::string tag() const = 0;
  virtual std::size_t dimension() const = 0;
  // One unit vector per text, same order. Texts must be non-empty.
  virtual std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) = 0;

  EmbeddingVector embed(const std::string& text);
};

// Offline provider. whole_text expands a seeded hash of the exact text into a
// pseudo-random vector. tokens sums per-token pseudo-random vectors (plus a
// small whole-text term) so that texts sharing vocabulary land close together.
class HashEmbeddingProvider final : public EmbeddingProvider {
 public:
  enum class Mode { whole_text, tokens };

  explicit HashEmbeddingProvider(Mode mode = Mode::whole_text, std::size_t dimension = 64,
                                 std::uint64_t seed = 0x5eed);

  std::string tag() const override;
  std::size_t dimension() const override { return dimension_; }
  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;

 private:
  void add_hashed(std::string_view key, double weight, std::vector<double>& acc) const;

  Mode mode_;
  std::size_t dimension_;
  std::uint64_t seed_;
};

// OpenAI-style embeddings endpoint: {"model", "input": [...]} ->
// {"data": [{"index", "embedding"}]}.
class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  HttpEmbeddingProvider(std::string endpoint, std::string model, std::string api_key,
                        std::size_t batch_size = 64,
                        std::chrono::seconds timeout = std::chrono::seconds(60));

  std::string tag() const override { return "http:" + model_; }
  std::size_t dimension() const override { return dimension_.load(); }
  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;

 private:
  std::string endpoint_;
  std::string model_;
  std::string api_key_;
  std::size_t batch_size_;
  std::chrono::seconds timeout_;
  std::atomic<std::size_t> dimension_{0};  // learned from the first reply
};

struct ScoredHit {
  std::string chunk_id;
  double s = 0.0;        // cosine distance, 1 - cos
  double cos_sim = 0.0;  // 1 - s
};

class VectorIndex {
 public:
  VectorIndex(std::size_t dimension, std::string provider_tag);

  void add(std::string chunk_id, const EmbeddingVector& vec);

  std::size_t dimension() const noexcept { return dimension_; }
  const std::string& provider_tag() const noexcept { return provider_tag_; }
  std::size_t size() const noexcept { return ids_.size(); }
  const std::string& id(std::size_t i) const { return ids_[i]; }
  std::vector<double> vector(std::size_t i) const;
  const double* data(std::size_t i) const { return values_.data() + i * dimension_; }

  bool operator==(const VectorIndex& other) const = default;

 private:
  std::size_t dimension_;
  std::string provider_tag_;
  std::vector<std::string> ids_;
  std::unordered_set<std::string> id_set_;
  std::vector<double> values_;
};

// Exhaustive k-nearest scan under cosine distance.
std::vector<ScoredHit> similarity_search(const VectorIndex& index, const EmbeddingVector& query,
                                         std::size_t k);

VectorIndex build_index(const corpus::Corpus& corpus, EmbeddingProvider& provider,
                        std::size_t batch_size = 64);

void save_index(const VectorIndex& index, const std::filesystem::path& path);
VectorIndex load_index(const std::filesystem::path& path);

}  // namespace cryptaudit::embedding
