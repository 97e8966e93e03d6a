#include "embedding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <set>

#include "corpus.hpp"
#include "errors.hpp"
#include "http.hpp"
#include "util.hpp"

namespace cryptaudit::embedding {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm(const std::vector<double>& v) { return std::sqrt(dot(v, v)); }

void normalize(std::vector<double>& v, const std::string& provider_tag) {
  double n = norm(v);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw ProviderError(provider_tag, "provider returned a zero or non-finite vector");
  }
  for (auto& x : v) x /= n;
}

EmbeddingVector EmbeddingProvider::embed(const std::string& text) {
  auto out = embed_batch({text});
  if (out.size() != 1) throw ProviderError(tag(), "expected exactly one embedding");
  return std::move(out.front());
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

const std::set<std::string, std::less<>>& stopwords() {
  static const std::set<std::string, std::less<>> words = {
      "a",    "an",   "and",  "are", "as",   "at",   "be",   "by",   "for", "from",
      "has",  "in",   "is",   "it",  "its",  "of",   "on",   "or",   "that", "the",
      "this", "to",   "was",  "with", "which", "when", "what", "how", "can", "does",
  };
  return words;
}

std::set<std::string> tokenize(std::string_view text) {
  std::set<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (cur.size() >= 2 && !stopwords().count(cur)) tokens.insert(cur);
    cur.clear();
  };
  for (unsigned char c : text) {
    if (std::isalnum(c) || c >= 0x80) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

}  // namespace

HashEmbeddingProvider::HashEmbeddingProvider(Mode mode, std::size_t dimension, std::uint64_t seed)
    : mode_(mode), dimension_(dimension), seed_(seed) {
  if (dimension_ == 0) throw Error(ErrorKind::invalid_argument, "dimension must be positive");
}

std::string HashEmbeddingProvider::tag() const {
  return std::string(mode_ == Mode::whole_text ? "mock-hash" : "mock-bow") + "-d" +
         std::to_string(dimension_);
}

void HashEmbeddingProvider::add_hashed(std::string_view key, double weight,
                                       std::vector<double>& acc) const {
  std::uint64_t state = fnv1a64(key, 0xcbf29ce484222325ULL ^ seed_);
  std::vector<double> v(dimension_);
  for (auto& x : v) {
    // 53 random bits mapped onto [-1, 1)
    x = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-52 - 1.0;
  }
  double n = norm(v);
  for (std::size_t i = 0; i < dimension_; ++i) acc[i] += weight * v[i] / n;
}

std::vector<EmbeddingVector> HashEmbeddingProvider::embed_batch(
    const std::vector<std::string>& texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    if (text.empty()) throw Error(ErrorKind::invalid_argument, "cannot embed empty text");
    std::vector<double> acc(dimension_, 0.0);
    if (mode_ == Mode::whole_text) {
      add_hashed(text, 1.0, acc);
    } else {
      for (const auto& tok : tokenize(text)) add_hashed("tok:" + tok, 1.0, acc);
      add_hashed(text, 0.1, acc);
    }
    normalize(acc, tag());
    out.push_back({std::move(acc), tag()});
  }
  return out;
}

// ---------------------------------------------------------------------------

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string endpoint, std::string model,
                                             std::string api_key, std::size_t batch_size,
                                             std::chrono::seconds timeout)
    : endpoint_(std::move(endpoint)),
      model_(std::move(model)),
      api_key_(std::move(api_key)),
      batch_size_(std::max<std::size_t>(1, batch_size)),
      timeout_(timeout) {}

std::vector<EmbeddingVector> HttpEmbeddingProvider::embed_batch(
    const std::vector<std::string>& texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (std::size_t begin = 0; begin < texts.size(); begin += batch_size_) {
    auto end = std::min(texts.size(), begin + batch_size_);
    json req = {{"model", model_}, {"input", json::array()}};
    for (auto i = begin; i < end; ++i) {
      if (texts[i].empty()) throw Error(ErrorKind::invalid_argument, "cannot embed empty text");
      req["input"].push_back(texts[i]);
    }
    http::Headers headers;
    if (!api_key_.empty()) headers.emplace_back("Authorization", "Bearer " + api_key_);
    auto resp = http::post(endpoint_, req.dump(), "application/json", headers, timeout_, tag());
    if (resp.status != 200) {
      throw ProviderError(tag(), "HTTP " + std::to_string(resp.status) + ": " + resp.body.substr(0, 200),
                          http::is_transient_status(resp.status));
    }
    json body;
    try {
      body = json::parse(resp.body);
    } catch (const json::parse_error& e) {
      throw ProviderError(tag(), std::string("malformed embeddings reply: ") + e.what());
    }
    if (!body.contains("data") || !body["data"].is_array() || body["data"].size() != end - begin) {
      throw ProviderError(tag(), "embeddings reply has wrong number of vectors");
    }
    std::vector<std::vector<double>> batch(end - begin);
    std::size_t pos = 0;
    for (const auto& item : body["data"]) {
      std::size_t idx = item.value("index", pos);
      ++pos;
      if (idx >= batch.size() || !item.contains("embedding")) {
        throw ProviderError(tag(), "embeddings reply has a bad index");
      }
      batch[idx] = item["embedding"].get<std::vector<double>>();
    }
    for (auto& v : batch) {
      std::size_t unset = 0;
      dimension_.compare_exchange_strong(unset, v.size());
      if (v.size() != dimension_.load() || v.empty()) {
        throw ProviderError(tag(), "dimension changed between replies (" + std::to_string(v.size()) +
                                       " vs " + std::to_string(dimension_) + ")");
      }
      normalize(v, tag());
      out.push_back({std::move(v), tag()});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

VectorIndex::VectorIndex(std::size_t dimension, std::string provider_tag)
    : dimension_(dimension), provider_tag_(std::move(provider_tag)) {}

void VectorIndex::add(std::string chunk_id, const EmbeddingVector& vec) {
  if (vec.values.size() != dimension_) {
    throw Error(ErrorKind::invalid_argument,
                "dimension mismatch: index has " + std::to_string(dimension_) + ", vector has " +
                    std::to_string(vec.values.size()));
  }
  if (!vec.provider_tag.empty() && vec.provider_tag != provider_tag_) {
    throw ProviderError(vec.provider_tag, "cannot add to an index built with '" + provider_tag_ + "'");
  }
  if (!id_set_.insert(chunk_id).second) {
    throw Error(ErrorKind::invalid_argument, "duplicate chunk id in index: " + chunk_id);
  }
  ids_.push_back(std::move(chunk_id));
  values_.insert(values_.end(), vec.values.begin(), vec.values.end());
}

std::vector<double> VectorIndex::vector(std::size_t i) const {
  return {data(i), data(i) + dimension_};
}

std::vector<ScoredHit> similarity_search(const VectorIndex& index, const EmbeddingVector& query,
                                         std::size_t k) {
  if (query.values.size() != index.dimension()) {
    throw Error(ErrorKind::invalid_argument,
                "query dimension " + std::to_string(query.values.size()) +
                    " does not match index dimension " + std::to_string(index.dimension()));
  }
  if (!query.provider_tag.empty() && query.provider_tag != index.provider_tag()) {
    throw ProviderError(query.provider_tag,
                        "index was built with provider '" + index.provider_tag() +
                            "'; rebuild the index with the current embedding provider");
  }
  struct Scored {
    std::size_t pos;
    double s;
  };
  std::vector<Scored> all(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    const double* row = index.data(i);
    double d = 0.0;
    for (std::size_t j = 0; j < index.dimension(); ++j) d += row[j] * query.values[j];
    all[i] = {i, 1.0 - d};
  }
  auto take = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(),
                    [](const Scored& a, const Scored& b) {
                      if (a.s != b.s) return a.s < b.s;
                      return a.pos < b.pos;
                    });
  std::vector<ScoredHit> hits;
  hits.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    hits.push_back({index.id(all[i].pos), all[i].s, 1.0 - all[i].s});
  }
  return hits;
}

VectorIndex build_index(const corpus::Corpus& corpus, EmbeddingProvider& provider,
                        std::size_t batch_size) {
  std::vector<EmbeddingVector> vecs;
  const auto& chunks = corpus.chunks();
  for (std::size_t begin = 0; begin < chunks.size(); begin += batch_size) {
    std::vector<std::string> keys;
    for (auto i = begin; i < std::min(chunks.size(), begin + batch_size); ++i) {
      keys.push_back(chunks[i].retrieval_key);
    }
    auto batch = provider.embed_batch(keys);
    for (auto& v : batch) vecs.push_back(std::move(v));
  }
  std::size_t dim = vecs.empty() ? provider.dimension() : vecs.front().values.size();
  VectorIndex index(dim, provider.tag());
  for (std::size_t i = 0; i < chunks.size(); ++i) index.add(chunks[i].id, vecs[i]);
  return index;
}

// ---------------------------------------------------------------------------
// Binary format, little-endian:
//   "CAVIDX01" | u32 dimension | u32 tag length | tag | u64 count |
//   count x (u32 id length | id | dimension x f64)

namespace {

constexpr char kMagic[8] = {'C', 'A', 'V', 'I', 'D', 'X', '0', '1'};

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
  }
}

class Reader {
 public:
  explicit Reader(std::string data) : data_(std::move(data)) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return v;
  }

  std::string bytes(std::size_t n) {
    need(n);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw ParseError(0, "index file is truncated");
  }

  std::string data_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_index(const VectorIndex& index, const std::filesystem::path& path) {
  std::string out(kMagic, sizeof kMagic);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(index.dimension()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(index.provider_tag().size()));
  out += index.provider_tag();
  put_le<std::uint64_t>(out, index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(index.id(i).size()));
    out += index.id(i);
    for (std::size_t j = 0; j < index.dimension(); ++j) {
      put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(index.data(i)[j]));
    }
  }
  write_file(path, out);
}

VectorIndex load_index(const std::filesystem::path& path) {
  Reader in(read_file(path));
  if (in.bytes(sizeof kMagic) != std::string(kMagic, sizeof kMagic)) {
    throw ParseError(0, path.string() + " is not a vector index file");
  }
  auto dim = in.get<std::uint32_t>();
  auto tag = in.bytes(in.get<std::uint32_t>());
  auto count = in.get<std::uint64_t>();
  VectorIndex index(dim, tag);
  for (std::uint64_t i = 0; i < count; ++i) {
    auto id = in.bytes(in.get<std::uint32_t>());
    EmbeddingVector v;
    v.values.resize(dim);
    for (auto& x : v.values) x = std::bit_cast<double>(in.get<std::uint64_t>());
    index.add(std::move(id), v);
  }
  if (!in.done()) throw ParseError(0, path.string() + " has trailing bytes");
  return index;
}

}  // namespace cryptaudit::embedding
