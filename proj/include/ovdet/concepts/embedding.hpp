#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "ovdet/core/hash.hpp"
#include "ovdet/core/jsonl.hpp"
#include "ovdet/core/text.hpp"

namespace ovdet {

inline void l2_normalize(std::vector<double>& v) {
  double n = 0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  if (n > 0)
    for (double& x : v) x /= n;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::runtime_error("embedding dimension mismatch");
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Text embedding backend. Implementations must be deterministic for a
// fixed input and return unit-norm vectors of a fixed dimension.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::vector<double> embed(const std::string& text) const = 0;
  virtual size_t dim() const = 0;
  // Stable identifier used in on-disk cache keys.
  virtual std::string id() const = 0;
};

// Hashed character-trigram bag, L2 normalized. No semantics, but cheap,
// deterministic and well spread -- the offline stand-in for a pre-trained
// text encoder.
class TrigramHashProvider final : public EmbeddingProvider {
 public:
  explicit TrigramHashProvider(size_t dim = 64) : dim_(dim) {
    if (dim_ == 0) throw std::runtime_error("embedding dim must be positive");
  }

  std::vector<double> embed(const std::string& text) const override {
    std::vector<double> v(dim_, 0.0);
    std::string s = "^" + normalize_name(text) + "$";
    for (size_t i = 0; i + 3 <= s.size(); ++i) {
      uint64_t h = fnv1a(std::string_view(s).substr(i, 3));
      v[h % dim_] += (h >> 32) % 2 == 0 ? 1.0 : -1.0;
    }
    if (s.size() < 3) v[fnv1a(s) % dim_] = 1.0;
    l2_normalize(v);
    if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) v[0] = 1.0;
    return v;
  }

  size_t dim() const override { return dim_; }
  std::string id() const override { return "trigram-" + std::to_string(dim_); }

 private:
  size_t dim_;
};

// Fixed table loaded from JSON Lines {"name": text, "vector": [...]}.
// Unknown texts are an error; vectors are re-normalized on load.
class FileTableProvider final : public EmbeddingProvider {
 public:
  explicit FileTableProvider(const std::string& path) : id_("file-") {
    for_each_jsonl(path, [&](size_t lineno, const json& j) {
      if (!j.is_object() || !j.contains("name") || !j.contains("vector"))
        throw std::runtime_error(path + ": malformed line " + std::to_string(lineno));
      std::string name = normalize_name(j.at("name").get<std::string>());
      std::vector<double> vec = j.at("vector").get<std::vector<double>>();
      if (vec.empty())
        throw std::runtime_error(path + ": malformed line " + std::to_string(lineno));
      if (dim_ == 0) dim_ = vec.size();
      if (vec.size() != dim_)
        throw std::runtime_error(path + ": inconsistent vector dimension at line " +
                                 std::to_string(lineno));
      l2_normalize(vec);
      table_[name] = std::move(vec);
    });
    id_ += hash_hex(fnv1a(path));
  }

  explicit FileTableProvider(std::unordered_map<std::string, std::vector<double>> table,
                             std::string id = "table")
      : table_(std::move(table)), id_(std::move(id)) {
    for (auto& [_, v] : table_) {
      if (dim_ == 0) dim_ = v.size();
      l2_normalize(v);
    }
  }

  std::vector<double> embed(const std::string& text) const override {
    auto it = table_.find(normalize_name(text));
    if (it == table_.end())
      throw std::runtime_error("embedding table has no entry for \"" + text + "\"");
    return it->second;
  }

  size_t dim() const override { return dim_; }
  std::string id() const override { return id_; }

 private:
  std::unordered_map<std::string, std::vector<double>> table_;
  size_t dim_ = 0;
  std::string id_;
};

}  // namespace ovdet
