#pragma once

#include <algorithm>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "ovdet/concepts/embedding.hpp"
#include "ovdet/core/image.hpp"

namespace ovdet {

// Dual-encoder scorer used for pseudo labeling. Both sides return
// L2-normalized vectors so a dot product is the cosine score.
class RegionScorer {
 public:
  virtual ~RegionScorer() = default;
  virtual std::vector<double> embed_image_region(const Image& crop) = 0;
  virtual std::vector<double> embed_text(const std::string& prompt) = 0;
  virtual size_t dim() const = 0;
  virtual std::string id() const = 0;
};

// Deterministic offline scorer: trigram hashes for text, a hashed
// projection of a downsampled crop for images. No semantics; it exists
// so the pipeline runs end to end without a pre-trained model.
class StubScorer final : public RegionScorer {
 public:
  explicit StubScorer(size_t dim = 64) : dim_(dim), text_(dim) {}

  std::vector<double> embed_image_region(const Image& crop) override {
    Image small = resize_bilinear(crop, 4, 4);
    std::vector<double> v(dim_, 0.0);
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x)
        for (int c = 0; c < small.channels; ++c) {
          uint64_t h = fnv1a("px" + std::to_string((y * 4 + x) * small.channels + c));
          double px = small.at(y, x, c);
          for (int rep = 0; rep < 4; ++rep) {
            h = hash_combine(h, 0x9e3779b97f4a7c15ull + rep);
            double w = ((h >> 16) % 2001) / 1000.0 - 1.0;
            v[h % dim_] += w * px;
          }
        }
    l2_normalize(v);
    if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) v[0] = 1.0;
    return v;
  }

  std::vector<double> embed_text(const std::string& prompt) override { return text_.embed(prompt); }

  size_t dim() const override { return dim_; }
  std::string id() const override { return "stub-" + std::to_string(dim_); }

 private:
  size_t dim_;
  TrigramHashProvider text_;
};

// Fixture scorer: explicit text table (keyed by the exact prompt text),
// image side delegated to a stub or an injected function. Raw category
// names are accepted as table keys for convenience.
class TableScorer final : public RegionScorer {
 public:
  using ImageFn = std::function<std::vector<double>(const Image&)>;

  TableScorer(std::unordered_map<std::string, std::vector<double>> text_table, size_t dim,
              ImageFn image_fn = nullptr, std::string id = "table")
      : text_table_(std::move(text_table)), dim_(dim), image_fn_(std::move(image_fn)),
        id_(std::move(id)), stub_(dim) {
    for (auto& [_, v] : text_table_) l2_normalize(v);
  }

  static std::unique_ptr<TableScorer> from_file(const std::string& path, size_t dim_hint = 0) {
    std::unordered_map<std::string, std::vector<double>> table;
    size_t dim = dim_hint;
    for_each_jsonl(path, [&](size_t lineno, const json& j) {
      if (!j.is_object() || !j.contains("name") || !j.contains("vector"))
        throw std::runtime_error(path + ": malformed line " + std::to_string(lineno));
      auto vec = j.at("vector").get<std::vector<double>>();
      if (dim == 0) dim = vec.size();
      if (vec.size() != dim)
        throw std::runtime_error(path + ": inconsistent vector dimension at line " +
                                 std::to_string(lineno));
      table[j.at("name").get<std::string>()] = std::move(vec);
    });
    if (dim == 0) throw std::runtime_error(path + ": empty scorer table");
    return std::make_unique<TableScorer>(std::move(table), dim, nullptr,
                                         "table-" + hash_hex(fnv1a(path)));
  }

  std::vector<double> embed_image_region(const Image& crop) override {
    if (image_fn_) {
      auto v = image_fn_(crop);
      l2_normalize(v);
      return v;
    }
    return stub_.embed_image_region(crop);
  }

  std::vector<double> embed_text(const std::string& prompt) override {
    auto it = text_table_.find(prompt);
    if (it == text_table_.end()) {
      // allow raw category names as keys: strip "a photo of a {x}."
      static const std::string kPrefix = "a photo of a ";
      if (prompt.rfind(kPrefix, 0) == 0 && prompt.size() > kPrefix.size() + 1 &&
          prompt.back() == '.') {
        it = text_table_.find(prompt.substr(kPrefix.size(), prompt.size() - kPrefix.size() - 1));
      }
    }
    if (it == text_table_.end())
      throw std::runtime_error("scorer table has no entry for \"" + prompt + "\"");
    return it->second;
  }

  size_t dim() const override { return dim_; }
  std::string id() const override { return id_; }

 private:
  std::unordered_map<std::string, std::vector<double>> text_table_;
  size_t dim_;
  ImageFn image_fn_;
  std::string id_;
  StubScorer stub_;
};

// Wraps a scorer and counts calls; lets tests assert that a warm cache
// makes no scorer calls.
class CountingScorer final : public RegionScorer {
 public:
  explicit CountingScorer(RegionScorer& inner) : inner_(inner) {}

  std::vector<double> embed_image_region(const Image& crop) override {
    ++image_calls;
    return inner_.embed_image_region(crop);
  }
  std::vector<double> embed_text(const std::string& prompt) override {
    ++text_calls;
    return inner_.embed_text(prompt);
  }
  size_t dim() const override { return inner_.dim(); }
  std::string id() const override { return inner_.id(); }

  size_t image_calls = 0;
  size_t text_calls = 0;

 private:
  RegionScorer& inner_;
};

}  // namespace ovdet
