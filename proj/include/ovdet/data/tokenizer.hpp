#pragma once

#include <map>
#include <string>
#include <vector>

#include "ovdet/concepts/dictionary.hpp"
#include "ovdet/core/hash.hpp"
#include "ovdet/core/text.hpp"

namespace ovdet {

constexpr int kPadTokenId = 0;
constexpr int kEosTokenId = 1;

struct TokenSeq {
  std::vector<int> ids;  // ends with EOS, length <= max_len
  int eos_index = 0;

  bool operator==(const TokenSeq&) const = default;
};

// Word tokenizer over a vocabulary built from the dictionary (names and
// definitions); out-of-vocabulary words hash into a fixed bucket range.
class Tokenizer {
 public:
  explicit Tokenizer(const ConceptDictionary& dict, int max_len = 48, int oov_buckets = 64)
      : max_len_(max_len), oov_buckets_(oov_buckets) {
    int next = 2;  // 0 = pad, 1 = eos
    for (const auto& [name, entry] : dict.entries) {
      for (const auto& w : split_words(name)) intern(w, next);
      if (entry.definition)
        for (const auto& w : split_words(*entry.definition)) intern(w, next);
    }
    vocab_words_ = next - 2;
  }

  TokenSeq tokenize(const std::string& text) const {
    TokenSeq seq;
    for (const auto& w : split_words(text)) {
      if (static_cast<int>(seq.ids.size()) >= max_len_ - 1) break;
      auto it = word_to_id_.find(w);
      int id = it != word_to_id_.end()
                   ? it->second
                   : 2 + vocab_words_ + static_cast<int>(fnv1a(w) % oov_buckets_);
      seq.ids.push_back(id);
    }
    seq.ids.push_back(kEosTokenId);
    seq.eos_index = static_cast<int>(seq.ids.size()) - 1;
    return seq;
  }

  // total id space: pad + eos + vocab + OOV buckets
  int table_size() const { return 2 + vocab_words_ + oov_buckets_; }
  int max_len() const { return max_len_; }

 private:
  void intern(const std::string& w, int& next) {
    if (!word_to_id_.count(w)) word_to_id_[w] = next++;
  }

  std::map<std::string, int> word_to_id_;  // ordered: ids deterministic
  int vocab_words_ = 0;
  int max_len_;
  int oov_buckets_;
};

}  // namespace ovdet
