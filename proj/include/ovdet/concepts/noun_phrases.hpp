#pragma once

#include <cctype>
#include <string>
#include <unordered_set>
#include <vector>

#include "ovdet/concepts/wordlists.hpp"
#include "ovdet/core/text.hpp"

namespace ovdet {

// Naive -s/-es stemmer, lookup driven: a word is only folded when the
// candidate stem is itself in the noun list ("dogs" -> "dog", but
// "glass" stays "glass").
inline std::string fold_plural(const std::string& word) {
  const auto& nouns = noun_set();
  if (nouns.count(word)) return word;
  if (word.size() > 2 && word.ends_with("es")) {
    std::string stem = word.substr(0, word.size() - 2);
    if (nouns.count(stem)) return stem;
  }
  if (word.size() > 1 && word.ends_with("s")) {
    std::string stem = word.substr(0, word.size() - 1);
    if (nouns.count(stem)) return stem;
  }
  return word;
}

inline bool is_noun(const std::string& word) { return noun_set().count(fold_plural(word)) > 0; }

// Deterministic caption chunker. Lowercases, splits blocks at punctuation
// and stopwords (digit tokens count as stopwords), folds plurals, and
// emits each block's prefix up to its last noun. Duplicates collapse in
// first-occurrence order.
inline std::vector<std::string> extract_noun_phrases(const std::string& caption) {
  const auto& stops = stopword_set();

  std::vector<std::vector<std::string>> blocks;
  std::vector<std::string> cur;
  auto flush = [&] {
    if (!cur.empty()) {
      blocks.push_back(cur);
      cur.clear();
    }
  };

  std::string token;
  auto end_token = [&] {
    if (token.empty()) return;
    bool all_digits = true;
    for (char c : token)
      if (!std::isdigit(static_cast<unsigned char>(c))) all_digits = false;
    if (all_digits || stops.count(token)) {
      flush();  // stopword breaks the run
    } else {
      cur.push_back(fold_plural(token));
    }
    token.clear();
  };

  for (char c : caption) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || c == '\'') {
      token.push_back(static_cast<char>(std::tolower(u)));
    } else {
      end_token();
      if (!std::isspace(u)) flush();  // punctuation breaks the run too
    }
  }
  end_token();
  flush();

  std::vector<std::string> phrases;
  std::unordered_set<std::string> seen;
  for (const auto& block : blocks) {
    int last_noun = -1;
    for (int i = 0; i < static_cast<int>(block.size()); ++i)
      if (noun_set().count(block[i])) last_noun = i;
    if (last_noun < 0) continue;
    std::string phrase = block[0];
    for (int i = 1; i <= last_noun; ++i) phrase += " " + block[i];
    if (seen.insert(phrase).second) phrases.push_back(phrase);
  }
  return phrases;
}

}  // namespace ovdet
