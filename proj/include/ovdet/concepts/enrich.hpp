#pragma once

#include <cctype>
#include <optional>
#include <stdexcept>
#include <string>

#include "ovdet/concepts/dictionary.hpp"
#include "ovdet/concepts/embedding.hpp"

namespace ovdet {

struct RetrievalResult {
  std::string matched_name;
  std::optional<std::string> definition;
  double similarity = 0.0;
  bool exact = false;
};

// Exact match first; otherwise nearest dictionary name by embedding dot
// product. Ties break to the lexicographically smallest name.
inline RetrievalResult retrieve_nearest(const ConceptDictionary& dict, const std::string& name,
                                        const EmbeddingProvider& provider) {
  if (dict.empty()) throw std::runtime_error("empty dictionary");
  if (auto entry = lookup(dict, name)) {
    return RetrievalResult{entry->name, entry->definition, 1.0, true};
  }
  auto query = provider.embed(name);
  const ConceptEntry* best = nullptr;
  double best_sim = 0.0;
  for (const auto& [cand_name, entry] : dict.entries) {  // sorted: first hit wins ties
    double sim = dot(query, provider.embed(cand_name));
    if (!best || sim > best_sim) {
      best = &entry;
      best_sim = sim;
    }
  }
  return RetrievalResult{best->name, best->definition, best_sim, false};
}

// "{name}, {definition}." with the definition's leading character
// lowercased and its trailing period stripped; bare "{name}." when no
// definition can be found (missing match, empty dictionary, no provider).
inline std::string enrich(const ConceptDictionary& dict, const std::string& name,
                          const EmbeddingProvider* provider) {
  std::string base = normalize_name(name);
  if (base.empty()) throw std::runtime_error("empty concept name");

  std::optional<std::string> definition;
  if (auto entry = lookup(dict, base)) {
    definition = entry->definition;
  } else if (provider != nullptr && !dict.empty()) {
    definition = retrieve_nearest(dict, base, *provider).definition;
  }

  if (!definition.has_value() || definition->empty()) return base + ".";

  std::string def = trim(*definition);
  while (!def.empty() && def.back() == '.') def.pop_back();
  def = trim(def);
  if (def.empty()) return base + ".";
  def[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(def[0])));
  return base + ", " + def + ".";
}

}  // namespace ovdet
