#pragma once

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ovdet/concepts/dictionary.hpp"
#include "ovdet/core/rng.hpp"

namespace ovdet {

// k distinct names drawn uniformly without replacement from the pool
// minus positives. Deterministic for a fixed seed.
inline std::vector<std::string> sample_negatives_from_pool(const std::vector<std::string>& pool,
                                                           const std::set<std::string>& positives,
                                                           size_t k, uint64_t seed) {
  std::vector<std::string> available;
  available.reserve(pool.size());
  for (const auto& name : pool)
    if (!positives.count(name)) available.push_back(name);
  if (k > available.size()) throw std::runtime_error("insufficient negatives");

  Rng rng(seed);
  auto idx = sample_indices(rng, available.size(), k);
  std::vector<std::string> out;
  out.reserve(k);
  for (size_t i : idx) out.push_back(available[i]);
  return out;
}

inline std::vector<std::string> sample_negatives(const ConceptDictionary& dict,
                                                 const std::set<std::string>& positives, size_t k,
                                                 uint64_t seed) {
  return sample_negatives_from_pool(dict.names(), positives, k, seed);
}

}  // namespace ovdet
