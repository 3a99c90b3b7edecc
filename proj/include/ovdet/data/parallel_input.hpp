#pragma once

#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "ovdet/concepts/dictionary.hpp"
#include "ovdet/concepts/enrich.hpp"
#include "ovdet/concepts/negatives.hpp"
#include "ovdet/core/hash.hpp"
#include "ovdet/data/records.hpp"

namespace ovdet {

// One record's text-side input: the k distinct positive concepts in
// first-occurrence order, padded to N with sampled negatives (or empty
// pad strings when negative sampling is off).
struct ParalleledInput {
  std::vector<std::string> concepts;        // N final text entries
  std::vector<std::string> negative_names;  // entries [k,N) before enrichment
  int positive_count = 0;                   // k
  std::vector<int> concept_index_of_object; // parallel to record.objects, -1 = dropped
  RecordKind kind = RecordKind::detection;
};

struct ParallelOptions {
  bool enrich = true;
  bool sample_negatives = true;
  // Pool negatives are drawn from; nullptr means the dictionary names.
  // Detection data typically uses its label space here.
  const std::vector<std::string>* negative_pool = nullptr;
  // Names never used as negatives (zero-shot protocol: held-out concept
  // names stay out of the training text entirely).
  const std::set<std::string>* negative_exclude = nullptr;
};

inline ParalleledInput build_parallel_input(const UnifiedRecord& record,
                                            const ConceptDictionary& dict, int n,
                                            const ParallelOptions& options,
                                            const EmbeddingProvider* provider, uint64_t seed) {
  ParalleledInput out;
  out.kind = record.kind;

  // distinct positives, first-occurrence order
  std::vector<std::string> positives;
  std::unordered_map<std::string, int> index_of;
  out.concept_index_of_object.reserve(record.objects.size());
  for (const auto& obj : record.objects) {
    std::string key = normalize_name(obj.concept_name);
    auto it = index_of.find(key);
    if (it == index_of.end()) {
      if (static_cast<int>(positives.size()) < n) {
        int idx = static_cast<int>(positives.size());
        positives.push_back(key);
        index_of[key] = idx;
        out.concept_index_of_object.push_back(idx);
      } else {
        index_of[key] = -1;  // truncated: N exhausted
        out.concept_index_of_object.push_back(-1);
      }
    } else {
      out.concept_index_of_object.push_back(it->second);
    }
  }
  out.positive_count = static_cast<int>(positives.size());

  // pad to N
  if (options.sample_negatives) {
    std::set<std::string> exclude(positives.begin(), positives.end());
    if (options.negative_exclude)
      exclude.insert(options.negative_exclude->begin(), options.negative_exclude->end());
    const size_t need = static_cast<size_t>(n - out.positive_count);
    if (options.negative_pool == nullptr) {
      out.negative_names =
          sample_negatives_from_pool(dict.names(), exclude, need, child_seed(seed, "negatives"));
    } else {
      // draw from the provided pool first; a desk-scale label space can
      // be smaller than N, so the dictionary tops up the remainder
      std::set<std::string> pool_set;
      for (const auto& name : *options.negative_pool)
        if (!exclude.count(name)) pool_set.insert(name);
      size_t from_pool = std::min(need, pool_set.size());
      out.negative_names = sample_negatives_from_pool(*options.negative_pool, exclude, from_pool,
                                                      child_seed(seed, "negatives"));
      if (from_pool < need) {
        std::set<std::string> exclude2 = exclude;
        for (const auto& name : out.negative_names) exclude2.insert(name);
        auto extra = sample_negatives_from_pool(dict.names(), exclude2, need - from_pool,
                                                child_seed(seed, "negatives-topup"));
        out.negative_names.insert(out.negative_names.end(), extra.begin(), extra.end());
      }
    }
  } else {
    out.negative_names.assign(static_cast<size_t>(n - out.positive_count), "");
  }

  out.concepts.reserve(n);
  for (const auto& name : positives)
    out.concepts.push_back(options.enrich ? enrich(dict, name, provider) : name);
  for (const auto& name : out.negative_names) {
    if (name.empty())
      out.concepts.push_back("");  // pad stays empty
    else
      out.concepts.push_back(options.enrich ? enrich(dict, name, provider) : name);
  }
  return out;
}

// Stage-level input hashes for the ablation toggles: concept enrichment
// is visible in the positive entry texts, negative sampling in the
// pre-enrichment negative names.
inline uint64_t positive_texts_hash(const ParalleledInput& pi) {
  std::vector<std::string> pos(pi.concepts.begin(), pi.concepts.begin() + pi.positive_count);
  return hash_strings(pos);
}

inline uint64_t negative_names_hash(const ParalleledInput& pi) {
  return hash_strings(pi.negative_names);
}

}  // namespace ovdet
