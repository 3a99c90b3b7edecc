#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "ovdet/concepts/dictionary.hpp"
#include "ovdet/core/hash.hpp"
#include "ovdet/core/jsonl.hpp"
#include "ovdet/data/records.hpp"
#include "ovdet/pseudo/proposals.hpp"
#include "ovdet/pseudo/scorer.hpp"

namespace ovdet {

inline std::string format_prompt(const std::string& category) {
  if (trim(category).empty()) throw std::runtime_error("empty category");
  return "a photo of a " + category + ".";
}

using ConceptEmbeddings = std::map<std::string, std::vector<double>>;

// One prompt embedding per dictionary concept, cached on disk keyed by
// (dictionary hash, scorer id). A warm cache makes no scorer calls.
inline ConceptEmbeddings precompute_concept_embeddings(const ConceptDictionary& dict,
                                                       RegionScorer& scorer,
                                                       const std::string& cache_dir = "") {
  if (dict.empty()) throw std::runtime_error("empty dictionary");

  std::string cache_path;
  if (!cache_dir.empty()) {
    uint64_t key = hash_combine(dictionary_hash(dict), fnv1a(scorer.id()));
    cache_path = (std::filesystem::path(cache_dir) /
                  ("concept_embeddings_" + hash_hex(key) + ".jsonl"))
                     .string();
    if (std::filesystem::exists(cache_path)) {
      ConceptEmbeddings cached;
      for_each_jsonl(cache_path, [&](size_t, const json& j) {
        cached[j.at("name").get<std::string>()] = j.at("vector").get<std::vector<double>>();
      });
      if (cached.size() == dict.size()) return cached;
    }
  }

  ConceptEmbeddings out;
  for (const auto& [name, _] : dict.entries) {
    try {
      out[name] = scorer.embed_text(format_prompt(name));
    } catch (const std::exception& e) {
      throw std::runtime_error("concept embedding failed for \"" + name + "\": " + e.what());
    }
  }
  if (!cache_path.empty()) {
    JsonlWriter w(cache_path);
    for (const auto& [name, vec] : out) w.write({{"name", name}, {"vector", vec}});
  }
  return out;
}

struct PseudoLabel {
  BBox box;
  std::string concept_name;
  double score = 0.0;
};

// Candidate label set: the whole dictionary under label completion,
// otherwise the caption's noun phrases. Sorted for determinism.
inline std::vector<std::string> candidate_labels(const ConceptDictionary& dict,
                                                 bool use_dictionary,
                                                 const std::vector<std::string>& caption_phrases) {
  std::vector<std::string> names;
  if (use_dictionary) {
    names = dict.names();
  } else {
    names = caption_phrases;
    for (auto& n : names) n = normalize_name(n);
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
  }
  return names;
}

// Stage hash for the label-completion toggle.
inline uint64_t candidate_set_hash(const std::vector<std::string>& candidates) {
  return hash_strings(candidates);
}

// Assigns the argmax-cosine candidate to each (already filtered)
// proposal; labels scoring below the threshold are dropped (equality is
// kept). Crops are resized to 224x224 before embedding.
inline std::vector<PseudoLabel> label_image(const Image& image,
                                            const std::vector<Proposal>& proposals,
                                            const ConceptDictionary& dict, RegionScorer& scorer,
                                            double score_threshold, bool use_dictionary,
                                            const std::vector<std::string>& caption_phrases = {},
                                            const ConceptEmbeddings* precomputed = nullptr,
                                            size_t* empty_candidate_warnings = nullptr) {
  auto names = candidate_labels(dict, use_dictionary, caption_phrases);
  if (names.empty()) {
    if (empty_candidate_warnings) ++(*empty_candidate_warnings);
    return {};
  }

  std::vector<std::vector<double>> text_embs(names.size());
  for (size_t i = 0; i < names.size(); ++i) {
    if (use_dictionary && precomputed) {
      auto it = precomputed->find(names[i]);
      if (it != precomputed->end()) {
        text_embs[i] = it->second;
        continue;
      }
    }
    text_embs[i] = scorer.embed_text(format_prompt(names[i]));
  }

  std::vector<PseudoLabel> labels;
  for (const auto& prop : proposals) {
    Image crop = resize_bilinear(
        crop_image(image, prop.box.x1, prop.box.y1, prop.box.x2, prop.box.y2), 224, 224);
    auto emb = scorer.embed_image_region(crop);
    int best = -1;
    double best_score = 0.0;
    for (size_t i = 0; i < names.size(); ++i) {
      double s = dot(emb, text_embs[i]);
      if (best < 0 || s > best_score) {
        best = static_cast<int>(i);
        best_score = s;
      }
    }
    if (best_score < score_threshold) continue;
    labels.push_back({prop.box, names[best], best_score});
  }
  return labels;
}

// ---------------------------------------------------------------------------
// Pseudo-label JSONL: {"image_id","box","concept","score"}
// ---------------------------------------------------------------------------

inline void append_pseudo_labels(JsonlWriter& out, const std::string& image_id,
                                 const std::vector<PseudoLabel>& labels) {
  for (const auto& l : labels) {
    json j;
    j["image_id"] = image_id;
    j["box"] = box_to_json(l.box);
    j["concept"] = l.concept_name;
    j["score"] = l.score;
    out.write(j);
  }
}

inline std::map<std::string, std::vector<PseudoLabel>> load_pseudo_labels(
    const std::string& path) {
  std::map<std::string, std::vector<PseudoLabel>> by_image;
  for_each_jsonl(path, [&](size_t lineno, const json& j) {
    if (!j.is_object() || !j.contains("image_id") || !j.contains("box") || !j.contains("concept"))
      throw std::runtime_error(path + ": malformed line " + std::to_string(lineno));
    PseudoLabel l;
    l.box = box_from_json(j.at("box"));
    l.concept_name = j.at("concept").get<std::string>();
    l.score = j.value("score", 0.0);
    by_image[j.at("image_id").get<std::string>()].push_back(l);
  });
  return by_image;
}

// Groups pseudo labels into detection-kind records, taking image paths
// and sizes from the source imagetext records.
inline std::vector<UnifiedRecord> pseudo_labels_to_records(
    const std::map<std::string, std::vector<PseudoLabel>>& by_image,
    const std::vector<UnifiedRecord>& imagetext_records) {
  std::vector<UnifiedRecord> out;
  for (const auto& src : imagetext_records) {
    auto it = by_image.find(src.image_id);
    if (it == by_image.end() || it->second.empty()) continue;
    UnifiedRecord rec;
    rec.image_id = src.image_id;
    rec.image_path = src.image_path;
    rec.image_height = src.image_height;
    rec.image_width = src.image_width;
    rec.kind = RecordKind::detection;
    for (const auto& l : it->second) rec.objects.push_back({l.box, l.concept_name});
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace ovdet
