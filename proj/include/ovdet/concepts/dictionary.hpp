#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "ovdet/core/hash.hpp"
#include "ovdet/core/jsonl.hpp"
#include "ovdet/core/text.hpp"

namespace ovdet {

enum class ConceptSource { detection, things, imagetext };

inline std::string to_string(ConceptSource s) {
  switch (s) {
    case ConceptSource::detection: return "detection";
    case ConceptSource::things: return "things";
    case ConceptSource::imagetext: return "imagetext";
  }
  return "detection";
}

inline ConceptSource concept_source_from_string(const std::string& s) {
  if (s == "detection") return ConceptSource::detection;
  if (s == "things") return ConceptSource::things;
  if (s == "imagetext") return ConceptSource::imagetext;
  throw std::runtime_error("unknown concept source: " + s);
}

struct ConceptEntry {
  std::string name;  // nonempty, trimmed, lowercase
  std::optional<std::string> definition;
  ConceptSource source = ConceptSource::detection;
  int64_t frequency = 0;

  bool operator==(const ConceptEntry&) const = default;
};

// Immutable after build; iteration is sorted by name.
struct ConceptDictionary {
  std::map<std::string, ConceptEntry> entries;

  size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const auto& [name, _] : entries) out.push_back(name);
    return out;
  }

  bool operator==(const ConceptDictionary&) const = default;
};

// Exact lookup after lowercase/trim normalization.
inline std::optional<ConceptEntry> lookup(const ConceptDictionary& dict, const std::string& name) {
  std::string key = normalize_name(name);
  if (key.empty()) return std::nullopt;
  auto it = dict.entries.find(key);
  if (it == dict.entries.end()) return std::nullopt;
  return it->second;
}

// name -> definition, loaded from a JSON Lines file {"name","definition"}.
using Lexicon = std::unordered_map<std::string, std::string>;

inline Lexicon load_lexicon(const std::string& path) {
  Lexicon lex;
  for_each_jsonl(path, [&](size_t lineno, const json& j) {
    if (!j.is_object() || !j.contains("name") || !j.contains("definition"))
      throw std::runtime_error(path + ": malformed line " + std::to_string(lineno) +
                               " (want {\"name\",\"definition\"})");
    std::string name = normalize_name(j.at("name").get<std::string>());
    std::string def = trim(j.at("definition").get<std::string>());
    if (!name.empty() && !def.empty()) lex[name] = def;
  });
  return lex;
}

struct ConceptSourceInput {
  ConceptSource tag;
  std::vector<std::string> concepts;  // one item per occurrence
};

// Detection/things names enter after deduplication regardless of frequency.
// Imagetext names are kept only with frequency >= min_frequency and a
// lexicon definition. Duplicates across sources keep the strongest source
// tag (detection > things > imagetext) and merge occurrence counts.
inline ConceptDictionary build_dictionary(const std::vector<ConceptSourceInput>& sources,
                                          int64_t min_frequency, const Lexicon& lexicon) {
  struct Acc {
    ConceptSource source = ConceptSource::imagetext;
    int64_t frequency = 0;
  };
  std::map<std::string, Acc> acc;
  for (const auto& src : sources) {
    for (const auto& raw : src.concepts) {
      std::string name = normalize_name(raw);
      if (name.empty()) continue;
      auto& a = acc[name];
      a.frequency += 1;
      if (a.frequency == 1 || static_cast<int>(src.tag) < static_cast<int>(a.source))
        a.source = src.tag;
    }
  }

  ConceptDictionary dict;
  for (const auto& [name, a] : acc) {
    std::optional<std::string> def;
    if (auto it = lexicon.find(name); it != lexicon.end()) def = it->second;
    if (a.source == ConceptSource::imagetext) {
      if (a.frequency < min_frequency || !def.has_value()) continue;
    }
    dict.entries[name] = ConceptEntry{name, def, a.source, a.frequency};
  }
  return dict;
}

inline json entry_to_json(const ConceptEntry& e) {
  json j;
  j["name"] = e.name;
  j["definition"] = e.definition.has_value() ? json(*e.definition) : json(nullptr);
  j["source"] = to_string(e.source);
  j["frequency"] = e.frequency;
  return j;
}

inline std::string serialize_dictionary(const ConceptDictionary& dict) {
  std::string out;
  for (const auto& [_, e] : dict.entries) out += entry_to_json(e).dump() + "\n";
  return out;
}

inline void save_dictionary(const ConceptDictionary& dict, const std::string& path) {
  write_file(path, serialize_dictionary(dict));
}

inline ConceptDictionary load_dictionary(const std::string& path) {
  ConceptDictionary dict;
  for_each_jsonl(path, [&](size_t lineno, const json& j) {
    if (!j.is_object() || !j.contains("name") || !j.contains("source") ||
        !j.contains("frequency"))
      throw std::runtime_error(path + ": malformed line " + std::to_string(lineno));
    ConceptEntry e;
    e.name = normalize_name(j.at("name").get<std::string>());
    if (e.name.empty())
      throw std::runtime_error(path + ": malformed line " + std::to_string(lineno) +
                               " (empty name)");
    if (j.contains("definition") && !j.at("definition").is_null())
      e.definition = j.at("definition").get<std::string>();
    e.source = concept_source_from_string(j.at("source").get<std::string>());
    e.frequency = j.at("frequency").get<int64_t>();
    if (e.frequency < 0)
      throw std::runtime_error(path + ": malformed line " + std::to_string(lineno) +
                               " (negative frequency)");
    if (dict.entries.count(e.name))
      throw std::runtime_error(path + ": duplicate concept \"" + e.name + "\" at line " +
                               std::to_string(lineno));
    dict.entries[e.name] = e;
  });
  return dict;
}

// Content hash over the canonical serialization; keys embedding caches
// and checkpoint metadata.
inline uint64_t dictionary_hash(const ConceptDictionary& dict) {
  return fnv1a(serialize_dictionary(dict));
}

}  // namespace ovdet
