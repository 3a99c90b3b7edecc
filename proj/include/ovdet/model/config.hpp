#pragma once

#include <string>
#include <vector>

#include "ovdet/core/jsonl.hpp"

namespace ovdet {

// Flat model hyperparameters. vocab_size is derived from the tokenizer
// (dictionary words + OOV buckets) and recorded here so checkpoints are
// self-describing.
struct ModelConfig {
  int d_model = 64;
  std::vector<int> strides = {8, 16};
  double anchor_scale = 0.75;  // anchor side = anchor_scale * 8 * stride
  int topk_atss = 9;
  int text_layers = 2;
  int text_heads = 2;
  int vocab_size = 0;
  int max_tokens = 48;
  int base_channels = 16;
  bool normalize_features = false;  // optional L2 norm of F^I / F^T rows

  json to_json() const {
    json j;
    j["d_model"] = d_model;
    j["strides"] = strides;
    j["anchor_scale"] = anchor_scale;
    j["topk_atss"] = topk_atss;
    j["text_layers"] = text_layers;
    j["text_heads"] = text_heads;
    j["vocab_size"] = vocab_size;
    j["max_tokens"] = max_tokens;
    j["base_channels"] = base_channels;
    j["normalize_features"] = normalize_features;
    return j;
  }

  static ModelConfig from_json(const json& j) {
    ModelConfig c;
    c.d_model = j.value("d_model", c.d_model);
    if (j.contains("strides")) c.strides = j.at("strides").get<std::vector<int>>();
    c.anchor_scale = j.value("anchor_scale", c.anchor_scale);
    c.topk_atss = j.value("topk_atss", c.topk_atss);
    c.text_layers = j.value("text_layers", c.text_layers);
    c.text_heads = j.value("text_heads", c.text_heads);
    c.vocab_size = j.value("vocab_size", c.vocab_size);
    c.max_tokens = j.value("max_tokens", c.max_tokens);
    c.base_channels = j.value("base_channels", c.base_channels);
    c.normalize_features = j.value("normalize_features", c.normalize_features);
    return c;
  }
};

}  // namespace ovdet
