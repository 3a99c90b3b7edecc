#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ovdet/core/jsonl.hpp"
#include "ovdet/losses/losses.hpp"
#include "ovdet/model/config.hpp"

namespace ovdet {

// Paper-shaped schedule scaled to desk size: base rates 2.8e-4 / 2.8e-5
// scaled linearly by batch ratio against the reference batch of 128,
// step decay x0.1 at 2/3 and 11/12 of the epoch budget.
constexpr double kReferenceBatchSize = 128.0;
constexpr double kBaseLrVisual = 2.8e-4;
constexpr double kBaseLrText = 2.8e-5;

// Desk defaults. The batch-scaled paper pair (2.8e-4 * 8/128) stalls the
// toy model inside the minutes-scale budget, so the desk rates sit
// higher while keeping the 10:1 visual:text split.
constexpr double kDeskLrVisual = 2e-3;
constexpr double kDeskLrText = 2e-4;

struct TrainConfig {
  std::vector<std::string> detection_paths;
  std::vector<std::string> grounding_paths;
  std::vector<std::string> imagetext_paths;
  std::string dictionary_path;
  std::string out_dir = "runs/default";

  int n_concepts = 16;  // N; 150 at paper fidelity, 16 at desk scale
  bool enrich = true;
  bool sample_negatives = true;
  bool label_completion = true;  // echoed; consumed by the pseudo labeler stage
  std::string detection_negative_pool = "label_space";  // or "dictionary"
  // zero-shot protocol: these names never appear as sampled negatives
  std::vector<std::string> negative_exclude;

  int epochs = 40;
  int batch_size = 8;
  double lr_visual = kDeskLrVisual;
  double lr_text = kDeskLrText;
  std::vector<int> milestones = {26, 36};  // 0-based epoch starts where lr decays
  double lr_decay = 0.1;
  int lr_warmup_steps = 0;  // optional linear warmup; keeps the group ratio exact
  double weight_decay = 0.0;
  uint64_t seed = 0;

  ModelConfig model;
  LossWeights loss;

  static std::vector<int> default_milestones(int epochs) {
    int a = static_cast<int>(std::floor(epochs * 2.0 / 3.0));
    int b = static_cast<int>(std::floor(epochs * 11.0 / 12.0));
    if (b <= a) b = a + 1;
    return {a, b};
  }

  json to_json() const {
    json j;
    j["detection_paths"] = detection_paths;
    j["grounding_paths"] = grounding_paths;
    j["imagetext_paths"] = imagetext_paths;
    j["dictionary_path"] = dictionary_path;
    j["out_dir"] = out_dir;
    j["n_concepts"] = n_concepts;
    j["enrich"] = enrich;
    j["sample_negatives"] = sample_negatives;
    j["label_completion"] = label_completion;
    j["detection_negative_pool"] = detection_negative_pool;
    j["negative_exclude"] = negative_exclude;
    j["epochs"] = epochs;
    j["batch_size"] = batch_size;
    j["lr_visual"] = lr_visual;
    j["lr_text"] = lr_text;
    j["milestones"] = milestones;
    j["lr_decay"] = lr_decay;
    j["lr_warmup_steps"] = lr_warmup_steps;
    j["weight_decay"] = weight_decay;
    j["seed"] = seed;
    j["model"] = model.to_json();
    j["loss_gamma"] = loss.gamma;
    j["loss_alpha_focal"] = loss.alpha_f;
    j["loss_alpha"] = loss.alpha;
    j["loss_beta"] = loss.beta;
    return j;
  }

  static TrainConfig from_json(const json& j) {
    TrainConfig c;
    if (j.contains("detection_paths"))
      c.detection_paths = j.at("detection_paths").get<std::vector<std::string>>();
    if (j.contains("grounding_paths"))
      c.grounding_paths = j.at("grounding_paths").get<std::vector<std::string>>();
    if (j.contains("imagetext_paths"))
      c.imagetext_paths = j.at("imagetext_paths").get<std::vector<std::string>>();
    c.dictionary_path = j.value("dictionary_path", c.dictionary_path);
    c.out_dir = j.value("out_dir", c.out_dir);
    c.n_concepts = j.value("n_concepts", c.n_concepts);
    c.enrich = j.value("enrich", c.enrich);
    c.sample_negatives = j.value("sample_negatives", c.sample_negatives);
    c.label_completion = j.value("label_completion", c.label_completion);
    c.detection_negative_pool = j.value("detection_negative_pool", c.detection_negative_pool);
    if (j.contains("negative_exclude"))
      c.negative_exclude = j.at("negative_exclude").get<std::vector<std::string>>();
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.lr_visual = j.value("lr_visual", c.lr_visual);
    c.lr_text = j.value("lr_text", c.lr_text);

    if (j.contains("milestones"))
      c.milestones = j.at("milestones").get<std::vector<int>>();
    else if (j.contains("epochs"))
      c.milestones = default_milestones(c.epochs);
    c.lr_decay = j.value("lr_decay", c.lr_decay);
    c.lr_warmup_steps = j.value("lr_warmup_steps", c.lr_warmup_steps);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.seed = j.value("seed", c.seed);
    if (j.contains("model")) c.model = ModelConfig::from_json(j.at("model"));
    c.loss.gamma = j.value("loss_gamma", c.loss.gamma);
    c.loss.alpha_f = j.value("loss_alpha_focal", c.loss.alpha_f);
    c.loss.alpha = j.value("loss_alpha", c.loss.alpha);
    c.loss.beta = j.value("loss_beta", c.loss.beta);
    return c;
  }
};

}  // namespace ovdet
