#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <limits>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "ovdet/concepts/embedding.hpp"
#include "ovdet/data/parallel_input.hpp"
#include "ovdet/data/records.hpp"
#include "ovdet/data/tokenizer.hpp"
#include "ovdet/losses/losses.hpp"
#include "ovdet/model/checkpoint.hpp"
#include "ovdet/model/decode.hpp"
#include "ovdet/model/model.hpp"
#include "ovdet/train/config.hpp"

namespace ovdet {

struct TrainResult {
  std::string checkpoint_path;
  std::string metrics_path;
  double first_logged_total = 0.0;
  double final_total = 0.0;
  int64_t steps = 0;
  bool diverged = false;
};

// Forward/backward for one record; returns the loss breakdown. The
// gradient seeds are scaled by `grad_scale` so batch averaging happens
// at the seed level.
inline LossBreakdown train_step_record(const DualEncoderModel& model, const Tokenizer& tokenizer,
                                       const UnifiedRecord& record, const ParalleledInput& pi,
                                       const LossWeights& weights, double grad_scale,
                                       bool apply_grads) {
  std::vector<TokenSeq> seqs;
  seqs.reserve(pi.concepts.size());
  for (const auto& text : pi.concepts) seqs.push_back(tokenizer.tokenize(text));

  auto text_features = model.encode_concepts(seqs);
  auto image_out = model.encode_image(record.image);
  auto score_node = alignment_scores(text_features, image_out.features);

  // diverged parameters surface as non-finite activations; report a NaN
  // total so the caller can abort on the last finite checkpoint
  auto finite = [](const nn::Tensor& t) {
    for (double v : t.v)
      if (!std::isfinite(v)) return false;
    return true;
  };
  if (!finite(score_node->value) || !finite(image_out.box_deltas->value) ||
      !finite(image_out.centerness->value)) {
    LossBreakdown bad;
    bad.total = std::numeric_limits<double>::quiet_NaN();
    return bad;
  }

  // objects that survived positive truncation, in anchor-assignable form
  std::vector<AssignedObject> objects;
  for (size_t i = 0; i < record.objects.size(); ++i)
    if (pi.concept_index_of_object[i] >= 0)
      objects.push_back({record.objects[i].box, pi.concept_index_of_object[i]});

  auto assign = atss_assign(image_out.anchors, image_out.levels, objects,
                            static_cast<int>(pi.concepts.size()), model.config().topk_atss);

  // decoded boxes for positive anchors (regression is on geometric boxes)
  std::vector<BBox> pred_boxes;
  std::vector<int> positive_anchor_idx;
  const auto& deltas = image_out.box_deltas->value;
  for (size_t a = 0; a < assign.positive_mask.size(); ++a) {
    if (!assign.positive_mask[a]) continue;
    positive_anchor_idx.push_back(static_cast<int>(a));
    pred_boxes.push_back(decode_box(image_out.anchors[a], deltas.v[a * 4 + 0],
                                    deltas.v[a * 4 + 1], deltas.v[a * 4 + 2],
                                    deltas.v[a * 4 + 3]));
    if (!pred_boxes.back().valid()) {  // center so large the width underflows
      LossBreakdown bad;
      bad.total = std::numeric_limits<double>::quiet_NaN();
      return bad;
    }
  }

  std::vector<double> ctr_logits(image_out.centerness->value.v.begin(),
                                 image_out.centerness->value.v.end());

  auto loss = total_loss(to_mat(score_node->value), assign.g, ctr_logits,
                         assign.centerness_targets, assign.positive_mask, pred_boxes,
                         assign.reg_targets, record.kind, weights);

  if (apply_grads) {
    nn::Tensor seed_s(score_node->value.shape);
    for (size_t i = 0; i < seed_s.v.size(); ++i) seed_s.v[i] = loss.d_scores.d[i] * grad_scale;

    nn::Tensor seed_ctr(image_out.centerness->value.shape);
    for (size_t i = 0; i < seed_ctr.v.size(); ++i)
      seed_ctr.v[i] = loss.d_centerness[i] * grad_scale;

    nn::Tensor seed_deltas(image_out.box_deltas->value.shape);
    for (size_t p = 0; p < positive_anchor_idx.size(); ++p) {
      int a = positive_anchor_idx[p];
      auto g = box_grad_to_delta_grad(image_out.anchors[a], deltas.v[a * 4 + 2],
                                      deltas.v[a * 4 + 3], loss.d_boxes[p]);
      for (int k = 0; k < 4; ++k) seed_deltas.v[static_cast<size_t>(a) * 4 + k] = g[k] * grad_scale;
    }

    nn::backward({{score_node, std::move(seed_s)},
                  {image_out.centerness, std::move(seed_ctr)},
                  {image_out.box_deltas, std::move(seed_deltas)}});
  }
  return loss.breakdown;
}

class Trainer {
 public:
  Trainer(const TrainConfig& config, const EmbeddingProvider* enrich_provider = nullptr)
      : cfg_(config) {
    dict_ = load_dictionary(cfg_.dictionary_path);
    tokenizer_ = std::make_unique<Tokenizer>(dict_, cfg_.model.max_tokens);
    cfg_.model.vocab_size = tokenizer_->table_size();

    for (const auto& p : cfg_.detection_paths) append_records(p, RecordKind::detection);
    for (const auto& p : cfg_.grounding_paths) append_records(p, RecordKind::grounding);
    for (const auto& p : cfg_.imagetext_paths) append_records(p, RecordKind::imagetext);
    if (total_records() == 0) throw std::runtime_error("no training records");

    // detection negatives can come from the dataset's own label space
    std::set<std::string> labels;
    for (const auto& rec : by_kind_[0])
      for (const auto& obj : rec.objects) labels.insert(normalize_name(obj.concept_name));
    detection_label_space_.assign(labels.begin(), labels.end());

    if (enrich_provider == nullptr) {
      owned_provider_ = std::make_unique<TrigramHashProvider>(64);
      provider_ = owned_provider_.get();
    } else {
      provider_ = enrich_provider;
    }
  }

  TrainResult train(const std::string& resume_from = "") {
    auto model = std::make_unique<DualEncoderModel>(cfg_.model, child_seed(cfg_.seed, "init"));
    int64_t step = 0;
    int start_epoch = 0;
    if (!resume_from.empty()) {
      json meta;
      model = load_model(resume_from, &meta);
      step = meta.value("step", -1) + 1;  // meta holds the last completed step
      start_epoch = meta.value("epoch", -1) + 1;
    }

    nn::Adam opt({{model->visual_params(), cfg_.lr_visual}, {model->text_params(), cfg_.lr_text}},
                 0.9, 0.999, 1e-8, cfg_.weight_decay);
    // replay decays already passed when resuming
    double decay_factor = 1.0;
    for (int e = 0; e < start_epoch; ++e)
      if (std::find(cfg_.milestones.begin(), cfg_.milestones.end(), e) != cfg_.milestones.end())
        decay_factor *= cfg_.lr_decay;

    std::filesystem::create_directories(cfg_.out_dir);
    const std::string metrics_path =
        (std::filesystem::path(cfg_.out_dir) / "metrics.jsonl").string();
    const std::string ckpt_path =
        (std::filesystem::path(cfg_.out_dir) / "checkpoint.ovck").string();
    JsonlWriter metel(metrics_path, /*append=*/!resume_from.empty());

    TrainResult result;
    result.metrics_path = metrics_path;
    result.checkpoint_path = ckpt_path;

    const int64_t steps_per_epoch =
        std::max<int64_t>(1, (total_records() + cfg_.batch_size - 1) / cfg_.batch_size);

    ParallelOptions popts;
    popts.enrich = cfg_.enrich;
    popts.sample_negatives = cfg_.sample_negatives;
    std::set<std::string> excluded;
    for (const auto& name : cfg_.negative_exclude) excluded.insert(normalize_name(name));
    if (!excluded.empty()) popts.negative_exclude = &excluded;

    for (int epoch = start_epoch; epoch < cfg_.epochs; ++epoch) {
      if (std::find(cfg_.milestones.begin(), cfg_.milestones.end(), epoch) !=
          cfg_.milestones.end())
        decay_factor *= cfg_.lr_decay;

      Rng shuffle_rng(child_seed(cfg_.seed, "shuffle", epoch));
      std::array<std::vector<size_t>, 3> order;
      std::array<size_t, 3> cursor{0, 0, 0};
      for (int k = 0; k < 3; ++k) {
        order[k].resize(by_kind_[k].size());
        for (size_t i = 0; i < order[k].size(); ++i) order[k][i] = i;
        shuffle_inplace(order[k], shuffle_rng);
      }

      for (int64_t s = 0; s < steps_per_epoch; ++s, ++step) {
        // warmup and decay multiply both groups, so the text/visual
        // ratio is exact at every step
        double warm = cfg_.lr_warmup_steps > 0
                          ? std::min(1.0, static_cast<double>(step + 1) / cfg_.lr_warmup_steps)
                          : 1.0;
        opt.set_lr(0, cfg_.lr_visual * decay_factor * warm);
        opt.set_lr(1, cfg_.lr_text * decay_factor * warm);

        // each batch holds one kind; kinds drawn proportionally to size
        int kind = pick_kind(child_seed(cfg_.seed, "kind", step));
        auto& recs = by_kind_[kind];
        auto& ord = order[kind];

        opt.zero_grad();
        LossBreakdown batch_mean;
        int batch_n = 0;
        for (int b = 0; b < cfg_.batch_size; ++b) {
          size_t ri = ord[cursor[kind] % ord.size()];
          cursor[kind]++;
          auto& rec = recs[ri];
          load_record_image(rec);

          popts.negative_pool = (kind == 0 && cfg_.detection_negative_pool == "label_space" &&
                                 !detection_label_space_.empty())
                                    ? &detection_label_space_
                                    : nullptr;
          auto pi = build_parallel_input(rec, dict_, cfg_.n_concepts, popts, provider_,
                                         child_seed(cfg_.seed, "record", step * 1000 + b));
          auto bd = train_step_record(*model, *tokenizer_, rec, pi, cfg_.loss,
                                      1.0 / cfg_.batch_size, /*apply_grads=*/true);
          batch_mean.l_ali += bd.l_ali;
          batch_mean.l_cen += bd.l_cen;
          batch_mean.l_reg += bd.l_reg;
          batch_mean.total += bd.total;
          batch_mean.num_positives += bd.num_positives;
          ++batch_n;
        }
        batch_mean.l_ali /= batch_n;
        batch_mean.l_cen /= batch_n;
        batch_mean.l_reg /= batch_n;
        batch_mean.total /= batch_n;

        if (!std::isfinite(batch_mean.total)) {
          // divergence: keep the last finite parameters
          save(model.get(), ckpt_path, epoch, step);
          result.diverged = true;
          result.steps = step;
          return result;
        }
        opt.step();

        json m;
        m["step"] = step;
        m["epoch"] = epoch;
        m["L_ALI"] = batch_mean.l_ali;
        m["L_CEN"] = batch_mean.l_cen;
        m["L_REG"] = batch_mean.l_reg;
        m["total"] = batch_mean.total;
        m["lr_visual"] = opt.lr(0);
        m["lr_text"] = opt.lr(1);
        metel.write(m);
        metel.flush();
        if (result.steps == 0 && step == 0) result.first_logged_total = batch_mean.total;
        result.final_total = batch_mean.total;
        result.steps = step + 1;
      }
      save(model.get(), ckpt_path, epoch, step - 1);
    }
    return result;
  }

  const ConceptDictionary& dictionary() const { return dict_; }
  const TrainConfig& config() const { return cfg_; }
  const std::vector<std::string>& detection_label_space() const {
    return detection_label_space_;
  }

 private:
  void append_records(const std::string& path, RecordKind kind) {
    auto recs = load_records(path, kind);
    auto& dst = by_kind_[static_cast<int>(kind)];
    dst.insert(dst.end(), std::make_move_iterator(recs.begin()),
               std::make_move_iterator(recs.end()));
  }

  int64_t total_records() const {
    return static_cast<int64_t>(by_kind_[0].size() + by_kind_[1].size() + by_kind_[2].size());
  }

  int pick_kind(uint64_t seed) const {
    Rng rng(seed);
    uint64_t total = static_cast<uint64_t>(total_records());
    uint64_t x = uniform_below(rng, total);
    for (int k = 0; k < 3; ++k) {
      if (x < by_kind_[k].size()) return k;
      x -= by_kind_[k].size();
    }
    return 0;
  }

  void save(DualEncoderModel* model, const std::string& path, int epoch, int64_t step) {
    json meta;
    meta["epoch"] = epoch;
    meta["step"] = step;
    meta["dictionary_hash"] = hash_hex(dictionary_hash(dict_));
    meta["train_config"] = cfg_.to_json();
    std::set<std::string> names;
    for (int k = 0; k < 2; ++k)  // detection + grounding concepts count as seen
      for (const auto& rec : by_kind_[k])
        for (const auto& obj : rec.objects) names.insert(normalize_name(obj.concept_name));
    meta["train_concepts"] = std::vector<std::string>(names.begin(), names.end());
    save_checkpoint(path, *model, meta);
  }

  TrainConfig cfg_;
  ConceptDictionary dict_;
  std::unique_ptr<Tokenizer> tokenizer_;
  std::array<std::vector<UnifiedRecord>, 3> by_kind_;
  std::vector<std::string> detection_label_space_;
  std::unique_ptr<EmbeddingProvider> owned_provider_;
  const EmbeddingProvider* provider_ = nullptr;
};

}  // namespace ovdet
