#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ovdet/concepts/embedding.hpp"
#include "ovdet/concepts/enrich.hpp"
#include "ovdet/core/rng.hpp"
#include "ovdet/data/records.hpp"
#include "ovdet/data/tokenizer.hpp"
#include "ovdet/model/decode.hpp"
#include "ovdet/model/model.hpp"

namespace ovdet {

// ---------------------------------------------------------------------------
// Class-wise AP@IoU with 11-point interpolation
// ---------------------------------------------------------------------------

struct ApDetection {
  int image_index = 0;
  BBox box;
  double score = 0.0;
};

// Greedy ranked matching against unmatched ground truth, then the
// 11-point interpolated average precision.
inline double average_precision_11pt(std::vector<ApDetection> dets,
                                     const std::vector<std::vector<BBox>>& gt_per_image,
                                     double iou_thresh = 0.5) {
  size_t num_gt = 0;
  for (const auto& g : gt_per_image) num_gt += g.size();
  if (num_gt == 0) return 0.0;

  std::stable_sort(dets.begin(), dets.end(),
                   [](const ApDetection& a, const ApDetection& b) { return a.score > b.score; });
  std::vector<std::vector<bool>> used(gt_per_image.size());
  for (size_t i = 0; i < gt_per_image.size(); ++i) used[i].assign(gt_per_image[i].size(), false);

  std::vector<double> precision, recall;
  size_t tp = 0, fp = 0;
  for (const auto& d : dets) {
    const auto& gts = gt_per_image[d.image_index];
    int best = -1;
    double best_iou = iou_thresh;
    for (size_t g = 0; g < gts.size(); ++g) {
      if (used[d.image_index][g]) continue;
      double v = iou(d.box, gts[g]);
      if (v >= best_iou) {
        best_iou = v;
        best = static_cast<int>(g);
      }
    }
    if (best >= 0) {
      used[d.image_index][best] = true;
      ++tp;
    } else {
      ++fp;
    }
    precision.push_back(static_cast<double>(tp) / (tp + fp));
    recall.push_back(static_cast<double>(tp) / num_gt);
  }

  double ap = 0.0;
  for (int i = 0; i <= 10; ++i) {
    double r = i / 10.0;
    double p_max = 0.0;
    for (size_t k = 0; k < recall.size(); ++k)
      if (recall[k] >= r) p_max = std::max(p_max, precision[k]);
    ap += p_max / 11.0;
  }
  return ap;
}

struct EvalReport {
  std::map<std::string, double> per_concept_ap;
  std::map<std::string, int> per_concept_gt;
  double mean_ap = 0.0;
  double seen_mean_ap = 0.0;
  double unseen_mean_ap = 0.0;
  int num_images = 0;
  int num_detections = 0;
  json config_echo;
  // per-concept precision-recall points for plotting
  std::map<std::string, std::vector<std::pair<double, double>>> pr_points;

  json to_json() const {
    json j;
    j["per_concept_ap"] = per_concept_ap;
    j["per_concept_gt"] = per_concept_gt;
    j["mean_ap"] = mean_ap;
    j["seen_mean_ap"] = seen_mean_ap;
    j["unseen_mean_ap"] = unseen_mean_ap;
    j["num_images"] = num_images;
    j["num_detections"] = num_detections;
    j["config"] = config_echo;
    json pr;
    for (const auto& [name, pts] : pr_points) {
      json arr = json::array();
      for (const auto& [r, p] : pts) arr.push_back({r, p});
      pr[name] = arr;
    }
    j["pr_points"] = pr;
    return j;
  }
};

struct EvalOptions {
  double score_thresh = 0.05;
  double nms_iou = 0.5;
  double match_iou = 0.5;
  bool enrich = true;
};

// Computes the report from already-collected detections; shared by the
// model path and the random-box baseline.
inline EvalReport compute_eval_report(
    const std::vector<std::string>& concept_names,
    const std::map<std::string, std::vector<ApDetection>>& dets_by_concept,
    const std::map<std::string, std::vector<std::vector<BBox>>>& gt_by_concept, int num_images,
    const std::set<std::string>& seen, double match_iou) {
  EvalReport rep;
  rep.num_images = num_images;
  double sum = 0, seen_sum = 0, unseen_sum = 0;
  int n = 0, n_seen = 0, n_unseen = 0;
  for (const auto& name : concept_names) {
    const auto& gts = gt_by_concept.at(name);
    int gt_count = 0;
    for (const auto& g : gts) gt_count += static_cast<int>(g.size());
    rep.per_concept_gt[name] = gt_count;
    if (gt_count == 0) continue;  // undefined AP, skip from means
    std::vector<ApDetection> dets;
    if (auto it = dets_by_concept.find(name); it != dets_by_concept.end()) dets = it->second;
    rep.num_detections += static_cast<int>(dets.size());
    double ap = average_precision_11pt(dets, gts, match_iou);
    rep.per_concept_ap[name] = ap;
    sum += ap;
    ++n;
    if (seen.count(name)) {
      seen_sum += ap;
      ++n_seen;
    } else {
      unseen_sum += ap;
      ++n_unseen;
    }

    // PR points for the plot
    std::stable_sort(dets.begin(), dets.end(),
                     [](const ApDetection& a, const ApDetection& b) { return a.score > b.score; });
    std::vector<std::vector<bool>> used(gts.size());
    for (size_t i = 0; i < gts.size(); ++i) used[i].assign(gts[i].size(), false);
    size_t tp = 0, fp = 0;
    std::vector<std::pair<double, double>> pts;
    for (const auto& d : dets) {
      int best = -1;
      double best_iou = match_iou;
      for (size_t g = 0; g < gts[d.image_index].size(); ++g) {
        if (used[d.image_index][g]) continue;
        double v = iou(d.box, gts[d.image_index][g]);
        if (v >= best_iou) {
          best_iou = v;
          best = static_cast<int>(g);
        }
      }
      if (best >= 0) {
        used[d.image_index][best] = true;
        ++tp;
      } else {
        ++fp;
      }
      pts.emplace_back(static_cast<double>(tp) / std::max<size_t>(1, gt_count),
                       static_cast<double>(tp) / (tp + fp));
    }
    rep.pr_points[name] = std::move(pts);
  }
  rep.mean_ap = n ? sum / n : 0.0;
  rep.seen_mean_ap = n_seen ? seen_sum / n_seen : 0.0;
  rep.unseen_mean_ap = n_unseen ? unseen_sum / n_unseen : 0.0;
  return rep;
}

// The exact text entries fed to the text encoder at evaluation time:
// bare names, or "name, definition." when enrichment is on.
inline std::vector<std::string> eval_concept_texts(const ConceptDictionary& dict,
                                                   const std::vector<std::string>& names,
                                                   bool enrich_flag,
                                                   const EmbeddingProvider* provider) {
  std::vector<std::string> texts;
  texts.reserve(names.size());
  for (const auto& name : names)
    texts.push_back(enrich_flag ? enrich(dict, name, provider) : normalize_name(name));
  return texts;
}

// Zero-shot style evaluation: the whole concept list (enriched or bare)
// is encoded once, every image is decoded against it, and detections are
// matched at IoU 0.5 into 11-point AP per concept.
inline EvalReport evaluate(const DualEncoderModel& model, const Tokenizer& tokenizer,
                           const ConceptDictionary& dict,
                           std::vector<UnifiedRecord>& records,
                           const std::vector<std::string>& concept_list,
                           const std::set<std::string>& seen_concepts,
                           const EmbeddingProvider* provider, const EvalOptions& opts = {}) {
  if (concept_list.empty()) throw std::runtime_error("evaluate: empty concept list");

  std::vector<std::string> names;
  names.reserve(concept_list.size());
  for (const auto& c : concept_list) names.push_back(normalize_name(c));

  std::vector<TokenSeq> seqs;
  for (const auto& text : eval_concept_texts(dict, names, opts.enrich, provider))
    seqs.push_back(tokenizer.tokenize(text));
  auto text_features = model.encode_concepts(seqs);

  std::map<std::string, std::vector<ApDetection>> dets_by_concept;
  std::map<std::string, std::vector<std::vector<BBox>>> gt_by_concept;
  for (const auto& name : names) gt_by_concept[name].resize(records.size());

  for (size_t i = 0; i < records.size(); ++i) {
    auto& rec = records[i];
    load_record_image(rec);
    for (const auto& obj : rec.objects) {
      std::string key = normalize_name(obj.concept_name);
      if (gt_by_concept.count(key)) gt_by_concept[key][i].push_back(obj.box);
    }

    auto image_out = model.encode_image(rec.image);
    auto scores = to_mat(alignment_scores(text_features, image_out.features)->value);
    std::vector<double> ctr(image_out.centerness->value.v.begin(),
                            image_out.centerness->value.v.end());
    auto dets = decode_predictions(scores, to_mat(image_out.box_deltas->value),
                                   image_out.anchors, ctr, names, opts.score_thresh,
                                   opts.nms_iou, rec.image_width, rec.image_height);
    for (const auto& d : dets)
      dets_by_concept[d.concept_name].push_back(
          {static_cast<int>(i), d.box, d.score});
  }

  auto rep = compute_eval_report(names, dets_by_concept, gt_by_concept,
                                 static_cast<int>(records.size()), seen_concepts, opts.match_iou);
  rep.config_echo = {{"enrich", opts.enrich},
                     {"score_thresh", opts.score_thresh},
                     {"nms_iou", opts.nms_iou},
                     {"match_iou", opts.match_iou}};
  return rep;
}

// Uniform-random-box baseline over the same records and concepts.
inline EvalReport random_box_baseline(std::vector<UnifiedRecord>& records,
                                      const std::vector<std::string>& concept_list,
                                      const std::set<std::string>& seen_concepts, uint64_t seed,
                                      int boxes_per_image_per_concept = 10,
                                      double match_iou = 0.5) {
  std::vector<std::string> names;
  for (const auto& c : concept_list) names.push_back(normalize_name(c));

  std::map<std::string, std::vector<ApDetection>> dets_by_concept;
  std::map<std::string, std::vector<std::vector<BBox>>> gt_by_concept;
  for (const auto& name : names) gt_by_concept[name].resize(records.size());

  Rng rng(child_seed(seed, "baseline"));
  for (size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    for (const auto& obj : rec.objects) {
      std::string key = normalize_name(obj.concept_name);
      if (gt_by_concept.count(key)) gt_by_concept[key][i].push_back(obj.box);
    }
    for (const auto& name : names)
      for (int b = 0; b < boxes_per_image_per_concept; ++b) {
        double x1 = uniform_real(rng, 0, rec.image_width - 2);
        double y1 = uniform_real(rng, 0, rec.image_height - 2);
        double x2 = uniform_real(rng, x1 + 1, rec.image_width);
        double y2 = uniform_real(rng, y1 + 1, rec.image_height);
        dets_by_concept[name].push_back(
            {static_cast<int>(i), BBox{x1, y1, x2, y2}, uniform_real(rng, 0, 1)});
      }
  }
  auto rep = compute_eval_report(names, dets_by_concept, gt_by_concept,
                                 static_cast<int>(records.size()), seen_concepts, match_iou);
  rep.config_echo = {{"baseline", "uniform-random-boxes"},
                     {"boxes_per_image_per_concept", boxes_per_image_per_concept}};
  return rep;
}

}  // namespace ovdet
