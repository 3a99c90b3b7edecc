#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "ovdet/core/mat.hpp"
#include "ovdet/data/boxes.hpp"
#include "ovdet/data/records.hpp"

namespace ovdet {

inline double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

inline double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

// ---------------------------------------------------------------------------
// Sigmoid focal loss over the alignment matrix
// ---------------------------------------------------------------------------

struct FocalLossResult {
  double value = 0.0;
  Mat grad;  // d value / d S
};

// Elementwise focal term -alpha_t (1 - p_t)^gamma log(p_t) with
// p = sigmoid(S), summed over all N*M entries and divided by normalizer.
// alpha_f < 0 disables the alpha weighting (alpha_t = 1).
inline FocalLossResult sigmoid_focal_alignment_loss(const Mat& scores, const Mat& targets,
                                                    double gamma = 2.0, double alpha_f = 0.25,
                                                    int normalizer = 1) {
  if (!scores.same_shape(targets)) throw std::runtime_error("focal loss: shape mismatch");
  if (normalizer < 1) throw std::runtime_error("focal loss: normalizer must be >= 1");

  FocalLossResult res;
  res.grad = Mat(scores.rows, scores.cols);
  double sum = 0.0;
  for (size_t i = 0; i < scores.d.size(); ++i) {
    double s = scores.d[i];
    if (std::isnan(s)) throw std::runtime_error("focal loss: NaN in scores");
    bool positive = targets.d[i] > 0.5;
    // positive: loss = a * sig(-s)^g * softplus(-s); negative mirrors with s -> -s
    double z = positive ? s : -s;
    double a = alpha_f >= 0 ? (positive ? alpha_f : 1.0 - alpha_f) : 1.0;
    double q = sigmoid(-z);                 // = 1 - p_t
    double log_pt = -softplus(-z);          // = log(p_t)
    double w = gamma == 0.0 ? 1.0 : std::pow(q, gamma);
    sum += -a * w * log_pt;
    double dz = -a * w * (gamma * sigmoid(z) * softplus(-z) + q);
    res.grad.d[i] = (positive ? dz : -dz) / normalizer;
  }
  res.value = sum / normalizer;
  return res;
}

// ---------------------------------------------------------------------------
// Centerness loss: sigmoid cross entropy with soft targets over positives
// ---------------------------------------------------------------------------

struct CenternessLossResult {
  double value = 0.0;
  std::vector<double> grad;  // d value / d logits, zero off-positives
};

inline CenternessLossResult centerness_loss(const std::vector<double>& logits,
                                            const std::vector<double>& targets,
                                            const std::vector<bool>& positive_mask) {
  if (logits.size() != positive_mask.size() || targets.size() != positive_mask.size())
    throw std::runtime_error("centerness loss: size mismatch");
  CenternessLossResult res;
  res.grad.assign(logits.size(), 0.0);
  int num_pos = 0;
  for (bool p : positive_mask) num_pos += p ? 1 : 0;
  if (num_pos == 0) return res;

  double sum = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    if (!positive_mask[i]) continue;
    double x = logits[i], t = targets[i];
    sum += softplus(x) - t * x;  // = -t log sig(x) - (1-t) log(1 - sig(x))
    res.grad[i] = (sigmoid(x) - t) / num_pos;
  }
  res.value = sum / num_pos;
  return res;
}

// ---------------------------------------------------------------------------
// Generalized IoU
// ---------------------------------------------------------------------------

struct GiouResult {
  double value = 0.0;                    // giou in [-1, 1]
  std::array<double, 4> grad{};          // d giou / d (a.x1, a.y1, a.x2, a.y2)
};

// giou(a, b) = IoU - (hull - union) / hull, with gradient w.r.t. a.
inline GiouResult giou_with_grad(const BBox& a, const BBox& b) {
  if (!a.valid() || !b.valid()) throw std::runtime_error("giou: degenerate box");

  const double area_a = a.area(), area_b = b.area();
  // dArea_a / d(a.x1, a.y1, a.x2, a.y2)
  const std::array<double, 4> d_area = {-a.height(), -a.width(), a.height(), a.width()};

  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  const bool overlap = iw > 0 && ih > 0;
  const double inter = overlap ? iw * ih : 0.0;

  std::array<double, 4> d_inter{};
  if (overlap) {
    const double diw_dx1 = a.x1 >= b.x1 ? -1.0 : 0.0;
    const double diw_dx2 = a.x2 <= b.x2 ? 1.0 : 0.0;
    const double dih_dy1 = a.y1 >= b.y1 ? -1.0 : 0.0;
    const double dih_dy2 = a.y2 <= b.y2 ? 1.0 : 0.0;
    d_inter = {ih * diw_dx1, iw * dih_dy1, ih * diw_dx2, iw * dih_dy2};
  }

  const double uni = area_a + area_b - inter;
  const double iou_v = inter / uni;

  const double hw = std::max(a.x2, b.x2) - std::min(a.x1, b.x1);
  const double hh = std::max(a.y2, b.y2) - std::min(a.y1, b.y1);
  const double hull = hw * hh;
  const std::array<double, 4> d_hw = {a.x1 <= b.x1 ? -1.0 : 0.0, 0.0, a.x2 >= b.x2 ? 1.0 : 0.0,
                                      0.0};
  const std::array<double, 4> d_hh = {0.0, a.y1 <= b.y1 ? -1.0 : 0.0, 0.0,
                                      a.y2 >= b.y2 ? 1.0 : 0.0};

  GiouResult res;
  res.value = iou_v - (hull - uni) / hull;
  for (int k = 0; k < 4; ++k) {
    const double d_union = d_area[k] - d_inter[k];
    const double d_iou = (d_inter[k] * uni - inter * d_union) / (uni * uni);
    const double d_hull = d_hw[k] * hh + hw * d_hh[k];
    const double d_ratio = (d_union * hull - uni * d_hull) / (hull * hull);  // d (union/hull)
    res.grad[k] = d_iou + d_ratio;
  }
  return res;
}

inline double giou(const BBox& a, const BBox& b) { return giou_with_grad(a, b).value; }

struct GiouLossResult {
  double value = 0.0;                          // mean over boxes of 1 - giou
  std::vector<std::array<double, 4>> grad;     // per predicted box
};

inline GiouLossResult giou_loss(const std::vector<BBox>& pred, const std::vector<BBox>& target) {
  if (pred.size() != target.size()) throw std::runtime_error("giou loss: size mismatch");
  GiouLossResult res;
  res.grad.resize(pred.size());
  if (pred.empty()) return res;
  double sum = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    auto g = giou_with_grad(pred[i], target[i]);
    sum += 1.0 - g.value;
    for (int k = 0; k < 4; ++k) res.grad[i][k] = -g.grad[k] / static_cast<double>(pred.size());
  }
  res.value = sum / static_cast<double>(pred.size());
  return res;
}

// ---------------------------------------------------------------------------
// Combined objective
// ---------------------------------------------------------------------------

struct LossBreakdown {
  double l_ali = 0.0;
  double l_cen = 0.0;
  double l_reg = 0.0;  // already masked to 0 for non-detection kinds
  double total = 0.0;
  int num_positives = 0;
};

struct TotalLossResult {
  LossBreakdown breakdown;
  Mat d_scores;                              // gradient w.r.t. S
  std::vector<double> d_centerness;          // gradient w.r.t. centerness logits
  std::vector<std::array<double, 4>> d_boxes;  // gradient w.r.t. predicted boxes (per positive)
};

struct LossWeights {
  double alpha = 1.0;    // centerness weight
  double beta = 1.0;     // regression weight
  double gamma = 2.0;    // focal exponent
  double alpha_f = 0.25; // focal class balance, < 0 disables
};

// Eq-style objective: focal alignment + alpha * centerness + beta *
// regression, with the regression term removed for non-detection data.
// All sums run in fixed iteration order. pred/target boxes are listed per
// positive anchor in ascending anchor index order.
inline TotalLossResult total_loss(const Mat& scores, const Mat& targets,
                                  const std::vector<double>& centerness_logits,
                                  const std::vector<double>& centerness_targets,
                                  const std::vector<bool>& positive_mask,
                                  const std::vector<BBox>& pred_boxes,
                                  const std::vector<BBox>& target_boxes, RecordKind kind,
                                  const LossWeights& w = {}) {
  int num_pos = 0;
  for (bool p : positive_mask) num_pos += p ? 1 : 0;
  const int normalizer = std::max(1, num_pos);

  auto ali = sigmoid_focal_alignment_loss(scores, targets, w.gamma, w.alpha_f, normalizer);
  auto cen = centerness_loss(centerness_logits, centerness_targets, positive_mask);
  const bool use_reg = kind == RecordKind::detection;
  GiouLossResult reg;
  if (use_reg) reg = giou_loss(pred_boxes, target_boxes);

  TotalLossResult res;
  res.breakdown.l_ali = ali.value;
  res.breakdown.l_cen = cen.value;
  res.breakdown.l_reg = use_reg ? reg.value : 0.0;
  res.breakdown.num_positives = num_pos;
  res.breakdown.total =
      res.breakdown.l_ali + w.alpha * res.breakdown.l_cen + w.beta * res.breakdown.l_reg;

  res.d_scores = std::move(ali.grad);
  res.d_centerness = std::move(cen.grad);
  for (double& g : res.d_centerness) g *= w.alpha;
  res.d_boxes.assign(pred_boxes.size(), {0, 0, 0, 0});
  if (use_reg) {
    res.d_boxes = std::move(reg.grad);
    for (auto& g : res.d_boxes)
      for (double& x : g) x *= w.beta;
  }
  return res;
}

}  // namespace ovdet
