#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "ovdet/core/mat.hpp"
#include "ovdet/data/boxes.hpp"
#include "ovdet/losses/losses.hpp"

namespace ovdet {

constexpr double kMaxLogScaleDelta = 4.0;

// Standard anchor-delta parameterization: center shift scaled by anchor
// size, log-scale width/height (clamped against exp overflow).
inline BBox decode_box(const BBox& anchor, double dx, double dy, double dw, double dh) {
  double aw = anchor.width(), ah = anchor.height();
  double cx = anchor.cx() + dx * aw;
  double cy = anchor.cy() + dy * ah;
  double w = aw * std::exp(std::min(dw, kMaxLogScaleDelta));
  double h = ah * std::exp(std::min(dh, kMaxLogScaleDelta));
  return BBox{cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2};
}

// Chain rule from a gradient w.r.t. the decoded box corners back to the
// four deltas.
inline std::array<double, 4> box_grad_to_delta_grad(const BBox& anchor, double dw, double dh,
                                                    const std::array<double, 4>& d_box) {
  double aw = anchor.width(), ah = anchor.height();
  double w = aw * std::exp(std::min(dw, kMaxLogScaleDelta));
  double h = ah * std::exp(std::min(dh, kMaxLogScaleDelta));
  double d_cx = d_box[0] + d_box[2];
  double d_cy = d_box[1] + d_box[3];
  double d_w = 0.5 * (d_box[2] - d_box[0]);
  double d_h = 0.5 * (d_box[3] - d_box[1]);
  std::array<double, 4> g{};
  g[0] = d_cx * aw;
  g[1] = d_cy * ah;
  g[2] = dw < kMaxLogScaleDelta ? d_w * w : 0.0;  // clamp kills the gradient
  g[3] = dh < kMaxLogScaleDelta ? d_h * h : 0.0;
  return g;
}

struct Detection {
  BBox box;
  int concept_index = 0;
  std::string concept_name;
  double score = 0.0;
};

// Greedy class-wise NMS; boxes with IoU strictly above the threshold to
// an already-kept higher-scoring box of the same class are suppressed.
inline std::vector<Detection> nms_classwise(std::vector<Detection> dets, double iou_thresh) {
  std::stable_sort(dets.begin(), dets.end(),
                   [](const Detection& a, const Detection& b) { return a.score > b.score; });
  std::vector<Detection> kept;
  for (const auto& d : dets) {
    bool suppressed = false;
    for (const auto& k : kept) {
      if (k.concept_index == d.concept_index && iou(k.box, d.box) > iou_thresh) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(d);
  }
  return kept;
}

// Dense head decoding: detection score = sigmoid(alignment) *
// sigmoid(centerness), boxes decoded from anchors and clipped to the
// image, then class-wise NMS.
inline std::vector<Detection> decode_predictions(
    const Mat& scores, const Mat& box_deltas, const std::vector<BBox>& anchors,
    const std::vector<double>& centerness_logits, const std::vector<std::string>& concept_names,
    double score_thresh, double nms_iou, double image_w, double image_h) {
  const int n = scores.rows, m = scores.cols;
  if (static_cast<int>(anchors.size()) != m || box_deltas.rows != m ||
      static_cast<int>(centerness_logits.size()) != m || static_cast<int>(concept_names.size()) < n)
    throw std::runtime_error("decode_predictions: shape mismatch");

  std::vector<Detection> dets;
  std::vector<double> ctr(m);
  for (int a = 0; a < m; ++a) ctr[a] = sigmoid(centerness_logits[a]);
  std::vector<BBox> decoded(m);
  std::vector<bool> box_ok(m);
  for (int a = 0; a < m; ++a) {
    BBox b = decode_box(anchors[a], box_deltas.at(a, 0), box_deltas.at(a, 1), box_deltas.at(a, 2),
                        box_deltas.at(a, 3));
    b = clip_box(b, image_w, image_h);
    decoded[a] = b;
    box_ok[a] = b.valid();
  }
  for (int c = 0; c < n; ++c) {
    for (int a = 0; a < m; ++a) {
      if (!box_ok[a]) continue;
      double s = sigmoid(scores.at(c, a)) * ctr[a];
      if (s < score_thresh) continue;
      dets.push_back({decoded[a], c, concept_names[c], s});
    }
  }
  return nms_classwise(std::move(dets), nms_iou);
}

}  // namespace ovdet
