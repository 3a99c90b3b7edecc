#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ovdet/core/mat.hpp"
#include "ovdet/data/boxes.hpp"

namespace ovdet {

struct LevelRange {
  int start = 0;
  int count = 0;
};

struct AssignedObject {
  BBox box;
  int concept_index = 0;  // row of G, must be < N
};

struct AssignmentResult {
  Mat g;                                    // N x M binary alignment matrix
  std::vector<bool> positive_mask;          // size M
  std::vector<BBox> reg_targets;            // one per positive anchor, ascending index
  std::vector<double> centerness_targets;   // size M, zero off-positives
  int num_positives = 0;
  int num_unassigned_objects = 0;
};

inline double fcos_centerness(const BBox& box, double cx, double cy) {
  double l = cx - box.x1, r = box.x2 - cx;
  double t = cy - box.y1, b = box.y2 - cy;
  double lr = std::min(l, r) / std::max(l, r);
  double tb = std::min(t, b) / std::max(t, b);
  return std::sqrt(std::max(0.0, lr * tb));
}

// Adaptive training sample selection. Per object: the topk anchors
// closest by center distance on each level are candidates; the IoU
// threshold adapts to mean + sample std of the candidate IoUs; positives
// additionally need their center inside the object box. An anchor
// claimed by several objects goes to the one with highest IoU.
inline AssignmentResult atss_assign(const std::vector<BBox>& anchors,
                                    const std::vector<LevelRange>& levels,
                                    const std::vector<AssignedObject>& objects, int num_concepts,
                                    int topk = 9) {
  const int m = static_cast<int>(anchors.size());
  constexpr double kCenterEps = 0.01;

  AssignmentResult res;
  res.g = Mat(num_concepts, m);
  res.positive_mask.assign(m, false);
  res.centerness_targets.assign(m, 0.0);

  // claim[m] = (iou, object index) of the current best claim
  std::vector<std::pair<double, int>> claim(m, {-1.0, -1});
  std::vector<bool> object_got_positive(objects.size(), false);

  for (size_t oi = 0; oi < objects.size(); ++oi) {
    const auto& obj = objects[oi];
    if (obj.concept_index < 0 || obj.concept_index >= num_concepts)
      throw std::runtime_error("atss_assign: concept index out of range");
    if (!obj.box.valid()) throw std::runtime_error("atss_assign: invalid object box");

    // candidates: topk closest anchor centers per level
    std::vector<int> candidates;
    for (const auto& lvl : levels) {
      std::vector<std::pair<double, int>> dist;
      dist.reserve(lvl.count);
      for (int a = lvl.start; a < lvl.start + lvl.count; ++a) {
        double dx = anchors[a].cx() - obj.box.cx();
        double dy = anchors[a].cy() - obj.box.cy();
        dist.emplace_back(dx * dx + dy * dy, a);
      }
      int take = std::min<int>(topk, static_cast<int>(dist.size()));
      std::partial_sort(dist.begin(), dist.begin() + take, dist.end());
      for (int i = 0; i < take; ++i) candidates.push_back(dist[i].second);
    }
    if (candidates.empty()) continue;

    std::vector<double> cand_iou(candidates.size());
    for (size_t i = 0; i < candidates.size(); ++i)
      cand_iou[i] = iou(anchors[candidates[i]], obj.box);

    double mean = std::accumulate(cand_iou.begin(), cand_iou.end(), 0.0) /
                  static_cast<double>(cand_iou.size());
    double var = 0.0;
    for (double v : cand_iou) var += (v - mean) * (v - mean);
    double sd = cand_iou.size() > 1 ? std::sqrt(var / static_cast<double>(cand_iou.size() - 1))
                                    : 0.0;
    double thr = mean + sd;

    for (size_t i = 0; i < candidates.size(); ++i) {
      int a = candidates[i];
      if (cand_iou[i] < thr) continue;
      if (!obj.box.contains_point(anchors[a].cx(), anchors[a].cy(), kCenterEps)) continue;
      if (cand_iou[i] > claim[a].first) claim[a] = {cand_iou[i], static_cast<int>(oi)};
    }
  }

  for (int a = 0; a < m; ++a) {
    if (claim[a].second < 0) continue;
    const auto& obj = objects[claim[a].second];
    res.positive_mask[a] = true;
    res.g.at(obj.concept_index, a) = 1.0;
    res.reg_targets.push_back(obj.box);
    res.centerness_targets[a] = fcos_centerness(obj.box, anchors[a].cx(), anchors[a].cy());
    res.num_positives++;
    object_got_positive[claim[a].second] = true;
  }
  for (size_t oi = 0; oi < objects.size(); ++oi)
    if (!object_got_positive[oi]) res.num_unassigned_objects++;

  return res;
}

}  // namespace ovdet
