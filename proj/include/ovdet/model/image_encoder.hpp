#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ovdet/core/image.hpp"
#include "ovdet/data/boxes.hpp"
#include "ovdet/model/atss.hpp"
#include "ovdet/model/config.hpp"
#include "ovdet/nn/modules.hpp"

namespace ovdet {

// Region features plus dense box/centerness predictions for one image.
// Row m of features lines up with anchors[m]; anchors are laid out level
// by level, row-major within a level, one square anchor per location.
struct ImageEncoderOutput {
  nn::Var features;          // M x D
  nn::Var box_deltas;        // M x 4
  nn::Var centerness;        // M x 1
  std::vector<BBox> anchors; // M
  std::vector<LevelRange> levels;
};

// Four stride-2 convs; taps at stride 8 and 16 feed a shared head that
// emits D-dim region features, anchor deltas and a centerness logit.
class ImageEncoder {
 public:
  ImageEncoder(nn::ParamRegistry& reg, const ModelConfig& cfg, Rng& rng) : cfg_(cfg) {
    const int c = cfg.base_channels;
    conv1_ = nn::Conv(reg, "image.conv1", 3, c, 3, 2, 1, rng);
    conv2_ = nn::Conv(reg, "image.conv2", c, 2 * c, 3, 2, 1, rng);
    conv3_ = nn::Conv(reg, "image.conv3", 2 * c, 4 * c, 3, 2, 1, rng);
    conv4_ = nn::Conv(reg, "image.conv4", 4 * c, 4 * c, 3, 2, 1, rng);
    head_conv_ = nn::Conv(reg, "image.head.conv", 4 * c, 4 * c, 3, 1, 1, rng);
    feat_proj_ = nn::Conv(reg, "image.head.feat", 4 * c, cfg.d_model, 1, 1, 0, rng);
    box_head_ = nn::Conv(reg, "image.head.box", 4 * c, 4, 1, 1, 0, rng);
    ctr_head_ = nn::Conv(reg, "image.head.ctr", 4 * c, 1, 1, 1, 0, rng);
    if (cfg.strides != std::vector<int>{8, 16})
      throw std::runtime_error("image encoder supports strides {8,16}");
  }

  ImageEncoderOutput encode(const Image& image) const {
    const int coarsest = cfg_.strides.back();
    if (image.height % coarsest != 0 || image.width % coarsest != 0)
      throw std::runtime_error("image size must be divisible by stride " +
                               std::to_string(coarsest));
    if (image.channels != 3) throw std::runtime_error("image encoder expects 3 channels");

    // HWC [0,1] -> CHW tensor
    nn::Tensor x({3, image.height, image.width});
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < image.height; ++y)
        for (int xpos = 0; xpos < image.width; ++xpos)
          x.v[(static_cast<size_t>(c) * image.height + y) * image.width + xpos] =
              image.at(y, xpos, c);

    auto h1 = nn::relu(conv1_(nn::make_input(std::move(x))));
    auto h2 = nn::relu(conv2_(h1));
    auto p8 = nn::relu(conv3_(h2));   // stride 8
    auto p16 = nn::relu(conv4_(p8));  // stride 16

    ImageEncoderOutput out;
    std::vector<nn::Var> feats, boxes, ctrs;
    std::vector<nn::Var> taps = {p8, p16};
    for (size_t li = 0; li < taps.size(); ++li) {
      auto head = nn::relu(head_conv_(taps[li]));
      feats.push_back(nn::chw_to_rows(feat_proj_(head)));
      boxes.push_back(nn::chw_to_rows(box_head_(head)));
      ctrs.push_back(nn::chw_to_rows(ctr_head_(head)));

      int stride = cfg_.strides[li];
      int gh = image.height / stride, gw = image.width / stride;
      double side = cfg_.anchor_scale * 8.0 * stride;
      out.levels.push_back({static_cast<int>(out.anchors.size()), gh * gw});
      for (int gy = 0; gy < gh; ++gy)
        for (int gx = 0; gx < gw; ++gx) {
          double cx = (gx + 0.5) * stride, cy = (gy + 0.5) * stride;
          out.anchors.push_back(BBox{cx - side / 2, cy - side / 2, cx + side / 2, cy + side / 2});
        }
    }
    out.features = nn::concat_rows(feats);
    out.box_deltas = nn::concat_rows(boxes);
    out.centerness = nn::concat_rows(ctrs);
    return out;
  }

  const ModelConfig& config() const { return cfg_; }

 private:
  ModelConfig cfg_;
  nn::Conv conv1_, conv2_, conv3_, conv4_;
  nn::Conv head_conv_, feat_proj_, box_head_, ctr_head_;
};

}  // namespace ovdet
