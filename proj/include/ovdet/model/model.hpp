#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "ovdet/core/mat.hpp"
#include "ovdet/model/config.hpp"
#include "ovdet/model/image_encoder.hpp"
#include "ovdet/model/text_encoder.hpp"

namespace ovdet {

// S[n][m] = dot(F_text[n], F_image[m]) -- a bare inner product, no bias
// or temperature.
inline nn::Var alignment_scores(const nn::Var& text_features, const nn::Var& image_features) {
  if (text_features->value.cols() != image_features->value.cols())
    throw std::runtime_error("alignment_scores: feature dimension mismatch");
  return nn::matmul_nt(text_features, image_features);
}

inline Mat to_mat(const nn::Tensor& t) {
  Mat m(t.rows(), t.cols());
  m.d = t.v;
  return m;
}

// The dual encoder: image side (visual group) and text side (text group)
// share nothing but the embedding dimension.
class DualEncoderModel {
 public:
  DualEncoderModel(const ModelConfig& cfg, uint64_t init_seed) : cfg_(cfg) {
    Rng rng(child_seed(init_seed, "init"));
    image_ = std::make_unique<ImageEncoder>(registry_, cfg_, rng);
    text_ = std::make_unique<TextEncoder>(registry_, cfg_, rng);
  }

  ImageEncoderOutput encode_image(const Image& img) const {
    auto out = image_->encode(img);
    if (cfg_.normalize_features) out.features = nn::l2_normalize_rows(out.features);
    return out;
  }

  nn::Var encode_concepts(const std::vector<TokenSeq>& seqs) const {
    auto ft = text_->encode_concepts(seqs);
    if (cfg_.normalize_features && ft->value.rows() > 0) ft = nn::l2_normalize_rows(ft);
    return ft;
  }

  const ModelConfig& config() const { return cfg_; }
  const nn::ParamRegistry& registry() const { return registry_; }

  std::vector<nn::Var> visual_params() const { return params_with_prefix("image."); }
  std::vector<nn::Var> text_params() const { return params_with_prefix("text."); }

 private:
  std::vector<nn::Var> params_with_prefix(const std::string& prefix) const {
    std::vector<nn::Var> out;
    for (const auto& p : registry_.params())
      if (p.name.rfind(prefix, 0) == 0) out.push_back(p.var);
    return out;
  }

  ModelConfig cfg_;
  nn::ParamRegistry registry_;
  std::unique_ptr<ImageEncoder> image_;
  std::unique_ptr<TextEncoder> text_;
};

}  // namespace ovdet
