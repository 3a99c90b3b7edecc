#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ovdet/data/tokenizer.hpp"
#include "ovdet/model/config.hpp"
#include "ovdet/nn/modules.hpp"

namespace ovdet {

// Per-concept transformer encoder. Each sequence is encoded on its own
// (no cross-concept attention); the hidden state at the end-of-sequence
// position is the concept embedding.
class TextEncoder {
 public:
  TextEncoder(nn::ParamRegistry& reg, const ModelConfig& cfg, Rng& rng) : cfg_(cfg) {
    if (cfg.vocab_size <= 0) throw std::runtime_error("text encoder needs vocab_size > 0");
    if (cfg.d_model % cfg.text_heads != 0)
      throw std::runtime_error("d_model must divide by text_heads");
    tok_emb_ = nn::Embedding(reg, "text.tok_emb", cfg.vocab_size, cfg.d_model, rng);
    pos_emb_ = reg.add("text.pos_emb", nn::uniform_init({cfg.max_tokens, cfg.d_model}, 0.05, rng));
    for (int l = 0; l < cfg.text_layers; ++l) {
      std::string p = "text.layer" + std::to_string(l);
      layers_.push_back(Layer{
          nn::LayerNorm(reg, p + ".ln1", cfg.d_model),
          nn::Linear(reg, p + ".q", cfg.d_model, cfg.d_model, rng),
          nn::Linear(reg, p + ".k", cfg.d_model, cfg.d_model, rng),
          nn::Linear(reg, p + ".v", cfg.d_model, cfg.d_model, rng),
          nn::Linear(reg, p + ".o", cfg.d_model, cfg.d_model, rng),
          nn::LayerNorm(reg, p + ".ln2", cfg.d_model),
          nn::Linear(reg, p + ".ffn1", cfg.d_model, 2 * cfg.d_model, rng),
          nn::Linear(reg, p + ".ffn2", 2 * cfg.d_model, cfg.d_model, rng),
      });
    }
    final_ln_ = nn::LayerNorm(reg, "text.ln_f", cfg.d_model);
  }

  // one concept sequence -> 1 x D embedding (hidden state at EOS)
  nn::Var encode_one(const TokenSeq& seq) const {
    if (seq.ids.empty() || seq.ids.back() != kEosTokenId)
      throw std::runtime_error("token sequence must end with EOS");
    if (static_cast<int>(seq.ids.size()) > cfg_.max_tokens)
      throw std::runtime_error("token sequence exceeds max_tokens");

    int len = static_cast<int>(seq.ids.size());
    auto x = nn::add(tok_emb_(seq.ids), nn::slice_rows(pos_emb_, 0, len));
    const int dh = cfg_.d_model / cfg_.text_heads;
    for (const auto& layer : layers_) {
      auto h = layer.ln1(x);
      auto q = layer.q(h), k = layer.k(h), v = layer.v(h);
      std::vector<nn::Var> heads;
      for (int hd = 0; hd < cfg_.text_heads; ++hd) {
        auto qi = nn::slice_cols(q, hd * dh, (hd + 1) * dh);
        auto ki = nn::slice_cols(k, hd * dh, (hd + 1) * dh);
        auto vi = nn::slice_cols(v, hd * dh, (hd + 1) * dh);
        auto att = nn::softmax_rows(nn::scale(nn::matmul_nt(qi, ki), 1.0 / std::sqrt(dh)));
        heads.push_back(nn::matmul(att, vi));
      }
      x = nn::add(x, layer.o(nn::concat_cols(heads)));
      auto f = layer.ffn2(nn::relu(layer.ffn1(layer.ln2(x))));
      x = nn::add(x, f);
    }
    x = final_ln_(x);
    return nn::slice_rows(x, seq.eos_index, seq.eos_index + 1);
  }

  // N sequences -> N x D matrix (row n depends only on sequence n)
  nn::Var encode_concepts(const std::vector<TokenSeq>& seqs) const {
    if (seqs.empty()) return nn::make_input(nn::Tensor({0, cfg_.d_model}));
    std::vector<nn::Var> rows;
    rows.reserve(seqs.size());
    for (const auto& s : seqs) rows.push_back(encode_one(s));
    return nn::concat_rows(rows);
  }

 private:
  struct Layer {
    nn::LayerNorm ln1;
    nn::Linear q, k, v, o;
    nn::LayerNorm ln2;
    nn::Linear ffn1, ffn2;
  };

  ModelConfig cfg_;
  nn::Embedding tok_emb_;
  nn::Var pos_emb_;
  std::vector<Layer> layers_;
  nn::LayerNorm final_ln_;
};

}  // namespace ovdet
