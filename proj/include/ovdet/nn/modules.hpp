#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ovdet/core/rng.hpp"
#include "ovdet/nn/autodiff.hpp"

namespace ovdet::nn {

struct NamedParam {
  std::string name;
  Var var;
};

// Flat parameter registry; modules register at construction so the
// optimizer and the checkpoint writer see one stable, ordered list.
class ParamRegistry {
 public:
  Var add(const std::string& name, Tensor init) {
    auto v = make_param(std::move(init));
    params_.push_back({name, v});
    return v;
  }
  const std::vector<NamedParam>& params() const { return params_; }

 private:
  std::vector<NamedParam> params_;
};

inline Tensor uniform_init(std::vector<int> shape, double limit, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& x : t.v) x = uniform_real(rng, -limit, limit);
  return t;
}

inline Tensor kaiming_init(std::vector<int> shape, int fan_in, Rng& rng) {
  return uniform_init(std::move(shape), std::sqrt(6.0 / fan_in), rng);
}

// y = x W + b, W stored (in x out)
struct Linear {
  Var w, b;

  Linear() = default;
  Linear(ParamRegistry& reg, const std::string& name, int in, int out, Rng& rng)
      : w(reg.add(name + ".w", kaiming_init({in, out}, in, rng))),
        b(reg.add(name + ".b", Tensor({out}))) {}

  Var operator()(const Var& x) const { return add_rowvec(matmul(x, w), b); }
};

struct Conv {
  Var w, b;
  int stride, pad;

  Conv() = default;
  Conv(ParamRegistry& reg, const std::string& name, int cin, int cout, int k, int stride_,
       int pad_, Rng& rng)
      : w(reg.add(name + ".w", kaiming_init({cout, cin, k, k}, cin * k * k, rng))),
        b(reg.add(name + ".b", Tensor({cout}))),
        stride(stride_),
        pad(pad_) {}

  Var operator()(const Var& x) const { return conv2d(x, w, b, stride, pad); }
};

struct LayerNorm {
  Var gain, bias;

  LayerNorm() = default;
  LayerNorm(ParamRegistry& reg, const std::string& name, int dim)
      : gain(reg.add(name + ".g", Tensor({dim}, 1.0))), bias(reg.add(name + ".b", Tensor({dim}))) {}

  Var operator()(const Var& x) const { return layernorm_rows(x, gain, bias); }
};

struct Embedding {
  Var table;

  Embedding() = default;
  Embedding(ParamRegistry& reg, const std::string& name, int vocab, int dim, Rng& rng)
      : table(reg.add(name, uniform_init({vocab, dim}, 0.05, rng))) {}

  Var operator()(const std::vector<int>& ids) const { return embedding_lookup(table, ids); }
};

// ---------------------------------------------------------------------------
// Adam with parameter groups (visual / text split for the two-rate
// schedule). Weight decay is decoupled (AdamW style); zero by default.
// ---------------------------------------------------------------------------

class Adam {
 public:
  struct Group {
    std::vector<Var> params;
    double lr = 1e-3;
  };

  Adam(std::vector<Group> groups, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8,
       double weight_decay = 0.0)
      : groups_(std::move(groups)), b1_(beta1), b2_(beta2), eps_(eps), wd_(weight_decay) {
    for (auto& g : groups_)
      for (auto& p : g.params) {
        m_.emplace_back(p->value.shape);
        v_.emplace_back(p->value.shape);
      }
  }

  void step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(b1_, t_);
    const double bc2 = 1.0 - std::pow(b2_, t_);
    size_t slot = 0;
    for (auto& g : groups_) {
      for (auto& p : g.params) {
        auto& m = m_[slot];
        auto& v = v_[slot];
        ++slot;
        for (size_t i = 0; i < p->value.v.size(); ++i) {
          double grad = p->grad.v[i];
          m.v[i] = b1_ * m.v[i] + (1 - b1_) * grad;
          v.v[i] = b2_ * v.v[i] + (1 - b2_) * grad * grad;
          double mhat = m.v[i] / bc1;
          double vhat = v.v[i] / bc2;
          p->value.v[i] -= g.lr * (mhat / (std::sqrt(vhat) + eps_) + wd_ * p->value.v[i]);
        }
      }
    }
  }

  void zero_grad() {
    for (auto& g : groups_)
      for (auto& p : g.params)
        for (double& x : p->grad.v) x = 0.0;
  }

  void scale_lr(double factor) {
    for (auto& g : groups_) g.lr *= factor;
  }

  double lr(size_t group) const { return groups_.at(group).lr; }
  void set_lr(size_t group, double lr) { groups_.at(group).lr = lr; }

 private:
  std::vector<Group> groups_;
  std::vector<Tensor> m_, v_;
  double b1_, b2_, eps_, wd_;
  int64_t t_ = 0;
};

}  // namespace ovdet::nn
