#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace ovdet::nn {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using EMap = Eigen::Map<EMat>;
using ECMap = Eigen::Map<const EMat>;

// Dense row-major tensor. Rank is implied by shape.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> v;

  Tensor() = default;
  explicit Tensor(std::vector<int> s, double fill = 0.0) : shape(std::move(s)) {
    v.assign(numel_of(shape), fill);
  }

  static size_t numel_of(const std::vector<int>& s) {
    size_t n = 1;
    for (int d : s) n *= static_cast<size_t>(d);
    return n;
  }
  size_t numel() const { return v.size(); }

  int rows() const { return shape.size() == 2 ? shape[0] : (shape.size() == 1 ? 1 : 0); }
  int cols() const { return shape.size() == 2 ? shape[1] : (shape.size() == 1 ? shape[0] : 0); }

  EMap mat() { return EMap(v.data(), rows(), cols()); }
  ECMap mat() const { return ECMap(v.data(), rows(), cols()); }
};

// One node of the backward graph. Interior nodes are created with zeroed
// grads, so gradients accumulate correctly across repeated backward()
// calls without an explicit zeroing pass; parameter grads are cleared by
// the optimizer.
class Node {
 public:
  Tensor value;
  Tensor grad;
  bool is_param = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;  // pushes this->grad into parents

  explicit Node(Tensor val) : value(std::move(val)) { grad = Tensor(value.shape); }
};

using Var = std::shared_ptr<Node>;

inline Var make_input(Tensor t) { return std::make_shared<Node>(std::move(t)); }

inline Var make_param(Tensor t) {
  auto n = std::make_shared<Node>(std::move(t));
  n->is_param = true;
  return n;
}

// ---------------------------------------------------------------------------
// Ops
// ---------------------------------------------------------------------------

inline Var matmul(const Var& a, const Var& b) {
  if (a->value.cols() != b->value.rows()) throw std::runtime_error("matmul: shape mismatch");
  Tensor out({a->value.rows(), b->value.cols()});
  out.mat() = a->value.mat() * b->value.mat();
  auto n = std::make_shared<Node>(std::move(out));
  n->parents = {a, b};
  n->backward_fn = [a, b](Node& self) {
    a->grad.mat() += self.grad.mat() * b->value.mat().transpose();
    b->grad.mat() += a->value.mat().transpose() * self.grad.mat();
  };
  return n;
}

// a * b^T without materializing the transpose
inline Var matmul_nt(const Var& a, const Var& b) {
  if (a->value.cols() != b->value.cols()) throw std::runtime_error("matmul_nt: shape mismatch");
  Tensor out({a->value.rows(), b->value.rows()});
  out.mat() = a->value.mat() * b->value.mat().transpose();
  auto n = std::make_shared<Node>(std::move(out));
  n->parents = {a, b};
  n->backward_fn = [a, b](Node& self) {
    a->grad.mat() += self.grad.mat() * b->value.mat();
    b->grad.mat() += self.grad.mat().transpose() * a->value.mat();
  };
  return n;
}

inline Var add(const Var& a, const Var& b) {
  if (a->value.shape != b->value.shape) throw std::runtime_error("add: shape mismatch");
  Tensor out = a->value;
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] += b->value.v[i];
  auto n = std::make_shared<Node>(std::move(out));
  n->parents = {a, b};
  n->backward_fn = [a, b](Node& self) {
    for (size_t i = 0; i < self.grad.v.size(); ++i) {
      a->grad.v[i] += self.grad.v[i];
      b->grad.v[i] += self.grad.v[i];
    }
  };
  return n;
}

// rows of a plus a length-c bias vector
inline Var add_rowvec(const Var& a, const Var& bias) {
  int c = a->value.cols();
  if (static_cast<int>(bias->value.numel()) != c)
    throw std::runtime_error("add_rowvec: bias size mismatch");
  Tensor out = a->value;
  int r = a->value.rows();
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) out.v[static_cast<size_t>(i) * c + j] += bias->value.v[j];
  auto n = std::make_shared<Node>(std::move(out));
  n->parents = {a, bias};
  n->backward_fn = [a, bias, r, c](Node& self) {
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) {
        double g = self.grad.v[static_cast<size_t>(i) * c + j];
        a->grad.v[static_cast<size_t>(i) * c + j] += g;
        bias->grad.v[j] += g;
      }
  };
  return n;
}

inline Var relu(const Var& a) {
  Tensor out = a->value;
  for (double& x : out.v) x = x > 0 ? x : 0;
  auto n = std::make_shared<Node>(std::move(out));
  n->parents = {a};
  n->backward_fn = [a](Node& self) {
    for (size_t i = 0; i < self.grad.v.size(); ++i)
      if (a->value.v[i] > 0) a->grad.v[i] += self.grad.v[i];
  };
  return n;
}

inline Var scale(const Var& a, double s) {
  Tensor out = a->value;
  for (double& x : out.v) x *= s;
  auto n = std::make_shared<Node>(std::move(out));
  n->parents = {a};
  n->backward_fn = [a, s](Node& self) {
    for (size_t i = 0; i < self.grad.v.size(); ++i) a->grad.v[i] += s * self.grad.v[i];
  };
  return n;
}

inline Var slice_cols(const Var& a, int c0, int c1) {
  int r = a->value.rows(), c = a->value.cols();
  if (c0 < 0 || c1 > c || c0 >= c1) throw std::runtime_error("slice_cols: bad range");
  Tensor out({r, c1 - c0});
  for (int i = 0; i < r; ++i)
    for (int j = c0; j < c1; ++j)
      out.v[static_cast<size_t>(i) * (c1 - c0) + (j - c0)] =
          a->value.v[static_cast<size_t>(i) * c + j];
  auto n = std::make_shared<Node>(std::move(out));
  n->parents = {a};
  n->backward_fn = [a, r, c, c0, c1](Node& self) {
    for (int i = 0; i < r; ++i)
      for (int j = c0; j < c1; ++j)
        a->grad.v[static_cast<size_t>(i) * c + j] +=
            self.grad.v[static_cast<size_t>(i) * (c1 - c0) + (j - c0)];
  };
  return n;
}

inline Var slice_rows(const Var& a, int r0, int r1) {
  int r = a->value.rows(), c = a->value.cols();
  if (r0 < 0 || r1 > r || r0 >= r1) throw std::runtime_error("slice_rows: bad range");
  Tensor out({r1 - r0, c});
  std::copy(a->value.v.begin() + static_cast<size_t>(r0) * c,
            a->value.v.begin() + static_cast<size_t>(r1) * c, out.v.begin());
  auto n = std::make_shared<Node>(std::move(out));
  n->parents = {a};
  n->backward_fn = [a, c, r0, r1](Node& self) {
    for (size_t i = 0; i < self.grad.v.size(); ++i)
      a->grad.v[static_cast<size_t>(r0) * c + i] += self.grad.v[i];
  };
  return n;
}

inline Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::runtime_error("concat_cols: empty");
  int r = parts[0]->value.rows();
  int total = 0;
  for (const auto& p : parts) {
    if (p->value.rows() != r) throw std::runtime_error("concat_cols: row mismatch");
    total += p->value.cols();
  }
  Tensor out({r, total});
  int off = 0;
  for (const auto& p : parts) {
    int c = p->value.cols();
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j)
        out.v[static_cast<size_t>(i) * total + off + j] = p->value.v[static_cast<size_t>(i) * c + j];
    off += c;
  }
  auto n = std::make_shared<Node>(std::move(out));
  n->parents = parts;
  n->backward_fn = [parts, r, total](Node& self) {
    int off2 = 0;
    for (const auto& p : parts) {
      int c = p->value.cols();
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j)
          p->grad.v[static_cast<size_t>(i) * c + j] +=
              self.grad.v[static_cast<size_t>(i) * total + off2 + j];
      off2 += c;
    }
  };
  return n;
}

// vertical stack of 1 x c rows
inline Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::runtime_error("concat_rows: empty");
  int c = parts[0]->value.cols();
  int total_r = 0;
  for (const auto& p : parts) {
    if (p->value.cols() != c) throw std::runtime_error("concat_rows: col mismatch");
    total_r += p->value.rows();
  }
  Tensor out({total_r, c});
  size_t off = 0;
  for (const auto& p : parts) {
    std::copy(p->value.v.begin(), p->value.v.end(), out.v.begin() + off);
    off += p->value.v.size();
  }
  auto n = std::make_shared<Node>(std::move(out));
  n->parents = parts;
  n->backward_fn = [parts](Node& self) {
    size_t off2 = 0;
    for (const auto& p : parts) {
      for (size_t i = 0; i < p->grad.v.size(); ++i) p->grad.v[i] += self.grad.v[off2 + i];
      off2 += p->grad.v.size();
    }
  };
  return n;
}

inline Var softmax_rows(const Var& a) {
  int r = a->value.rows(), c = a->value.cols();
  Tensor out({r, c});
  for (int i = 0; i < r; ++i) {
    const double* src = &a->value.v[static_cast<size_t>(i) * c];
    double* dst = &out.v[static_cast<size_t>(i) * c];
    double mx = src[0];
    for (int j = 1; j < c; ++j) mx = std::max(mx, src[j]);
    double sum = 0;
    for (int j = 0; j < c; ++j) {
      dst[j] = std::exp(src[j] - mx);
      sum += dst[j];
    }
    for (int j = 0; j < c; ++j) dst[j] /= sum;
  }
  auto n = std::make_shared<Node>(std::move(out));
  n->parents = {a};
  n->backward_fn = [a, r, c](Node& self) {
    for (int i = 0; i < r; ++i) {
      const double* y = &self.value.v[static_cast<size_t>(i) * c];
      const double* gy = &self.grad.v[static_cast<size_t>(i) * c];
      double dotp = 0;
      for (int j = 0; j < c; ++j) dotp += y[j] * gy[j];
      for (int j = 0; j < c; ++j)
        a->grad.v[static_cast<size_t>(i) * c + j] += y[j] * (gy[j] - dotp);
    }
  };
  return n;
}

// per-row layer norm with learned gain/bias of length c
inline Var layernorm_rows(const Var& a, const Var& gain, const Var& bias, double eps = 1e-5) {
  int r = a->value.rows(), c = a->value.cols();
  Tensor out({r, c});
  auto n = std::make_shared<Node>(Tensor({r, c}));
  // cache mean and inverse std per row for backward
  auto stats = std::make_shared<std::vector<std::pair<double, double>>>(r);
  for (int i = 0; i < r; ++i) {
    const double* src = &a->value.v[static_cast<size_t>(i) * c];
    double mean = 0;
    for (int j = 0; j < c; ++j) mean += src[j];
    mean /= c;
    double var = 0;
    for (int j = 0; j < c; ++j) var += (src[j] - mean) * (src[j] - mean);
    var /= c;
    double inv = 1.0 / std::sqrt(var + eps);
    (*stats)[i] = {mean, inv};
    for (int j = 0; j < c; ++j)
      n->value.v[static_cast<size_t>(i) * c + j] =
          (src[j] - mean) * inv * gain->value.v[j] + bias->value.v[j];
  }
  n->parents = {a, gain, bias};
  n->backward_fn = [a, gain, bias, stats, r, c](Node& self) {
    for (int i = 0; i < r; ++i) {
      auto [mean, inv] = (*stats)[i];
      const double* src = &a->value.v[static_cast<size_t>(i) * c];
      const double* gy = &self.grad.v[static_cast<size_t>(i) * c];
      // xhat_j = (x_j - mean) * inv
      double sum_gyg = 0, sum_gyg_xhat = 0;
      for (int j = 0; j < c; ++j) {
        double xhat = (src[j] - mean) * inv;
        double gyg = gy[j] * gain->value.v[j];
        sum_gyg += gyg;
        sum_gyg_xhat += gyg * xhat;
        gain->grad.v[j] += gy[j] * xhat;
        bias->grad.v[j] += gy[j];
      }
      for (int j = 0; j < c; ++j) {
        double xhat = (src[j] - mean) * inv;
        double gyg = gy[j] * gain->value.v[j];
        a->grad.v[static_cast<size_t>(i) * c + j] +=
            inv * (gyg - sum_gyg / c - xhat * sum_gyg_xhat / c);
      }
    }
  };
  return n;
}

// rows of `table` selected by token id
inline Var embedding_lookup(const Var& table, const std::vector<int>& ids) {
  int v = table->value.rows(), d = table->value.cols();
  Tensor out({static_cast<int>(ids.size()), d});
  for (size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= v) throw std::runtime_error("embedding_lookup: id out of range");
    std::copy(table->value.v.begin() + static_cast<size_t>(ids[i]) * d,
              table->value.v.begin() + static_cast<size_t>(ids[i] + 1) * d,
              out.v.begin() + i * d);
  }
  auto n = std::make_shared<Node>(std::move(out));
  n->parents = {table};
  n->backward_fn = [table, ids, d](Node& self) {
    for (size_t i = 0; i < ids.size(); ++i)
      for (int j = 0; j < d; ++j)
        table->grad.v[static_cast<size_t>(ids[i]) * d + j] += self.grad.v[i * d + j];
  };
  return n;
}

// row-wise x / ||x||
inline Var l2_normalize_rows(const Var& a, double eps = 1e-12) {
  int r = a->value.rows(), c = a->value.cols();
  Tensor out({r, c});
  auto norms = std::make_shared<std::vector<double>>(r);
  for (int i = 0; i < r; ++i) {
    const double* src = &a->value.v[static_cast<size_t>(i) * c];
    double n2 = 0;
    for (int j = 0; j < c; ++j) n2 += src[j] * src[j];
    double nn = std::sqrt(n2) + eps;
    (*norms)[i] = nn;
    for (int j = 0; j < c; ++j) out.v[static_cast<size_t>(i) * c + j] = src[j] / nn;
  }
  auto n = std::make_shared<Node>(std::move(out));
  n->parents = {a};
  n->backward_fn = [a, norms, r, c](Node& self) {
    for (int i = 0; i < r; ++i) {
      const double* y = &self.value.v[static_cast<size_t>(i) * c];
      const double* gy = &self.grad.v[static_cast<size_t>(i) * c];
      double dotp = 0;
      for (int j = 0; j < c; ++j) dotp += y[j] * gy[j];
      for (int j = 0; j < c; ++j)
        a->grad.v[static_cast<size_t>(i) * c + j] += (gy[j] - y[j] * dotp) / (*norms)[i];
    }
  };
  return n;
}

// ---------------------------------------------------------------------------
// conv2d on CHW tensors via im2col
// ---------------------------------------------------------------------------

struct ConvDims {
  int cin, h, w, cout, kh, kw, stride, pad, ho, wo;
};

inline void im2col(const double* x, const ConvDims& d, double* cols) {
  // cols is (cin*kh*kw) x (ho*wo)
  const int patch = d.cin * d.kh * d.kw;
  for (int c = 0; c < d.cin; ++c)
    for (int ky = 0; ky < d.kh; ++ky)
      for (int kx = 0; kx < d.kw; ++kx) {
        int prow = (c * d.kh + ky) * d.kw + kx;
        for (int oy = 0; oy < d.ho; ++oy) {
          int iy = oy * d.stride + ky - d.pad;
          for (int ox = 0; ox < d.wo; ++ox) {
            int ix = ox * d.stride + kx - d.pad;
            double val = 0;
            if (iy >= 0 && iy < d.h && ix >= 0 && ix < d.w)
              val = x[(static_cast<size_t>(c) * d.h + iy) * d.w + ix];
            cols[static_cast<size_t>(prow) * (d.ho * d.wo) + oy * d.wo + ox] = val;
          }
        }
        (void)patch;
      }
}

inline void col2im_add(const double* cols, const ConvDims& d, double* gx) {
  for (int c = 0; c < d.cin; ++c)
    for (int ky = 0; ky < d.kh; ++ky)
      for (int kx = 0; kx < d.kw; ++kx) {
        int prow = (c * d.kh + ky) * d.kw + kx;
        for (int oy = 0; oy < d.ho; ++oy) {
          int iy = oy * d.stride + ky - d.pad;
          if (iy < 0 || iy >= d.h) continue;
          for (int ox = 0; ox < d.wo; ++ox) {
            int ix = ox * d.stride + kx - d.pad;
            if (ix < 0 || ix >= d.w) continue;
            gx[(static_cast<size_t>(c) * d.h + iy) * d.w + ix] +=
                cols[static_cast<size_t>(prow) * (d.ho * d.wo) + oy * d.wo + ox];
          }
        }
      }
}

// x: {Cin,H,W}; w: {Cout,Cin,kh,kw}; b: {Cout} -> {Cout,Ho,Wo}
inline Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad) {
  if (x->value.shape.size() != 3 || w->value.shape.size() != 4)
    throw std::runtime_error("conv2d: bad ranks");
  ConvDims d;
  d.cin = x->value.shape[0];
  d.h = x->value.shape[1];
  d.w = x->value.shape[2];
  d.cout = w->value.shape[0];
  d.kh = w->value.shape[2];
  d.kw = w->value.shape[3];
  d.stride = stride;
  d.pad = pad;
  if (w->value.shape[1] != d.cin) throw std::runtime_error("conv2d: channel mismatch");
  d.ho = (d.h + 2 * pad - d.kh) / stride + 1;
  d.wo = (d.w + 2 * pad - d.kw) / stride + 1;

  const int patch = d.cin * d.kh * d.kw;
  const int area = d.ho * d.wo;
  auto cols = std::make_shared<Tensor>(std::vector<int>{patch, area});
  im2col(x->value.v.data(), d, cols->v.data());

  Tensor out({d.cout, d.ho, d.wo});
  {
    EMap outm(out.v.data(), d.cout, area);
    ECMap wm(w->value.v.data(), d.cout, patch);
    ECMap cm(cols->v.data(), patch, area);
    outm = wm * cm;
    for (int c = 0; c < d.cout; ++c) outm.row(c).array() += b->value.v[c];
  }
  auto n = std::make_shared<Node>(std::move(out));
  n->parents = {x, w, b};
  n->backward_fn = [x, w, b, d, cols, patch, area](Node& self) {
    ECMap gy(self.grad.v.data(), d.cout, area);
    ECMap wm(w->value.v.data(), d.cout, patch);
    ECMap cm(cols->v.data(), patch, area);
    EMap gw(w->grad.v.data(), d.cout, patch);
    gw += gy * cm.transpose();
    for (int c = 0; c < d.cout; ++c) b->grad.v[c] += gy.row(c).sum();
    Tensor gcols({patch, area});
    EMap gc(gcols.v.data(), patch, area);
    gc = wm.transpose() * gy;
    col2im_add(gcols.v.data(), d, x->grad.v.data());
  };
  return n;
}

// {C,H,W} -> (H*W) x C row matrix (spatial-major); pairs feature maps
// with flat anchor indexing
inline Var chw_to_rows(const Var& x) {
  if (x->value.shape.size() != 3) throw std::runtime_error("chw_to_rows: want rank 3");
  int c = x->value.shape[0], h = x->value.shape[1], w = x->value.shape[2];
  int hw = h * w;
  Tensor out({hw, c});
  for (int ch = 0; ch < c; ++ch)
    for (int p = 0; p < hw; ++p)
      out.v[static_cast<size_t>(p) * c + ch] = x->value.v[static_cast<size_t>(ch) * hw + p];
  auto n = std::make_shared<Node>(std::move(out));
  n->parents = {x};
  n->backward_fn = [x, c, hw](Node& self) {
    for (int ch = 0; ch < c; ++ch)
      for (int p = 0; p < hw; ++p)
        x->grad.v[static_cast<size_t>(ch) * hw + p] += self.grad.v[static_cast<size_t>(p) * c + ch];
  };
  return n;
}

// ---------------------------------------------------------------------------
// Backward driver
// ---------------------------------------------------------------------------

// Seeds multiple output nodes with externally computed gradients, then
// runs one reverse-topological pass over the union of their graphs.
inline void backward(const std::vector<std::pair<Var, Tensor>>& seeds) {
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, size_t>> stack;

  for (const auto& [root, seed] : seeds) {
    if (seed.shape != root->value.shape) throw std::runtime_error("backward: bad seed shape");
    if (!visited.count(root.get())) stack.push_back({root.get(), 0});
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      visited.insert(node);
      if (next < node->parents.size()) {
        Node* p = node->parents[next++].get();
        if (!visited.count(p)) stack.push_back({p, 0});
      } else {
        order.push_back(node);
        stack.pop_back();
      }
    }
  }
  for (const auto& [root, seed] : seeds)
    for (size_t i = 0; i < seed.v.size(); ++i) root->grad.v[i] += seed.v[i];

  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if ((*it)->backward_fn) (*it)->backward_fn(**it);
}

}  // namespace ovdet::nn
