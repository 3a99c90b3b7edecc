#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>

#include "ovdet/core/rng.hpp"
#include "ovdet/nn/autodiff.hpp"
#include "ovdet/nn/modules.hpp"

using namespace ovdet;
using nn::Tensor;
using nn::Var;

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (double& x : t.v) x = uniform_real(rng, -scale, scale);
  return t;
}

// weighted-sum scalarization: L = sum_i w_i * out_i
double scalarize(const Tensor& out, const Tensor& w) {
  double s = 0;
  for (size_t i = 0; i < out.v.size(); ++i) s += out.v[i] * w.v[i];
  return s;
}

// checks d scalarize(f(inputs)) / d inputs against central differences
void check_gradients(const std::vector<Var>& inputs,
                     const std::function<Var(const std::vector<Var>&)>& f, Rng& rng,
                     double tol = 1e-6, double h = 1e-5) {
  auto out = f(inputs);
  Tensor w = random_tensor(out->value.shape, rng);
  nn::backward({{out, w}});

  for (const auto& input : inputs) {
    for (size_t i = 0; i < input->value.v.size(); ++i) {
      double saved = input->value.v[i];
      input->value.v[i] = saved + h;
      double up = scalarize(f(inputs)->value, w);
      input->value.v[i] = saved - h;
      double dn = scalarize(f(inputs)->value, w);
      input->value.v[i] = saved;
      double fd = (up - dn) / (2 * h);
      double got = input->grad.v[i];
      double denom = std::max({std::abs(fd), std::abs(got), 1e-4});
      INFO("input element " << i << ": fd=" << fd << " analytic=" << got);
      REQUIRE(std::abs(fd - got) / denom < tol);
    }
  }
}

}  // namespace

TEST_CASE("matmul gradients") {
  Rng rng(40);
  auto a = nn::make_input(random_tensor({3, 4}, rng));
  auto b = nn::make_input(random_tensor({4, 5}, rng));
  check_gradients({a, b}, [](const std::vector<Var>& in) { return nn::matmul(in[0], in[1]); },
                  rng);
}

TEST_CASE("matmul_nt gradients") {
  Rng rng(41);
  auto a = nn::make_input(random_tensor({3, 4}, rng));
  auto b = nn::make_input(random_tensor({6, 4}, rng));
  check_gradients({a, b}, [](const std::vector<Var>& in) { return nn::matmul_nt(in[0], in[1]); },
                  rng);
}

TEST_CASE("add, add_rowvec, relu, scale gradients") {
  Rng rng(42);
  auto a = nn::make_input(random_tensor({4, 3}, rng));
  auto b = nn::make_input(random_tensor({4, 3}, rng));
  auto bias = nn::make_input(random_tensor({3}, rng));
  check_gradients({a, b, bias}, [](const std::vector<Var>& in) {
    return nn::scale(nn::relu(nn::add_rowvec(nn::add(in[0], in[1]), in[2])), 1.7);
  }, rng);
}

TEST_CASE("slice and concat gradients") {
  Rng rng(43);
  auto a = nn::make_input(random_tensor({4, 6}, rng));
  auto b = nn::make_input(random_tensor({2, 6}, rng));
  check_gradients({a, b}, [](const std::vector<Var>& in) {
    auto left = nn::slice_cols(in[0], 0, 3);
    auto right = nn::slice_cols(in[0], 3, 6);
    auto stacked = nn::concat_rows({nn::slice_rows(in[0], 1, 3), in[1]});
    return nn::matmul_nt(nn::concat_cols({left, right}), stacked);
  }, rng);
}

TEST_CASE("softmax_rows gradients") {
  Rng rng(44);
  auto a = nn::make_input(random_tensor({3, 5}, rng, 2.0));
  check_gradients({a}, [](const std::vector<Var>& in) { return nn::softmax_rows(in[0]); }, rng,
                  1e-5);
}

TEST_CASE("layernorm_rows gradients") {
  Rng rng(45);
  auto a = nn::make_input(random_tensor({4, 6}, rng, 2.0));
  auto gain = nn::make_input(random_tensor({6}, rng));
  auto bias = nn::make_input(random_tensor({6}, rng));
  check_gradients({a, gain, bias}, [](const std::vector<Var>& in) {
    return nn::layernorm_rows(in[0], in[1], in[2]);
  }, rng, 1e-5);
}

TEST_CASE("l2_normalize_rows gradients") {
  Rng rng(46);
  auto a = nn::make_input(random_tensor({3, 5}, rng, 2.0));
  check_gradients({a}, [](const std::vector<Var>& in) { return nn::l2_normalize_rows(in[0]); },
                  rng, 1e-5);
}

TEST_CASE("embedding_lookup gradients accumulate per id") {
  Rng rng(47);
  auto table = nn::make_input(random_tensor({7, 4}, rng));
  std::vector<int> ids = {2, 5, 2, 0};
  check_gradients({table}, [&ids](const std::vector<Var>& in) {
    return nn::embedding_lookup(in[0], ids);
  }, rng);
}

TEST_CASE("conv2d gradients") {
  Rng rng(48);
  auto x = nn::make_input(random_tensor({2, 6, 8}, rng));
  auto w = nn::make_input(random_tensor({3, 2, 3, 3}, rng));
  auto b = nn::make_input(random_tensor({3}, rng));

  SECTION("stride 1, pad 1") {
    check_gradients({x, w, b}, [](const std::vector<Var>& in) {
      return nn::conv2d(in[0], in[1], in[2], 1, 1);
    }, rng);
  }
  SECTION("stride 2, pad 1") {
    check_gradients({x, w, b}, [](const std::vector<Var>& in) {
      return nn::conv2d(in[0], in[1], in[2], 2, 1);
    }, rng);
  }
}

TEST_CASE("chw_to_rows gradients") {
  Rng rng(49);
  auto x = nn::make_input(random_tensor({3, 4, 5}, rng));
  check_gradients({x}, [](const std::vector<Var>& in) { return nn::chw_to_rows(in[0]); }, rng);
}

TEST_CASE("a transformer block end to end") {
  Rng rng(50);
  nn::ParamRegistry reg;
  nn::Linear q(reg, "q", 6, 6, rng), k(reg, "k", 6, 6, rng), v(reg, "v", 6, 6, rng);
  auto x = nn::make_input(random_tensor({5, 6}, rng));

  auto forward = [&](const std::vector<Var>& in) {
    auto qq = q(in[0]), kk = k(in[0]), vv = v(in[0]);
    auto att = nn::softmax_rows(nn::scale(nn::matmul_nt(qq, kk), 1.0 / std::sqrt(6.0)));
    return nn::add(in[0], nn::matmul(att, vv));
  };
  check_gradients({x}, forward, rng, 1e-5);
}

TEST_CASE("gradients accumulate across repeated backward calls") {
  Rng rng(51);
  auto p = nn::make_param(random_tensor({2, 2}, rng));
  Tensor seed({2, 2}, 1.0);
  auto run = [&] {
    auto out = nn::scale(p, 3.0);
    nn::backward({{out, seed}});
  };
  run();
  run();
  for (double g : p->grad.v) CHECK(g == Catch::Approx(6.0));
}

TEST_CASE("adam with zero lr leaves parameters bit-identical") {
  Rng rng(52);
  auto p = nn::make_param(random_tensor({3}, rng));
  auto q = nn::make_param(random_tensor({3}, rng));
  auto p_before = p->value.v;
  auto q_before = q->value.v;
  nn::Adam opt({{{p}, 0.0}, {{q}, 1e-2}});
  for (int i = 0; i < 3; ++i) {
    for (auto& v : {p, q})
      for (double& g : v->grad.v) g = uniform_real(rng, -1, 1);
    opt.step();
    opt.zero_grad();
  }
  CHECK(p->value.v == p_before);  // frozen group
  CHECK(q->value.v != q_before);
}
