// Copyright (c) 2026 the coopnet authors
// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include "coopnet/activations.hpp"
#include "coopnet/ops.hpp"
#include "support/reference_ops.hpp"

using namespace coopnet;

namespace {

template <typename T>
Tensor<T> random_tensor(Rng& rng, std::vector<size_t> shape, double lo = -1, double hi = 1) {
  Tensor<T> t(std::move(shape));
  for (size_t i = 0; i < t.numel(); ++i) t[i] = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

}  // namespace

TEST_CASE("tensor basics") {
  Tensor<float> t({2, 3});
  REQUIRE(t.numel() == 6);
  t.at({1, 2}) = 5.0f;
  REQUIRE(t.at({1, 2}) == 5.0f);
  REQUIRE_THROWS_AS(t.at({2, 0}), std::out_of_range);
  REQUIRE_THROWS_AS(t.at({0}), std::out_of_range);
  REQUIRE_THROWS_AS(Tensor<float>({2, 2}, {1.f, 2.f, 3.f}), std::invalid_argument);
  REQUIRE(Tensor<float>::scalar(3.f).is_scalar());
}

TEST_CASE("rng determinism and state round-trip") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());
  std::string st = a.save_state();
  double x1 = a.normal();
  Rng c(0);
  c.restore_state(st);
  REQUIRE(c.normal() == x1);
}

TEST_CASE("conv2d trivial cases") {
  Tape<float> tape;
  SECTION("all-ones 3x3 kernel sums the window") {
    int x = tape.leaf(Tensor<float>::ones({1, 1, 3, 3}));
    int w = tape.leaf(Tensor<float>::ones({1, 1, 3, 3}));
    int b = tape.leaf(Tensor<float>::zeros({1}));
    int y = conv2d(tape, x, w, b, 1, 0);
    REQUIRE(tape.value(y).shape() == std::vector<size_t>{1, 1, 1, 1});
    REQUIRE(tape.value(y)[0] == Catch::Approx(9.0));
  }
  SECTION("1x1 identity kernel reproduces the input") {
    Rng rng(7);
    Tensor<float> img = random_tensor<float>(rng, {1, 1, 5, 5});
    int x = tape.leaf(img);
    int w = tape.leaf(Tensor<float>::ones({1, 1, 1, 1}));
    int b = tape.leaf(Tensor<float>::zeros({1}));
    int y = conv2d(tape, x, w, b, 1, 0);
    REQUIRE(tape.value(y).vec() == img.vec());
  }
}

TEST_CASE("conv2d matches the loop oracle") {
  Rng rng(123);
  Tensor<double> x = random_tensor<double>(rng, {2, 3, 8, 8});
  Tensor<double> w = random_tensor<double>(rng, {4, 3, 5, 5});
  Tensor<double> b = random_tensor<double>(rng, {4});
  Tape<double> tape;
  int y = conv2d(tape, tape.leaf(x), tape.leaf(w), tape.leaf(b), 1, 2);
  Tensor<double> ref = oracle::conv2d_reference(x, w, b, 1, 2);
  REQUIRE(tape.value(y).shape() == ref.shape());
  REQUIRE(oracle::max_rel_err(tape.value(y), ref) <= 1e-6);

  // f32 path differs from the reference only by accumulation order
  Tensor<float> xf(x.shape()), wf(w.shape()), bf(b.shape());
  for (size_t i = 0; i < x.numel(); ++i) xf[i] = static_cast<float>(x[i]);
  for (size_t i = 0; i < w.numel(); ++i) wf[i] = static_cast<float>(w[i]);
  for (size_t i = 0; i < b.numel(); ++i) bf[i] = static_cast<float>(b[i]);
  Tape<float> ftape;
  int yf = conv2d(ftape, ftape.leaf(xf), ftape.leaf(wf), ftape.leaf(bf), 1, 2);
  Tensor<float> reff(ref.shape());
  for (size_t i = 0; i < ref.numel(); ++i) reff[i] = static_cast<float>(ref[i]);
  REQUIRE(oracle::max_rel_err(ftape.value(yf), reff, 1e-3) <= 1e-3);
}

TEST_CASE("conv2d output shape follows the floor formula") {
  for (size_t h : {5, 6, 7, 9, 12})
    for (size_t kh : {1, 2, 3, 5})
      for (size_t stride : {1, 2, 3})
        for (size_t pad : {0, 1, 2}) {
          if (h + 2 * pad < kh) continue;
          Tape<float> tape;
          int x = tape.leaf(Tensor<float>::ones({1, 1, h, h}));
          int w = tape.leaf(Tensor<float>::ones({2, 1, kh, kh}));
          int b = tape.leaf(Tensor<float>::zeros({2}));
          int y = conv2d(tape, x, w, b, stride, pad);
          const size_t expect = (h + 2 * pad - kh) / stride + 1;
          REQUIRE(tape.value(y).shape() == std::vector<size_t>{1, 2, expect, expect});
        }
}

TEST_CASE("conv2d shape errors name the offending dimensions") {
  Tape<float> tape;
  int x = tape.leaf(Tensor<float>::ones({1, 3, 8, 8}));
  int w = tape.leaf(Tensor<float>::ones({4, 2, 3, 3}));
  int b = tape.leaf(Tensor<float>::zeros({4}));
  REQUIRE_THROWS_WITH(conv2d(tape, x, w, b, 1, 0),
                      Catch::Matchers::ContainsSubstring("3") &&
                          Catch::Matchers::ContainsSubstring("2"));
  int w2 = tape.leaf(Tensor<float>::ones({4, 3, 11, 11}));
  REQUIRE_THROWS_AS(conv2d(tape, x, w2, b, 1, 0), std::invalid_argument);
}

TEST_CASE("max_pool2d values and oracle") {
  SECTION("2x2 window max") {
    Tape<float> tape;
    int x = tape.leaf(Tensor<float>({1, 1, 2, 2}, {1, 2, 3, 4}));
    int y = max_pool2d(tape, x, 2, 2);
    REQUIRE(tape.value(y).numel() == 1);
    REQUIRE(tape.value(y)[0] == 4.0f);
  }
  SECTION("constant input stays constant") {
    Tape<float> tape;
    int x = tape.leaf(Tensor<float>::full({1, 2, 4, 4}, 0.5f));
    int y = max_pool2d(tape, x, 2, 2);
    for (size_t i = 0; i < tape.value(y).numel(); ++i) REQUIRE(tape.value(y)[i] == 0.5f);
  }
  SECTION("random input matches the window-scan oracle exactly") {
    Rng rng(99);
    Tensor<float> x = random_tensor<float>(rng, {1, 2, 6, 6});
    Tape<float> tape;
    int y = max_pool2d(tape, tape.leaf(x), 2, 2);
    Tensor<float> ref = oracle::max_pool2d_reference(x, 2, 2);
    REQUIRE(tape.value(y).vec() == ref.vec());
  }
  SECTION("window larger than input") {
    Tape<float> tape;
    int x = tape.leaf(Tensor<float>::ones({1, 1, 3, 3}));
    REQUIRE_THROWS_AS(max_pool2d(tape, x, 4, 1), std::invalid_argument);
  }
}

TEST_CASE("max_pool2d backward routes to the first maximum on ties") {
  Tape<float> tape;
  // both entries of the top row tie; row-major first occurrence wins
  int x = tape.leaf(Tensor<float>({1, 1, 2, 2}, {7, 7, 1, 0}), "x");
  int y = max_pool2d(tape, x, 2, 2);
  int loss = sum(tape, y);
  auto grads = tape.backward(loss);
  REQUIRE(grads.at("x").vec() == std::vector<float>{1, 0, 0, 0});
}

TEST_CASE("dense trivial cases and oracle") {
  SECTION("identity weight, zero bias") {
    Tape<float> tape;
    int x = tape.leaf(Tensor<float>({2, 2}, {1, 2, 3, 4}));
    int w = tape.leaf(Tensor<float>({2, 2}, {1, 0, 0, 1}));
    int b = tape.leaf(Tensor<float>::zeros({2}));
    int y = dense(tape, x, w, b);
    REQUIRE(tape.value(y).vec() == std::vector<float>{1, 2, 3, 4});
  }
  SECTION("affine by hand") {
    Tape<float> tape;
    int x = tape.leaf(Tensor<float>({1, 2}, {1, 2}));
    int w = tape.leaf(Tensor<float>({2, 2}, {1, 0, 0, 1}));
    int b = tape.leaf(Tensor<float>({2}, {3, 4}));
    int y = dense(tape, x, w, b);
    REQUIRE(tape.value(y).vec() == std::vector<float>{4, 6});
  }
  SECTION("random matmul matches the triple-loop oracle") {
    Rng rng(5);
    Tensor<float> x = random_tensor<float>(rng, {4, 10});
    Tensor<float> w = random_tensor<float>(rng, {10, 7});
    Tensor<float> b = random_tensor<float>(rng, {7});
    Tape<float> tape;
    int y = dense(tape, tape.leaf(x), tape.leaf(w), tape.leaf(b));
    REQUIRE(oracle::max_rel_err(tape.value(y), oracle::dense_reference(x, w, b)) <= 1e-6);
  }
  SECTION("dimension mismatch") {
    Tape<float> tape;
    int x = tape.leaf(Tensor<float>::ones({2, 3}));
    int w = tape.leaf(Tensor<float>::ones({4, 2}));
    int b = tape.leaf(Tensor<float>::zeros({2}));
    REQUIRE_THROWS_AS(dense(tape, x, w, b), std::invalid_argument);
  }
}

TEST_CASE("softmax cross-entropy values") {
  SECTION("uniform logits give ln K") {
    Tape<double> tape;
    int l = tape.leaf(Tensor<double>::full({2, 10}, 0.7));
    int loss = softmax_cross_entropy(tape, l, {3, 9});
    REQUIRE(tape.value(loss)[0] == Catch::Approx(std::log(10.0)).epsilon(1e-12));
  }
  SECTION("huge correct logit gives ~0 loss without overflow") {
    Tape<double> tape;
    Tensor<double> l({1, 4});
    l[2] = 1000.0;
    int loss = softmax_cross_entropy(tape, tape.leaf(l), {2});
    REQUIRE(std::isfinite(tape.value(loss)[0]));
    REQUIRE(tape.value(loss)[0] == Catch::Approx(0.0).margin(1e-12));
  }
  SECTION("random logits match the extended-precision oracle") {
    Rng rng(11);
    Tensor<double> l = random_tensor<double>(rng, {3, 5}, -3, 3);
    std::vector<int> labels{4, 0, 2};
    Tape<double> tape;
    int loss = softmax_cross_entropy(tape, tape.leaf(l), labels);
    const double ref = static_cast<double>(oracle::softmax_xent_reference(l, labels));
    REQUIRE(std::abs(tape.value(loss)[0] - ref) <= 1e-10);
  }
  SECTION("out-of-range label") {
    Tape<double> tape;
    int l = tape.leaf(Tensor<double>::zeros({1, 3}));
    REQUIRE_THROWS_WITH(softmax_cross_entropy(tape, l, {3}),
                        Catch::Matchers::ContainsSubstring("label 3"));
  }
}

TEST_CASE("backward basics") {
  SECTION("sum gives all-ones gradient") {
    Tape<float> tape;
    int x = tape.leaf(Tensor<float>({2, 3}, {1, -2, 3, -4, 5, -6}), "x");
    auto grads = tape.backward(sum(tape, x));
    REQUIRE(grads.at("x").vec() == std::vector<float>(6, 1.0f));
  }
  SECTION("fan-out sums consumer contributions") {
    Tape<float> tape;
    int x = tape.leaf(Tensor<float>({1, 4}, {1, -1, 2, -2}), "x");
    int r1 = tape_activation(tape, x, ActivationSpec::relu());
    int r2 = tape_activation(tape, x, ActivationSpec::relu());
    auto grads = tape.backward(sum(tape, add(tape, r1, r2)));
    REQUIRE(grads.at("x").vec() == std::vector<float>{2, 0, 2, 0});
  }
  SECTION("non-scalar root is rejected") {
    Tape<float> tape;
    int x = tape.leaf(Tensor<float>::ones({2, 2}), "x");
    REQUIRE_THROWS_AS(tape.backward(x), std::invalid_argument);
  }
}

TEST_CASE("tape linearity of gradients") {
  // grad(a*f + b*g) == a*grad(f) + b*grad(g)
  Rng rng(17);
  Tensor<double> xv = random_tensor<double>(rng, {3, 4});
  const double a = 2.5, b = -1.25;

  auto grad_of = [&](bool use_f, bool use_g, double ca, double cb) {
    Tape<double> tape;
    int x = tape.leaf(xv, "x");
    std::vector<int> terms;
    if (use_f) terms.push_back(scale(tape, sum(tape, tape_activation(tape, x, ActivationSpec::softplus())), ca));
    if (use_g) {
      int sq = tape_activation(tape, x, ActivationSpec::elu(1.0));
      terms.push_back(scale(tape, sum(tape, sq), cb));
    }
    int root = terms[0];
    for (size_t i = 1; i < terms.size(); ++i) root = add(tape, root, terms[i]);
    return tape.backward(root).at("x");
  };

  Tensor<double> combined = grad_of(true, true, a, b);
  Tensor<double> gf = grad_of(true, false, 1.0, 0.0);
  Tensor<double> gg = grad_of(false, true, 0.0, 1.0);
  for (size_t i = 0; i < combined.numel(); ++i) {
    const double expect = a * gf[i] + b * gg[i];
    REQUIRE(combined[i] == Catch::Approx(expect).epsilon(1e-6));
  }
}

TEST_CASE("forward and backward are bit-deterministic") {
  auto run = [] {
    Rng rng(31);
    Tensor<float> x = random_tensor<float>(rng, {2, 3, 8, 8});
    Tensor<float> w = random_tensor<float>(rng, {4, 3, 3, 3});
    Tensor<float> b = random_tensor<float>(rng, {4});
    Tape<float> tape;
    int xi = tape.leaf(x, "x");
    int y = conv2d(tape, xi, tape.leaf(w, "w"), tape.leaf(b, "b"), 1, 1);
    int p = max_pool2d(tape, y, 2, 2);
    int loss = sum(tape, p);
    auto grads = tape.backward(loss);
    return std::make_pair(tape.value(loss)[0], grads.at("w").vec());
  };
  auto [l1, g1] = run();
  auto [l2, g2] = run();
  REQUIRE(l1 == l2);
  REQUIRE(g1 == g2);
}
