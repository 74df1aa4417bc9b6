// Copyright (c) 2026 the coopnet authors
// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include "coopnet/activations.hpp"

using namespace coopnet;
using Catch::Approx;

namespace {

Tensor<double> row(std::initializer_list<double> vals) {
  std::vector<double> v(vals);
  return Tensor<double>({1, v.size()}, std::move(v));
}

double single(const ActivationSpec& spec, double x, const Tensor<double>* slopes = nullptr) {
  return act_forward(spec, row({x}), slopes)[0];
}

}  // namespace

TEST_CASE("activation forward values") {
  REQUIRE(single(ActivationSpec::relu(), -2.0) == 0.0);
  REQUIRE(single(ActivationSpec::relu(), 3.0) == 3.0);
  REQUIRE(single(ActivationSpec::softplus(), 0.0) == Approx(0.6931471805599453).epsilon(1e-14));
  REQUIRE(single(ActivationSpec::elu(1.0), -1.0) == Approx(-0.6321205588285577).epsilon(1e-14));
  Tensor<double> slopes({1}, {0.25});
  REQUIRE(single(ActivationSpec::prelu(), -1.0, &slopes) == -0.25);
  REQUIRE(single(ActivationSpec::leaky_relu(0.01), -3.0) == Approx(-0.03));
  REQUIRE(single(ActivationSpec::identity(), -7.5) == -7.5);
}

TEST_CASE("softplus is stable at extreme inputs") {
  const double hi = single(ActivationSpec::softplus(), 500.0);
  REQUIRE(std::isfinite(hi));
  REQUIRE(hi == Approx(500.0));
  const double lo = single(ActivationSpec::softplus(), -500.0);
  REQUIRE(std::isfinite(lo));
  REQUIRE(lo == Approx(0.0).margin(1e-200));
  REQUIRE(lo >= 0.0);
}

TEST_CASE("activation derivative values") {
  auto deriv = [](const ActivationSpec& spec, double x) {
    Tensor<double> in = row({x}), up = row({1.0}), dx;
    act_backward(spec, in, up, nullptr, &dx, nullptr);
    return dx[0];
  };
  REQUIRE(deriv(ActivationSpec::relu(), 5.0) == 1.0);
  REQUIRE(deriv(ActivationSpec::relu(), -5.0) == 0.0);
  REQUIRE(deriv(ActivationSpec::relu(), 0.0) == 0.0);  // subgradient: negative side
  REQUIRE(deriv(ActivationSpec::softplus(), 0.0) == Approx(0.5).epsilon(1e-14));
  REQUIRE(deriv(ActivationSpec::leaky_relu(0.01), -1.0) == Approx(0.01));
  REQUIRE(deriv(ActivationSpec::elu(1.0), -1.0) == Approx(std::exp(-1.0)).epsilon(1e-14));
}

TEST_CASE("prelu slope gradient") {
  // x = [-1, 2], upstream ones, one channel: only x = -1 contributes.
  Tensor<double> x({1, 1, 2}, {-1.0, 2.0});
  Tensor<double> up({1, 1, 2}, {1.0, 1.0});
  Tensor<double> slopes({1}, {0.25});
  Tensor<double> dx, ds;
  act_backward(ActivationSpec::prelu(), x, up, &slopes, &dx, &ds);
  REQUIRE(ds[0] == -1.0);
  REQUIRE(dx.vec() == std::vector<double>{0.25, 1.0});
}

TEST_CASE("prelu slope plumbing errors") {
  Tensor<double> x({1, 2}, {1.0, -1.0});
  REQUIRE_THROWS_AS(act_forward(ActivationSpec::prelu(), x, nullptr), std::invalid_argument);
  Tensor<double> wrong({3}, {0.25, 0.25, 0.25});
  REQUIRE_THROWS_AS(act_forward(ActivationSpec::prelu(), x, &wrong), std::invalid_argument);
  Tensor<double> slopes({2}, {0.25, 0.25});
  REQUIRE_THROWS_AS(act_forward(ActivationSpec::relu(), x, &slopes), std::invalid_argument);
}

TEST_CASE("mixture forward values") {
  const MixedActivation mix = MixedActivation::default4();
  Tensor<double> slopes({1}, {0.25});
  std::vector<const Tensor<double>*> sl{&slopes};

  SECTION("x = 0 gives ln(2)/4") {
    Tensor<double> y = mixture_forward(mix, row({0.0}), sl);
    REQUIRE(y[0] == Approx(0.17328679513998632).epsilon(1e-12));
  }
  SECTION("x = -1 matches the per-branch analytic sum") {
    Tensor<double> y = mixture_forward(mix, row({-1.0}), sl);
    REQUIRE(y[0] == Approx(-0.14221471782758372).epsilon(1e-12));
  }
}

TEST_CASE("one-branch mixture is bit-identical to the bare activation") {
  MixedActivation one({ActivationSpec::softplus()}, {1.0});
  Rng rng(3);
  Tensor<double> x({2, 5});
  for (size_t i = 0; i < x.numel(); ++i) x[i] = rng.uniform(-4, 4);
  Tensor<double> via_mix = mixture_forward(one, x);
  Tensor<double> direct = act_forward(ActivationSpec::softplus(), x);
  REQUIRE(via_mix.vec() == direct.vec());
}

TEST_CASE("equal-weight relu-only mixture averages to relu") {
  MixedActivation four = MixedActivation::equal(
      {ActivationSpec::relu(), ActivationSpec::relu(), ActivationSpec::relu(),
       ActivationSpec::relu()});
  Rng rng(4);
  Tensor<double> x({3, 7});
  for (size_t i = 0; i < x.numel(); ++i) x[i] = rng.uniform(-2, 2);
  Tensor<double> mixed = mixture_forward(four, x);
  Tensor<double> direct = act_forward(ActivationSpec::relu(), x);
  for (size_t i = 0; i < x.numel(); ++i)
    REQUIRE(mixed[i] == Approx(direct[i]).epsilon(1e-6).margin(1e-12));
}

TEST_CASE("mixture derivative values") {
  const MixedActivation mix = MixedActivation::default4();
  Tensor<double> slopes({1}, {0.25});
  std::vector<const Tensor<double>*> sl{&slopes};
  auto deriv_at = [&](double x) {
    Tensor<double> dx;
    std::vector<Tensor<double>> ds;
    mixture_backward(mix, row({x}), row({1.0}), sl, &dx, &ds);
    return dx[0];
  };
  REQUIRE(deriv_at(1.0) == Approx(0.9327646446575012).epsilon(1e-12));
  REQUIRE(deriv_at(-50.0) == Approx(0.0625).epsilon(1e-12));
}

TEST_CASE("mixture branch slope gradients are weight-scaled") {
  const MixedActivation mix = MixedActivation::default4();
  Tensor<double> slopes({1}, {0.25});
  std::vector<const Tensor<double>*> sl{&slopes};
  Tensor<double> dx;
  std::vector<Tensor<double>> ds;
  mixture_backward(mix, row({-2.0}), row({1.0}), sl, &dx, &ds);
  REQUIRE(ds.size() == 1);
  // bare prelu slope gradient would be x = -2; scaled by beta = 1/4
  REQUIRE(ds[0][0] == Approx(-0.5).epsilon(1e-14));
}

TEST_CASE("mixture is monotone for nonnegative slopes") {
  const MixedActivation mix = MixedActivation::default4();
  Tensor<double> slopes({1}, {0.25});
  std::vector<const Tensor<double>*> sl{&slopes};
  Rng rng(8);
  std::vector<double> xs(200);
  for (auto& v : xs) v = rng.uniform(-6, 6);
  std::sort(xs.begin(), xs.end());
  double prev = -1e300;
  for (double v : xs) {
    const double y = mixture_forward(mix, row({v}), sl)[0];
    REQUIRE(y >= prev);
    prev = y;
  }
}

TEST_CASE("mixture is continuous at zero") {
  const MixedActivation mix = MixedActivation::default4();
  Tensor<double> slopes({1}, {0.25});
  std::vector<const Tensor<double>*> sl{&slopes};
  const double eps = 1e-6;
  const double gap = std::abs(mixture_forward(mix, row({eps}), sl)[0] -
                              mixture_forward(mix, row({-eps}), sl)[0]);
  REQUIRE(gap <= 1e-5);
}

TEST_CASE("mixture construction validates its invariants") {
  REQUIRE_THROWS_WITH(MixedActivation({ActivationSpec::relu(), ActivationSpec::elu(1.0)},
                                      {0.5, 0.6}),
                      Catch::Matchers::ContainsSubstring("sum"));
  REQUIRE_THROWS_AS(MixedActivation({ActivationSpec::relu()}, {0.5, 0.5}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(MixedActivation({}, {}), std::invalid_argument);
  REQUIRE_THROWS_AS(MixedActivation({ActivationSpec::identity()}, {1.0}),
                    std::invalid_argument);
}

TEST_CASE("activation encoding round-trips") {
  for (const auto& text : {"relu", "softplus", "identity", "prelu:0.25", "elu:1",
                           "leakyrelu:0.01", "prelu:0.1"}) {
    ActivationSpec spec = parse_activation(text);
    REQUIRE(parse_activation(encode_activation(spec)) == spec);
  }
  REQUIRE(encode_activation(ActivationSpec::relu()) == "relu");
  REQUIRE(encode_activation(ActivationSpec::prelu(0.25)) == "prelu:0.25");
  REQUIRE_THROWS_AS(parse_activation("swish"), std::invalid_argument);

  const MixedActivation mix = MixedActivation::default4();
  REQUIRE(encode_mixture(mix) == "mix(relu,prelu:0.25,elu:1,softplus;equal)");
  REQUIRE(parse_mixture(encode_mixture(mix)) == mix);

  MixedActivation uneven({ActivationSpec::relu(), ActivationSpec::softplus()}, {0.75, 0.25});
  REQUIRE(parse_mixture(encode_mixture(uneven)) == uneven);
  REQUIRE_THROWS_AS(parse_mixture("mix(relu,softplus)"), std::invalid_argument);

  SlotActivation slot = SlotActivation::parse("mix(relu,prelu:0.25,elu:1,softplus;equal)");
  REQUIRE(slot.is_mixture());
  REQUIRE(SlotActivation::parse(slot.encode()) == slot);
}
