// Copyright (c) 2026 the coopnet authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "coopnet/network.hpp"
#include "coopnet/trainer.hpp"

namespace coopnet {

/// Result of comparing analytic gradients against central finite
/// differences for one op. Elements where the true gradient is large are
/// held to a relative tolerance; near-zero gradients to an absolute one.
struct GradCheckReport {
  std::string op;
  double max_rel = 0;        // over elements with max(|a|,|n|) >= small_cut
  double max_abs_small = 0;  // over elements with max(|a|,|n|) < small_cut
  size_t elements = 0;

  static constexpr double kRelTol = 1e-4;
  static constexpr double kAbsTol = 1e-6;
  static constexpr double kSmallCut = 1e-3;

  bool pass() const { return max_rel <= kRelTol && max_abs_small <= kAbsTol; }

  void merge(const GradCheckReport& o) {
    max_rel = std::max(max_rel, o.max_rel);
    max_abs_small = std::max(max_abs_small, o.max_abs_small);
    elements += o.elements;
  }
};

namespace gradcheck {

/// Builds a scalar-rooted tape from named input tensors and returns the
/// root id. Inputs must be recorded as named leaves so backward() reports
/// their gradients.
using BuildFn =
    std::function<int(Tape<double>&, const std::map<std::string, Tensor<double>>&)>;

/// Records loss = sum_i r[i]*y[i]. A fixed random projection makes every
/// element of the upstream gradient distinct, which a plain sum would not.
inline int weighted_sum(Tape<double>& tape, int y_id, const Tensor<double>& r) {
  const Tensor<double>& y = tape.value(y_id);
  if (!y.same_shape(r)) throw std::invalid_argument("weighted_sum projection shape mismatch");
  double s = 0;
  for (size_t i = 0; i < y.numel(); ++i) s += r[i] * y[i];
  auto grad = [r](const Tensor<double>& up, std::vector<Tensor<double>>& gs) {
    gs[0] = r;
    gs[0].scale_(up[0]);
  };
  return tape.record("weighted_sum", Tensor<double>::scalar(s), {y_id}, std::move(grad));
}

/// Central-difference check of every (or a sampled subset of) coordinate of
/// every named input. `coords_per_tensor` 0 means all coordinates.
inline GradCheckReport check_fn(const std::string& name, const BuildFn& build,
                                std::map<std::string, Tensor<double>> inputs, double h = 1e-3,
                                size_t coords_per_tensor = 0, uint64_t coord_seed = 0) {
  GradCheckReport rep;
  rep.op = name;

  std::map<std::string, Tensor<double>> analytic;
  {
    Tape<double> tape;
    int root = build(tape, inputs);
    analytic = tape.backward(root);
  }
  auto eval = [&](const std::map<std::string, Tensor<double>>& in) {
    Tape<double> tape;
    int root = build(tape, in);
    return static_cast<double>(tape.value(root)[0]);
  };

  Rng pick_rng(detail::mix_seed(coord_seed, 0xC0));
  for (auto& [pname, tensor] : inputs) {
    auto ait = analytic.find(pname);
    if (ait == analytic.end())
      throw std::logic_error("no analytic gradient for input '" + pname + "'");
    const Tensor<double>& a = ait->second;

    std::vector<size_t> coords;
    if (coords_per_tensor == 0 || coords_per_tensor >= tensor.numel()) {
      coords.resize(tensor.numel());
      for (size_t i = 0; i < coords.size(); ++i) coords[i] = i;
    } else {
      for (size_t i = 0; i < coords_per_tensor; ++i) coords.push_back(pick_rng.below(tensor.numel()));
    }

    for (size_t i : coords) {
      const double orig = tensor[i];
      tensor[i] = orig + h;
      const double fp = eval(inputs);
      tensor[i] = orig - h;
      const double fm = eval(inputs);
      tensor[i] = orig;
      const double numeric = (fp - fm) / (2 * h);
      const double av = a[i];
      const double mag = std::max(std::abs(av), std::abs(numeric));
      const double diff = std::abs(av - numeric);
      if (mag >= GradCheckReport::kSmallCut)
        rep.max_rel = std::max(rep.max_rel, diff / mag);
      else
        rep.max_abs_small = std::max(rep.max_abs_small, diff);
      ++rep.elements;
    }
  }
  return rep;
}

inline Tensor<double> random_uniform(Rng& rng, std::vector<size_t> shape, double lo, double hi) {
  Tensor<double> t(std::move(shape));
  for (size_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

/// Values bounded away from zero, so finite differences never straddle the
/// kink of the relu-family activations.
inline Tensor<double> random_kink_safe(Rng& rng, std::vector<size_t> shape, double margin = 0.05) {
  Tensor<double> t(std::move(shape));
  for (size_t i = 0; i < t.numel(); ++i) {
    const double mag = rng.uniform(margin, 1.5);
    t[i] = rng.coin() ? mag : -mag;
  }
  return t;
}

// For max pooling the forward is piecewise; keep window entries separated
// so the argmax cannot change inside the h-neighborhood.
inline Tensor<double> random_pool_safe(Rng& rng, std::vector<size_t> shape, size_t k,
                                       double min_gap = 1e-2) {
  const size_t n = shape[0], c = shape[1], hh = shape[2], ww = shape[3];
  Tensor<double> t(shape);
  for (size_t img = 0; img < n * c; ++img)
    for (size_t oy = 0; oy + k <= hh; oy += k)
      for (size_t ox = 0; ox + k <= ww; ox += k) {
        while (true) {
          std::vector<double> vals(k * k);
          for (auto& v : vals) v = rng.uniform(-1.0, 1.0);
          bool ok = true;
          for (size_t i = 0; i < vals.size() && ok; ++i)
            for (size_t j = i + 1; j < vals.size() && ok; ++j)
              if (std::abs(vals[i] - vals[j]) < min_gap) ok = false;
          if (!ok) continue;
          size_t vi = 0;
          for (size_t ky = 0; ky < k; ++ky)
            for (size_t kx = 0; kx < k; ++kx)
              t[img * hh * ww + (oy + ky) * ww + (ox + kx)] = vals[vi++];
          break;
        }
      }
  return t;
}

}  // namespace gradcheck

/// Runs the finite-difference suite. Each op is checked on `seeds` random
/// draws; architecture end-to-end checks sample a few coordinates per
/// parameter tensor. `filter` empty means every op.
inline std::vector<GradCheckReport> run_gradcheck(const std::vector<std::string>& filter = {},
                                                  int seeds = 20) {
  using gradcheck::check_fn;
  using gradcheck::random_kink_safe;
  using gradcheck::random_pool_safe;
  using gradcheck::random_uniform;
  using gradcheck::weighted_sum;

  auto wanted = [&](const std::string& op) {
    if (filter.empty()) return true;
    for (const auto& f : filter)
      if (op == f) return true;
    return false;
  };

  std::vector<GradCheckReport> reports;
  auto run_op = [&](const std::string& op, auto make_case) {
    if (!wanted(op)) return;
    GradCheckReport total;
    total.op = op;
    for (int s = 1; s <= seeds; ++s) total.merge(make_case(static_cast<uint64_t>(s)));
    reports.push_back(total);
  };

  run_op("conv2d", [&](uint64_t seed) {
    Rng rng(detail::mix_seed(seed, 1));
    std::map<std::string, Tensor<double>> in;
    in["x"] = random_uniform(rng, {2, 3, 8, 8}, -1, 1);
    in["w"] = random_uniform(rng, {4, 3, 5, 5}, -0.5, 0.5);
    in["b"] = random_uniform(rng, {4}, -0.5, 0.5);
    Tensor<double> r = random_uniform(rng, {2, 4, 8, 8}, -1, 1);
    return check_fn("conv2d", [r](Tape<double>& t, const auto& v) {
      int x = t.leaf(v.at("x"), "x"), w = t.leaf(v.at("w"), "w"), b = t.leaf(v.at("b"), "b");
      return weighted_sum(t, conv2d(t, x, w, b, 1, 2), r);
    }, std::move(in));
  });

  run_op("dense", [&](uint64_t seed) {
    Rng rng(detail::mix_seed(seed, 2));
    std::map<std::string, Tensor<double>> in;
    in["x"] = random_uniform(rng, {4, 10}, -1, 1);
    in["w"] = random_uniform(rng, {10, 7}, -1, 1);
    in["b"] = random_uniform(rng, {7}, -1, 1);
    Tensor<double> r = random_uniform(rng, {4, 7}, -1, 1);
    return check_fn("dense", [r](Tape<double>& t, const auto& v) {
      int x = t.leaf(v.at("x"), "x"), w = t.leaf(v.at("w"), "w"), b = t.leaf(v.at("b"), "b");
      return weighted_sum(t, dense(t, x, w, b), r);
    }, std::move(in));
  });

  run_op("max_pool2d", [&](uint64_t seed) {
    Rng rng(detail::mix_seed(seed, 3));
    std::map<std::string, Tensor<double>> in;
    in["x"] = random_pool_safe(rng, {1, 2, 6, 6}, 2);
    Tensor<double> r = random_uniform(rng, {1, 2, 3, 3}, -1, 1);
    return check_fn("max_pool2d", [r](Tape<double>& t, const auto& v) {
      return weighted_sum(t, max_pool2d(t, t.leaf(v.at("x"), "x"), 2, 2), r);
    }, std::move(in));
  });

  run_op("softmax_cross_entropy", [&](uint64_t seed) {
    Rng rng(detail::mix_seed(seed, 4));
    std::map<std::string, Tensor<double>> in;
    in["logits"] = random_uniform(rng, {3, 5}, -2, 2);
    std::vector<int> labels;
    for (int i = 0; i < 3; ++i) labels.push_back(static_cast<int>(rng.below(5)));
    return check_fn("softmax_cross_entropy", [labels](Tape<double>& t, const auto& v) {
      return softmax_cross_entropy(t, t.leaf(v.at("logits"), "logits"), labels);
    }, std::move(in));
  });

  auto act_case = [&](const std::string& op, ActivationSpec spec) {
    run_op(op, [&, spec, op](uint64_t seed) {
      Rng rng(detail::mix_seed(seed, 5));
      std::map<std::string, Tensor<double>> in;
      in["x"] = random_kink_safe(rng, {2, 3, 4, 4});
      const bool prelu = spec.kind == ActKind::PReLU;
      if (prelu) in["slopes"] = random_uniform(rng, {3}, 0.1, 0.5);
      Tensor<double> r = random_uniform(rng, {2, 3, 4, 4}, -1, 1);
      return check_fn(op, [r, spec, prelu](Tape<double>& t, const auto& v) {
        int x = t.leaf(v.at("x"), "x");
        int s = prelu ? t.leaf(v.at("slopes"), "slopes") : -1;
        return weighted_sum(t, tape_activation(t, x, spec, s), r);
      }, std::move(in));
    });
  };
  act_case("relu", ActivationSpec::relu());
  act_case("leakyrelu", ActivationSpec::leaky_relu(0.01));
  act_case("prelu", ActivationSpec::prelu(0.25));
  act_case("elu", ActivationSpec::elu(1.0));
  act_case("softplus", ActivationSpec::softplus());

  run_op("mixture", [&](uint64_t seed) {
    Rng rng(detail::mix_seed(seed, 6));
    const MixedActivation mix = MixedActivation::default4();
    std::map<std::string, Tensor<double>> in;
    in["x"] = random_kink_safe(rng, {2, 3, 4, 4});
    in["slopes"] = random_uniform(rng, {3}, 0.1, 0.5);
    Tensor<double> r = random_uniform(rng, {2, 3, 4, 4}, -1, 1);
    return check_fn("mixture", [r, mix](Tape<double>& t, const auto& v) {
      int x = t.leaf(v.at("x"), "x");
      int s = t.leaf(v.at("slopes"), "slopes");
      return weighted_sum(t, tape_mixture(t, x, mix, {s}), r);
    }, std::move(in));
  });

  auto e2e_case = [&](const std::string& op, const std::string& arch, int net_seeds,
                      size_t coords) {
    run_op(op, [&, arch, net_seeds, coords, op](uint64_t seed) {
      if (static_cast<int>(seed) > net_seeds) return GradCheckReport{op, 0, 0, 0};
      Network<double> net = build_network<double>(arch);
      set_all_slots(net, MixedActivation::default4());
      init_weights(net, seed, InitScheme::KaimingNormal);
      Rng rng(detail::mix_seed(seed, 7));
      std::map<std::string, Tensor<double>> in = net.params;
      std::vector<size_t> xshape = net.input_shape;
      xshape.insert(xshape.begin(), 2);
      in["input"] = random_uniform(rng, xshape, -1, 1);
      std::vector<int> labels = {static_cast<int>(rng.below(net.num_classes)),
                                 static_cast<int>(rng.below(net.num_classes))};
      auto build = [&net, labels](Tape<double>& t, const auto& v) {
        Network<double> n2 = net;
        for (auto& [name, p] : n2.params) p = v.at(name);
        int x = t.leaf(v.at("input"), "input");
        int logits = n2.forward(t, x);
        return softmax_cross_entropy(t, logits, labels);
      };
      return check_fn(op, build, std::move(in), 1e-3, coords, seed);
    });
  };
  e2e_case("lenet-mnist-e2e", "lenet-mnist", std::min(seeds, 20), 20);
  e2e_case("small-cifar-e2e", "small-cifar-10", std::min(seeds, 2), 8);

  return reports;
}

}  // namespace coopnet
