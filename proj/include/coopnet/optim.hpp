// Copyright (c) 2026 the coopnet authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <map>
#include <string>

#include "coopnet/tensor.hpp"

namespace coopnet {

struct SgdConfig {
  double momentum = 0.9;       // in [0,1)
  double weight_decay = 1e-4;  // L2, folded into the gradient
};

/// Piecewise-constant step decay: lr(epoch) = base / factor^floor(epoch/every).
struct StepSchedule {
  double base_lr = 0.1;
  double decay_factor = 5.0;  // > 1
  int step_every = 50;        // epochs
};

inline double lr_at(const StepSchedule& s, int epoch) {
  if (epoch < 0) throw std::invalid_argument("epoch must be >= 0");
  if (s.base_lr <= 0 || s.decay_factor <= 1 || s.step_every <= 0)
    throw std::invalid_argument(detail::str("bad schedule: base ", s.base_lr, ", factor ",
                                            s.decay_factor, ", step_every ", s.step_every));
  return s.base_lr / std::pow(s.decay_factor, static_cast<double>(epoch / s.step_every));
}

/// SGD with momentum and L2 weight decay:
///   v <- momentum*v + (grad + weight_decay*param);  param <- param - lr*v.
/// Velocity buffers are created lazily as zeros and mirror parameter shapes.
template <typename T>
class SgdState {
 public:
  void step(std::map<std::string, Tensor<T>>& params,
            const std::map<std::string, Tensor<T>>& grads, const SgdConfig& cfg, double lr) {
    for (const auto& [name, g] : grads)
      if (!params.count(name))
        throw std::invalid_argument("gradient for unknown parameter '" + name + "'");
    const T m = static_cast<T>(cfg.momentum);
    const T wd = static_cast<T>(cfg.weight_decay);
    const T tlr = static_cast<T>(lr);
    for (auto& [name, p] : params) {
      auto git = grads.find(name);
      if (git == grads.end())
        throw std::invalid_argument("missing gradient for parameter '" + name + "'");
      const Tensor<T>& g = git->second;
      if (!g.same_shape(p))
        throw std::invalid_argument(detail::str("gradient shape ", detail::shape_str(g.shape()),
                                                " does not match parameter '", name, "' ",
                                                detail::shape_str(p.shape())));
      auto [vit, fresh] = velocity_.try_emplace(name, p.shape());
      Tensor<T>& v = vit->second;
      if (!fresh && !v.same_shape(p)) v = Tensor<T>(p.shape());
      for (size_t i = 0; i < p.numel(); ++i) {
        v[i] = m * v[i] + (g[i] + wd * p[i]);
        p[i] -= tlr * v[i];
      }
    }
  }

  void reset() { velocity_.clear(); }

  std::map<std::string, Tensor<T>>& velocity() { return velocity_; }
  const std::map<std::string, Tensor<T>>& velocity() const { return velocity_; }

 private:
  std::map<std::string, Tensor<T>> velocity_;
};

}  // namespace coopnet
