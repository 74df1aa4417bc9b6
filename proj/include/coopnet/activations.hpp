// Copyright (c) 2026 the coopnet authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "coopnet/tape.hpp"
#include "coopnet/tensor.hpp"

namespace coopnet {

enum class ActKind { ReLU, LeakyReLU, PReLU, ELU, SoftPlus, Identity };

/// One activation function: a kind plus the parameter relevant to it.
/// PReLU's slopes are learnable per channel and live in the network's
/// parameter registry; `prelu_init` is only their initial value.
struct ActivationSpec {
  ActKind kind = ActKind::ReLU;
  double leaky_slope = 0.01;  // LeakyReLU only
  double elu_alpha = 1.0;     // ELU only, > 0
  double prelu_init = 0.25;   // PReLU only

  static ActivationSpec relu() { return {ActKind::ReLU}; }
  static ActivationSpec leaky_relu(double slope = 0.01) {
    ActivationSpec s{ActKind::LeakyReLU};
    s.leaky_slope = slope;
    return s;
  }
  static ActivationSpec prelu(double init = 0.25) {
    ActivationSpec s{ActKind::PReLU};
    s.prelu_init = init;
    return s;
  }
  static ActivationSpec elu(double alpha = 1.0) {
    ActivationSpec s{ActKind::ELU};
    if (alpha <= 0) throw std::invalid_argument("elu alpha must be > 0");
    s.elu_alpha = alpha;
    return s;
  }
  static ActivationSpec softplus() { return {ActKind::SoftPlus}; }
  static ActivationSpec identity() { return {ActKind::Identity}; }

  bool learnable() const { return kind == ActKind::PReLU; }

  bool operator==(const ActivationSpec& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
      case ActKind::LeakyReLU: return leaky_slope == o.leaky_slope;
      case ActKind::ELU: return elu_alpha == o.elu_alpha;
      case ActKind::PReLU: return prelu_init == o.prelu_init;
      default: return true;
    }
  }
  bool operator!=(const ActivationSpec& o) const { return !(*this == o); }
};

namespace detail {

// Shortest representation that round-trips the exact double.
inline std::string num_str(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// channel index of a flat element; channels are dim 1 ([N,C,...] or [N,M]).
inline size_t channel_of(const std::vector<size_t>& shape, size_t flat) {
  size_t inner = 1;
  for (size_t i = 2; i < shape.size(); ++i) inner *= shape[i];
  return (flat / inner) % shape[1];
}

template <typename T>
T softplus_val(T x) {
  // max(x,0) + log1p(exp(-|x|)): no overflow for large x, no NaN for small.
  return std::max(x, T(0)) + std::log1p(std::exp(-std::abs(x)));
}

template <typename T>
T sigmoid_val(T x) {
  if (x >= 0) return T(1) / (T(1) + std::exp(-x));
  T e = std::exp(x);
  return e / (T(1) + e);
}

}  // namespace detail

inline std::string act_kind_name(ActKind k) {
  switch (k) {
    case ActKind::ReLU: return "relu";
    case ActKind::LeakyReLU: return "leakyrelu";
    case ActKind::PReLU: return "prelu";
    case ActKind::ELU: return "elu";
    case ActKind::SoftPlus: return "softplus";
    case ActKind::Identity: return "identity";
  }
  return "?";
}

/// Canonical textual form, e.g. "relu", "prelu:0.25", "elu:1".
inline std::string encode_activation(const ActivationSpec& s) {
  switch (s.kind) {
    case ActKind::LeakyReLU: return "leakyrelu:" + detail::num_str(s.leaky_slope);
    case ActKind::PReLU: return "prelu:" + detail::num_str(s.prelu_init);
    case ActKind::ELU: return "elu:" + detail::num_str(s.elu_alpha);
    default: return act_kind_name(s.kind);
  }
}

inline ActivationSpec parse_activation(const std::string& text) {
  std::string name = text, arg;
  if (auto p = text.find(':'); p != std::string::npos) {
    name = text.substr(0, p);
    arg = text.substr(p + 1);
  }
  auto num = [&](double dflt) {
    if (arg.empty()) return dflt;
    size_t used = 0;
    double v = std::stod(arg, &used);
    if (used != arg.size())
      throw std::invalid_argument("bad activation parameter '" + arg + "' in '" + text + "'");
    return v;
  };
  if (name == "relu") return ActivationSpec::relu();
  if (name == "leakyrelu") return ActivationSpec::leaky_relu(num(0.01));
  if (name == "prelu") return ActivationSpec::prelu(num(0.25));
  if (name == "elu") return ActivationSpec::elu(num(1.0));
  if (name == "softplus") return ActivationSpec::softplus();
  if (name == "identity") return ActivationSpec::identity();
  throw std::invalid_argument("unknown activation '" + text + "'");
}

/// Elementwise activation. `slopes` must be present exactly for PReLU and
/// hold one learnable slope per channel (dim 1 of x).
template <typename T>
Tensor<T> act_forward(const ActivationSpec& spec, const Tensor<T>& x,
                      const Tensor<T>* slopes = nullptr) {
  if (spec.kind == ActKind::PReLU) {
    if (!slopes) throw std::invalid_argument("prelu requires a slopes tensor");
    if (x.rank() < 2)
      throw std::invalid_argument("prelu input must have a channel dimension");
    if (slopes->shape() != std::vector<size_t>{x.dim(1)})
      throw std::invalid_argument(detail::str("prelu slopes shape ",
                                              detail::shape_str(slopes->shape()),
                                              " does not match ", x.dim(1), " channels"));
  } else if (slopes) {
    throw std::invalid_argument(detail::str("slopes tensor given for ",
                                            act_kind_name(spec.kind)));
  }

  Tensor<T> y(x.shape());
  const size_t n = x.numel();
  switch (spec.kind) {
    case ActKind::ReLU:
      for (size_t i = 0; i < n; ++i) y[i] = x[i] > 0 ? x[i] : T(0);
      break;
    case ActKind::LeakyReLU: {
      const T s = static_cast<T>(spec.leaky_slope);
      for (size_t i = 0; i < n; ++i) y[i] = x[i] > 0 ? x[i] : s * x[i];
      break;
    }
    case ActKind::PReLU:
      for (size_t i = 0; i < n; ++i)
        y[i] = x[i] > 0 ? x[i] : (*slopes)[detail::channel_of(x.shape(), i)] * x[i];
      break;
    case ActKind::ELU: {
      const T a = static_cast<T>(spec.elu_alpha);
      for (size_t i = 0; i < n; ++i) y[i] = x[i] > 0 ? x[i] : a * std::expm1(x[i]);
      break;
    }
    case ActKind::SoftPlus:
      for (size_t i = 0; i < n; ++i) y[i] = detail::softplus_val(x[i]);
      break;
    case ActKind::Identity:
      y = x;
      break;
  }
  return y;
}

/// dx = upstream * F'(x); for PReLU also dslopes_c = sum over channel c of
/// upstream * x * [x <= 0]. The subgradient at exactly 0 takes the
/// negative-side value for the piecewise-linear kinds.
template <typename T>
void act_backward(const ActivationSpec& spec, const Tensor<T>& x, const Tensor<T>& upstream,
                  const Tensor<T>* slopes, Tensor<T>* dx, Tensor<T>* dslopes) {
  if (!upstream.same_shape(x))
    throw std::invalid_argument(detail::str("upstream shape ",
                                            detail::shape_str(upstream.shape()),
                                            " does not match input ",
                                            detail::shape_str(x.shape())));
  if (spec.kind == ActKind::PReLU && (!slopes || !dslopes))
    throw std::invalid_argument("prelu backward requires slopes and dslopes");

  *dx = Tensor<T>(x.shape());
  const size_t n = x.numel();
  switch (spec.kind) {
    case ActKind::ReLU:
      for (size_t i = 0; i < n; ++i) (*dx)[i] = x[i] > 0 ? upstream[i] : T(0);
      break;
    case ActKind::LeakyReLU: {
      const T s = static_cast<T>(spec.leaky_slope);
      for (size_t i = 0; i < n; ++i) (*dx)[i] = upstream[i] * (x[i] > 0 ? T(1) : s);
      break;
    }
    case ActKind::PReLU: {
      *dslopes = Tensor<T>(slopes->shape());
      for (size_t i = 0; i < n; ++i) {
        const size_t c = detail::channel_of(x.shape(), i);
        if (x[i] > 0) {
          (*dx)[i] = upstream[i];
        } else {
          (*dx)[i] = upstream[i] * (*slopes)[c];
          (*dslopes)[c] += upstream[i] * x[i];
        }
      }
      break;
    }
    case ActKind::ELU: {
      const T a = static_cast<T>(spec.elu_alpha);
      for (size_t i = 0; i < n; ++i)
        (*dx)[i] = upstream[i] * (x[i] > 0 ? T(1) : a * std::exp(x[i]));
      break;
    }
    case ActKind::SoftPlus:
      for (size_t i = 0; i < n; ++i) (*dx)[i] = upstream[i] * detail::sigmoid_val(x[i]);
      break;
    case ActKind::Identity:
      *dx = upstream;
      break;
  }
}

/// A k-way weighted mixture of activations applied to one feature map:
/// out = sum_i weights[i] * branch_i(x). Weights must sum to 1; the default
/// is the equal-weight 1/k assignment. Each PReLU branch owns a private
/// per-channel slope tensor.
struct MixedActivation {
  std::vector<ActivationSpec> branches;
  std::vector<double> weights;

  MixedActivation(std::vector<ActivationSpec> br, std::vector<double> w)
      : branches(std::move(br)), weights(std::move(w)) {
    if (branches.empty()) throw std::invalid_argument("mixture needs at least one branch");
    if (weights.size() != branches.size())
      throw std::invalid_argument(detail::str("mixture has ", branches.size(),
                                              " branches but ", weights.size(), " weights"));
    double s = 0;
    for (double v : weights) s += v;
    if (std::abs(s - 1.0) > 1e-12)
      throw std::invalid_argument(detail::str("mixture weights sum to ", s, ", expected 1"));
    for (const auto& b : branches)
      if (b.kind == ActKind::Identity)
        throw std::invalid_argument("identity is not allowed inside a mixture");
  }

  static MixedActivation equal(std::vector<ActivationSpec> br) {
    const size_t k = br.size();
    if (k == 0) throw std::invalid_argument("mixture needs at least one branch");
    std::vector<double> w(k, 1.0 / static_cast<double>(k));
    // 1/k does not always sum to exactly 1 in binary; pin the last weight.
    double partial = 0;
    for (size_t i = 0; i + 1 < k; ++i) partial += w[i];
    w[k - 1] = 1.0 - partial;
    return MixedActivation(std::move(br), std::move(w));
  }

  /// The paper's default 4-branch equal-weight mixture.
  static MixedActivation default4() {
    return equal({ActivationSpec::relu(), ActivationSpec::prelu(0.25),
                  ActivationSpec::elu(1.0), ActivationSpec::softplus()});
  }

  size_t k() const { return branches.size(); }

  bool equal_weighted() const {
    for (size_t i = 0; i + 1 < k(); ++i)
      if (weights[i] != weights[0]) return false;
    return true;
  }

  bool operator==(const MixedActivation& o) const {
    return branches == o.branches && weights == o.weights;
  }
};

inline std::string encode_mixture(const MixedActivation& m) {
  std::string s = "mix(";
  for (size_t i = 0; i < m.k(); ++i) {
    if (i) s += ",";
    s += encode_activation(m.branches[i]);
  }
  s += ";";
  if (m.equal_weighted()) {
    s += "equal";
  } else {
    for (size_t i = 0; i < m.k(); ++i) {
      if (i) s += ",";
      s += detail::num_str(m.weights[i]);
    }
  }
  return s + ")";
}

inline MixedActivation parse_mixture(const std::string& text) {
  if (text.size() < 5 || text.substr(0, 4) != "mix(" || text.back() != ')')
    throw std::invalid_argument("bad mixture syntax '" + text + "', expected mix(...;...)");
  const std::string body = text.substr(4, text.size() - 5);
  const auto semi = body.find(';');
  if (semi == std::string::npos)
    throw std::invalid_argument("mixture '" + text + "' is missing the ';weights' part");
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start <= s.size()) {
      auto p = s.find(',', start);
      if (p == std::string::npos) p = s.size();
      out.push_back(s.substr(start, p - start));
      start = p + 1;
    }
    return out;
  };
  std::vector<ActivationSpec> branches;
  for (const auto& tok : split(body.substr(0, semi))) branches.push_back(parse_activation(tok));
  const std::string wpart = body.substr(semi + 1);
  if (wpart == "equal") return MixedActivation::equal(std::move(branches));
  std::vector<double> weights;
  for (const auto& tok : split(wpart)) weights.push_back(std::stod(tok));
  return MixedActivation(std::move(branches), std::move(weights));
}

/// Either a single activation or a mixture; the payload of an activation
/// slot and the unit of the slot encoding grammar.
struct SlotActivation {
  std::optional<ActivationSpec> single;
  std::optional<MixedActivation> mix;

  SlotActivation(ActivationSpec s) : single(s) {}
  SlotActivation(MixedActivation m) : mix(std::move(m)) {}

  bool is_mixture() const { return mix.has_value(); }

  std::string encode() const {
    return is_mixture() ? encode_mixture(*mix) : encode_activation(*single);
  }

  static SlotActivation parse(const std::string& text) {
    if (text.rfind("mix(", 0) == 0) return SlotActivation(parse_mixture(text));
    return SlotActivation(parse_activation(text));
  }

  bool operator==(const SlotActivation& o) const {
    if (is_mixture() != o.is_mixture()) return false;
    return is_mixture() ? *mix == *o.mix : *single == *o.single;
  }
};

/// out = sum_i w_i * branch_i(x). `slopes[j]` is the slope tensor of the
/// j-th PReLU branch, in branch order. A 1-branch mixture with weight 1 is
/// bit-identical to the bare activation.
template <typename T>
Tensor<T> mixture_forward(const MixedActivation& mix, const Tensor<T>& x,
                          const std::vector<const Tensor<T>*>& slopes = {}) {
  size_t si = 0;
  auto next_slopes = [&](const ActivationSpec& b) -> const Tensor<T>* {
    if (b.kind != ActKind::PReLU) return nullptr;
    if (si >= slopes.size())
      throw std::invalid_argument("missing slope tensor for prelu mixture branch");
    return slopes[si++];
  };
  if (mix.k() == 1 && mix.weights[0] == 1.0)
    return act_forward(mix.branches[0], x, next_slopes(mix.branches[0]));

  Tensor<T> out(x.shape());
  for (size_t i = 0; i < mix.k(); ++i) {
    Tensor<T> b = act_forward(mix.branches[i], x, next_slopes(mix.branches[i]));
    const T w = static_cast<T>(mix.weights[i]);
    for (size_t j = 0; j < out.numel(); ++j) out[j] += w * b[j];
  }
  return out;
}

/// dx = upstream * sum_i w_i * F_i'(x); each PReLU branch's slope gradient
/// is scaled by its branch weight. Reverse accumulation over the k branches
/// is what sums the per-activation gradients into one aggregate.
template <typename T>
void mixture_backward(const MixedActivation& mix, const Tensor<T>& x, const Tensor<T>& upstream,
                      const std::vector<const Tensor<T>*>& slopes, Tensor<T>* dx,
                      std::vector<Tensor<T>>* dslopes) {
  size_t si = 0;
  auto next_slopes = [&](const ActivationSpec& b) -> const Tensor<T>* {
    if (b.kind != ActKind::PReLU) return nullptr;
    if (si >= slopes.size())
      throw std::invalid_argument("missing slope tensor for prelu mixture branch");
    return slopes[si++];
  };
  if (dslopes) dslopes->clear();

  if (mix.k() == 1 && mix.weights[0] == 1.0) {
    const ActivationSpec& b = mix.branches[0];
    const Tensor<T>* sl = next_slopes(b);
    Tensor<T> ds;
    act_backward(b, x, upstream, sl, dx, sl ? &ds : nullptr);
    if (sl && dslopes) dslopes->push_back(std::move(ds));
    return;
  }

  *dx = Tensor<T>(x.shape());
  for (size_t i = 0; i < mix.k(); ++i) {
    const ActivationSpec& b = mix.branches[i];
    const Tensor<T>* sl = next_slopes(b);
    const T w = static_cast<T>(mix.weights[i]);
    Tensor<T> bdx, bds;
    act_backward(b, x, upstream, sl, &bdx, sl ? &bds : nullptr);
    for (size_t j = 0; j < dx->numel(); ++j) (*dx)[j] += w * bdx[j];
    if (sl && dslopes) {
      bds.scale_(w);
      dslopes->push_back(std::move(bds));
    }
  }
}

/// Tape op for a single activation. `slopes_id` is the PReLU slope
/// parameter node, -1 otherwise.
template <typename T>
int tape_activation(Tape<T>& tape, int x_id, const ActivationSpec& spec, int slopes_id = -1) {
  const Tensor<T>& x = tape.value(x_id);
  const bool has_slopes = spec.kind == ActKind::PReLU;
  if (has_slopes && slopes_id < 0)
    throw std::invalid_argument("prelu activation needs a slopes node");
  Tensor<T> y = act_forward(spec, x, has_slopes ? &tape.value(slopes_id) : nullptr);

  std::vector<int> inputs{x_id};
  if (has_slopes) inputs.push_back(slopes_id);
  auto grad = [tp = &tape, x_id, slopes_id, spec, has_slopes](const Tensor<T>& up,
                                                              std::vector<Tensor<T>>& gs) {
    Tensor<T> dx, ds;
    act_backward(spec, tp->value(x_id), up, has_slopes ? &tp->value(slopes_id) : nullptr, &dx,
                 has_slopes ? &ds : nullptr);
    gs[0] = std::move(dx);
    if (has_slopes) gs[1] = std::move(ds);
  };
  return tape.record("activation", std::move(y), std::move(inputs), std::move(grad));
}

/// Tape op for a mixture. `slope_ids` are the PReLU branch slope parameter
/// nodes in branch order.
template <typename T>
int tape_mixture(Tape<T>& tape, int x_id, const MixedActivation& mix,
                 const std::vector<int>& slope_ids = {}) {
  std::vector<const Tensor<T>*> slopes;
  slopes.reserve(slope_ids.size());
  for (int id : slope_ids) slopes.push_back(&tape.value(id));
  Tensor<T> y = mixture_forward(mix, tape.value(x_id), slopes);

  std::vector<int> inputs{x_id};
  for (int id : slope_ids) inputs.push_back(id);
  auto grad = [tp = &tape, x_id, slope_ids, mix](const Tensor<T>& up,
                                                 std::vector<Tensor<T>>& gs) {
    std::vector<const Tensor<T>*> slopes;
    for (int id : slope_ids) slopes.push_back(&tp->value(id));
    Tensor<T> dx;
    std::vector<Tensor<T>> ds;
    mixture_backward(mix, tp->value(x_id), up, slopes, &dx, &ds);
    gs[0] = std::move(dx);
    for (size_t i = 0; i < ds.size(); ++i) gs[1 + i] = std::move(ds[i]);
  };
  return tape.record("mixture", std::move(y), std::move(inputs), std::move(grad));
}

}  // namespace coopnet
