// Copyright (c) 2026 the coopnet authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

#include "coopnet/activations.hpp"
#include "coopnet/ops.hpp"

namespace coopnet {

/// A structural graph position holding either a single activation or a
/// mixture. Slots are swappable without touching any other parameter, which
/// is what makes the phase-1 -> phase-2 transition a plain graph edit.
struct ActivationSlot {
  std::string site;       // unique id, e.g. "conv1.act"
  size_t channels = 0;    // feature-map channels at this site
  SlotActivation current{ActivationSpec::relu()};
};

enum class LayerKind { Conv, Pool, Flatten, Dense, Act };

struct Layer {
  LayerKind kind;
  std::string name;
  // conv
  size_t in_c = 0, out_c = 0, ksize = 0, stride = 1, pad = 0;
  // dense
  size_t in_dim = 0, out_dim = 0;
  // pool
  size_t pool_k = 0, pool_stride = 0;
  // act
  ActivationSlot slot;
};

/// Ordered layer list plus the named-parameter registry. Every learnable
/// tensor (conv/dense weights and biases, PReLU slopes) appears in the
/// registry under exactly one name.
template <typename T>
struct Network {
  std::string arch;
  std::vector<size_t> input_shape;  // per-sample [C,H,W]
  size_t num_classes = 0;
  std::vector<Layer> layers;
  std::map<std::string, Tensor<T>> params;

  /// Runs the layers on an already-recorded input node and returns the
  /// logits node. Parameters are recorded as named leaves. If `taps` is
  /// given, every layer's output node id is stored under its name.
  int forward(Tape<T>& tape, int input_id, std::map<std::string, int>* taps = nullptr) const {
    int cur = input_id;
    for (const Layer& layer : layers) {
      switch (layer.kind) {
        case LayerKind::Conv: {
          int w = tape.leaf(params.at(layer.name + ".weight"), layer.name + ".weight");
          int b = tape.leaf(params.at(layer.name + ".bias"), layer.name + ".bias");
          cur = conv2d(tape, cur, w, b, layer.stride, layer.pad);
          break;
        }
        case LayerKind::Pool:
          cur = max_pool2d(tape, cur, layer.pool_k, layer.pool_stride);
          break;
        case LayerKind::Flatten:
          cur = flatten(tape, cur);
          break;
        case LayerKind::Dense: {
          int w = tape.leaf(params.at(layer.name + ".weight"), layer.name + ".weight");
          int b = tape.leaf(params.at(layer.name + ".bias"), layer.name + ".bias");
          cur = dense(tape, cur, w, b);
          break;
        }
        case LayerKind::Act: {
          const ActivationSlot& slot = layer.slot;
          if (slot.current.is_mixture()) {
            std::vector<int> slope_ids;
            const MixedActivation& mix = *slot.current.mix;
            for (size_t i = 0; i < mix.k(); ++i) {
              if (mix.branches[i].kind != ActKind::PReLU) continue;
              std::string pname = slot.site + ".b" + std::to_string(i) + ".prelu_slope";
              slope_ids.push_back(tape.leaf(params.at(pname), pname));
            }
            cur = tape_mixture(tape, cur, mix, slope_ids);
          } else if (slot.current.single->kind == ActKind::PReLU) {
            std::string pname = slot.site + ".prelu_slope";
            int s = tape.leaf(params.at(pname), pname);
            cur = tape_activation(tape, cur, *slot.current.single, s);
          } else {
            cur = tape_activation(tape, cur, *slot.current.single);
          }
          break;
        }
      }
      if (taps) (*taps)[layer.name] = cur;
    }
    return cur;
  }

  std::vector<const ActivationSlot*> slots() const {
    std::vector<const ActivationSlot*> out;
    for (const Layer& l : layers)
      if (l.kind == LayerKind::Act) out.push_back(&l.slot);
    return out;
  }

  size_t param_count() const {
    size_t n = 0;
    for (const auto& [name, t] : params) n += t.numel();
    return n;
  }

  std::vector<std::string> layer_names() const {
    std::vector<std::string> out;
    for (const Layer& l : layers) out.push_back(l.name);
    return out;
  }
};

namespace detail {

// Registers the slope tensors a slot needs for its current activation.
template <typename T>
void register_slot_params(Network<T>& net, const ActivationSlot& slot) {
  if (slot.current.is_mixture()) {
    const MixedActivation& mix = *slot.current.mix;
    for (size_t i = 0; i < mix.k(); ++i)
      if (mix.branches[i].kind == ActKind::PReLU)
        net.params[slot.site + ".b" + std::to_string(i) + ".prelu_slope"] =
            Tensor<T>::full({slot.channels}, static_cast<T>(mix.branches[i].prelu_init));
  } else if (slot.current.single->kind == ActKind::PReLU) {
    net.params[slot.site + ".prelu_slope"] =
        Tensor<T>::full({slot.channels}, static_cast<T>(slot.current.single->prelu_init));
  }
}

template <typename T>
void drop_slot_params(Network<T>& net, const ActivationSlot& slot) {
  auto it = net.params.lower_bound(slot.site + ".");
  while (it != net.params.end() && it->first.rfind(slot.site + ".", 0) == 0)
    it = net.params.erase(it);
}

}  // namespace detail

/// Replaces every activation slot's content. Conv/dense parameters are
/// untouched; slope tensors of the previous activations are dropped from
/// the registry and fresh ones (if the new activation needs any) are
/// registered at their initial value.
template <typename T>
void set_all_slots(Network<T>& net, const SlotActivation& act) {
  for (Layer& l : net.layers) {
    if (l.kind != LayerKind::Act) continue;
    detail::drop_slot_params(net, l.slot);
    l.slot.current = act;
    detail::register_slot_params(net, l.slot);
  }
}

template <typename T>
void set_all_slots(Network<T>& net, const ActivationSpec& act) {
  set_all_slots(net, SlotActivation(act));
}

template <typename T>
void set_all_slots(Network<T>& net, const MixedActivation& mix) {
  set_all_slots(net, SlotActivation(mix));
}

namespace detail {

inline Layer conv_layer(std::string name, size_t in_c, size_t out_c, size_t k, size_t stride,
                        size_t pad) {
  Layer l;
  l.kind = LayerKind::Conv;
  l.name = std::move(name);
  l.in_c = in_c;
  l.out_c = out_c;
  l.ksize = k;
  l.stride = stride;
  l.pad = pad;
  return l;
}

inline Layer act_layer(std::string site, size_t channels) {
  Layer l;
  l.kind = LayerKind::Act;
  l.name = site;
  l.slot = ActivationSlot{std::move(site), channels, SlotActivation(ActivationSpec::relu())};
  return l;
}

inline Layer pool_layer(std::string name, size_t k, size_t stride) {
  Layer l;
  l.kind = LayerKind::Pool;
  l.name = std::move(name);
  l.pool_k = k;
  l.pool_stride = stride;
  return l;
}

inline Layer flatten_layer(std::string name) {
  Layer l;
  l.kind = LayerKind::Flatten;
  l.name = std::move(name);
  return l;
}

inline Layer dense_layer(std::string name, size_t in_dim, size_t out_dim) {
  Layer l;
  l.kind = LayerKind::Dense;
  l.name = std::move(name);
  l.in_dim = in_dim;
  l.out_dim = out_dim;
  return l;
}

template <typename T>
void register_layer_params(Network<T>& net) {
  for (const Layer& l : net.layers) {
    if (l.kind == LayerKind::Conv) {
      net.params[l.name + ".weight"] = Tensor<T>({l.out_c, l.in_c, l.ksize, l.ksize});
      net.params[l.name + ".bias"] = Tensor<T>({l.out_c});
    } else if (l.kind == LayerKind::Dense) {
      net.params[l.name + ".weight"] = Tensor<T>({l.in_dim, l.out_dim});
      net.params[l.name + ".bias"] = Tensor<T>({l.out_dim});
    } else if (l.kind == LayerKind::Act) {
      register_slot_params(net, l.slot);
    }
  }
}

}  // namespace detail

/// LeNet-like MNIST network: two 5x5 conv layers with 20 and 30 filters,
/// each followed by an activation slot and 2x2 max pooling, then one
/// fully-connected layer. 28x28 input gives a 30*4*4 = 480 wide flatten.
template <typename T>
Network<T> build_lenet_mnist() {
  Network<T> net;
  net.arch = "lenet-mnist";
  net.input_shape = {1, 28, 28};
  net.num_classes = 10;
  net.layers = {detail::conv_layer("conv1", 1, 20, 5, 1, 0),
                detail::act_layer("conv1.act", 20),
                detail::pool_layer("pool1", 2, 2),
                detail::conv_layer("conv2", 20, 30, 5, 1, 0),
                detail::act_layer("conv2.act", 30),
                detail::pool_layer("pool2", 2, 2),
                detail::flatten_layer("flatten"),
                detail::dense_layer("fc", 480, 10)};
  detail::register_layer_params(net);
  return net;
}

/// Desk-scale 3-block CNN stand-in for the paper-scale CIFAR models. Every
/// activation site is a slot; 32x32 input gives a 128*4*4 = 2048 flatten.
template <typename T>
Network<T> build_small_cifar_cnn(size_t num_classes = 10) {
  Network<T> net;
  net.arch = num_classes == 100 ? "small-cifar-100" : "small-cifar-10";
  net.input_shape = {3, 32, 32};
  net.num_classes = num_classes;
  const size_t widths[3] = {32, 64, 128};
  size_t in_c = 3;
  int idx = 1;
  for (size_t block = 0; block < 3; ++block) {
    const size_t c = widths[block];
    for (int half = 0; half < 2; ++half, ++idx) {
      std::string name = "conv" + std::to_string(idx);
      net.layers.push_back(detail::conv_layer(name, in_c, c, 3, 1, 1));
      net.layers.push_back(detail::act_layer(name + ".act", c));
      in_c = c;
    }
    net.layers.push_back(detail::pool_layer("pool" + std::to_string(block + 1), 2, 2));
  }
  net.layers.push_back(detail::flatten_layer("flatten"));
  net.layers.push_back(detail::dense_layer("fc", 2048, num_classes));
  detail::register_layer_params(net);
  return net;
}

/// Tiny one-hidden-layer MLP for the 2-d synthetic XOR dataset (input
/// tensor shape [1,1,2]).
template <typename T>
Network<T> build_xor_mlp(size_t hidden = 16) {
  Network<T> net;
  net.arch = "xor-mlp";
  net.input_shape = {1, 1, 2};
  net.num_classes = 2;
  net.layers = {detail::flatten_layer("flatten"), detail::dense_layer("fc1", 2, hidden),
                detail::act_layer("fc1.act", hidden), detail::dense_layer("fc2", hidden, 2)};
  detail::register_layer_params(net);
  return net;
}

template <typename T>
Network<T> build_network(const std::string& arch) {
  if (arch == "lenet-mnist") return build_lenet_mnist<T>();
  if (arch == "small-cifar-10") return build_small_cifar_cnn<T>(10);
  if (arch == "small-cifar-100") return build_small_cifar_cnn<T>(100);
  if (arch == "xor-mlp") return build_xor_mlp<T>();
  throw std::invalid_argument("unknown architecture '" + arch + "'");
}

enum class InitScheme { KaimingNormal, UniformRange };

inline InitScheme parse_init_scheme(const std::string& s) {
  if (s == "kaiming-normal") return InitScheme::KaimingNormal;
  if (s == "uniform-range") return InitScheme::UniformRange;
  throw std::invalid_argument("unknown init scheme '" + s + "'");
}

/// Deterministic weight initialization. Kaiming-normal draws conv/dense
/// weights from N(0, sqrt(2/fan_in)) and zeroes biases; uniform-range draws
/// from U(-1/sqrt(fan_in), 1/sqrt(fan_in)). PReLU slopes keep their
/// constant initial value.
template <typename T>
void init_weights(Network<T>& net, uint64_t seed,
                  InitScheme scheme = InitScheme::KaimingNormal) {
  Rng rng(detail::mix_seed(seed, 0x1217));
  for (const Layer& l : net.layers) {
    size_t fan_in = 0;
    if (l.kind == LayerKind::Conv)
      fan_in = l.in_c * l.ksize * l.ksize;
    else if (l.kind == LayerKind::Dense)
      fan_in = l.in_dim;
    else
      continue;
    Tensor<T>& w = net.params.at(l.name + ".weight");
    if (scheme == InitScheme::KaimingNormal) {
      const double std = std::sqrt(2.0 / static_cast<double>(fan_in));
      for (size_t i = 0; i < w.numel(); ++i) w[i] = static_cast<T>(rng.normal(0.0, std));
    } else {
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      for (size_t i = 0; i < w.numel(); ++i)
        w[i] = static_cast<T>(rng.uniform(-bound, bound));
    }
    Tensor<T>& b = net.params.at(l.name + ".bias");
    for (size_t i = 0; i < b.numel(); ++i) b[i] = T(0);
  }
}

}  // namespace coopnet
