// Copyright (c) 2026 the coopnet authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coopnet/tensor.hpp"

namespace coopnet {

/// Reverse-mode gradient tape. Operations append nodes in forward order, so
/// creation order is a valid topological order of the DAG. Values are stored
/// by value and never mutated after recording; backward rules read
/// predecessor values through the tape by node id.
template <typename T>
class Tape {
 public:
  /// Fills `input_grads[i]` with dL/d(input i), given dL/d(output).
  using GradFn = std::function<void(const Tensor<T>& upstream,
                                    std::vector<Tensor<T>>& input_grads)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Records an input or parameter. Named leaves are reported by backward().
  int leaf(Tensor<T> value, std::string param_name = {}) {
    nodes_.push_back(Node{std::move(value), {}, nullptr, std::move(param_name), "leaf"});
    return static_cast<int>(nodes_.size()) - 1;
  }

  int record(const char* op, Tensor<T> value, std::vector<int> inputs, GradFn grad_fn) {
    for (int id : inputs) check_id(id);
    nodes_.push_back(Node{std::move(value), std::move(inputs), std::move(grad_fn), {}, op});
    return static_cast<int>(nodes_.size()) - 1;
  }

  const Tensor<T>& value(int id) const {
    check_id(id);
    return nodes_[id].value;
  }

  int size() const { return static_cast<int>(nodes_.size()); }

  /// Reverse accumulation from a scalar root. Returns dRoot/dLeaf for every
  /// named leaf. Fan-out is handled by summing the contributions of all
  /// consumers into the producer's slot.
  std::map<std::string, Tensor<T>> backward(int root) const {
    check_id(root);
    if (!nodes_[root].value.is_scalar())
      throw std::invalid_argument(detail::str(
          "backward root must be scalar, got shape ",
          detail::shape_str(nodes_[root].value.shape())));

    std::vector<std::optional<Tensor<T>>> grads(nodes_.size());
    grads[root] = Tensor<T>::scalar(T(1));
    for (int id = root; id >= 0; --id) {
      if (!grads[id] || !nodes_[id].grad_fn) continue;
      const Node& node = nodes_[id];
      std::vector<Tensor<T>> igs(node.inputs.size());
      node.grad_fn(*grads[id], igs);
      for (size_t k = 0; k < node.inputs.size(); ++k) {
        int in = node.inputs[k];
        if (igs[k].shape() != nodes_[in].value.shape())
          throw std::logic_error(detail::str(
              "backward rule of ", node.op, " produced gradient of shape ",
              detail::shape_str(igs[k].shape()), " for input of shape ",
              detail::shape_str(nodes_[in].value.shape())));
        if (grads[in])
          grads[in]->add_(igs[k]);
        else
          grads[in] = std::move(igs[k]);
      }
    }

    std::map<std::string, Tensor<T>> out;
    for (size_t id = 0; id < nodes_.size(); ++id) {
      if (nodes_[id].param_name.empty()) continue;
      if (grads[id])
        out.emplace(nodes_[id].param_name, std::move(*grads[id]));
      else
        out.emplace(nodes_[id].param_name, Tensor<T>::zeros(nodes_[id].value.shape()));
    }
    return out;
  }

 private:
  struct Node {
    Tensor<T> value;
    std::vector<int> inputs;
    GradFn grad_fn;
    std::string param_name;
    const char* op;
  };

  void check_id(int id) const {
    if (id < 0 || id >= static_cast<int>(nodes_.size()))
      throw std::out_of_range(detail::str("tape node id ", id, " out of range"));
  }

  std::vector<Node> nodes_;
};

}  // namespace coopnet
