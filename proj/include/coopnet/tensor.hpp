// Copyright (c) 2026 the coopnet authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace coopnet {

namespace detail {

template <typename... Args>
std::string str(Args&&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}

inline std::string shape_str(const std::vector<size_t>& s) {
  std::string out = "[";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

inline size_t shape_numel(const std::vector<size_t>& s) {
  size_t n = 1;
  for (size_t d : s) n *= d;
  return n;
}

// splitmix64; used to derive independent seed streams from one run seed.
inline uint64_t mix_seed(uint64_t a, uint64_t b) {
  uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Dense n-dimensional array in row-major order. The element type is the
/// dtype (float or double). Shape [] denotes a scalar holding one element.
template <typename T>
class Tensor {
  static_assert(std::is_floating_point_v<T>);

 public:
  Tensor() = default;

  explicit Tensor(std::vector<size_t> shape)
      : shape_(std::move(shape)), data_(detail::shape_numel(shape_), T(0)) {}

  Tensor(std::vector<size_t> shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != detail::shape_numel(shape_))
      throw std::invalid_argument(detail::str(
          "tensor data length ", data_.size(), " does not match shape ",
          detail::shape_str(shape_)));
  }

  static Tensor zeros(std::vector<size_t> shape) { return Tensor(std::move(shape)); }

  static Tensor full(std::vector<size_t> shape, T v) {
    Tensor t(std::move(shape));
    for (auto& x : t.data_) x = v;
    return t;
  }

  static Tensor ones(std::vector<size_t> shape) { return full(std::move(shape), T(1)); }

  static Tensor scalar(T v) { return Tensor({}, {v}); }

  const std::vector<size_t>& shape() const { return shape_; }
  size_t rank() const { return shape_.size(); }
  size_t numel() const { return data_.size(); }
  size_t dim(size_t i) const { return shape_.at(i); }
  bool is_scalar() const { return shape_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& vec() { return data_; }
  const std::vector<T>& vec() const { return data_; }

  T& operator[](size_t i) { return data_[i]; }
  const T& operator[](size_t i) const { return data_[i]; }

  /// Bounds-checked multi-index access.
  T& at(std::initializer_list<size_t> idx) { return data_[offset(idx)]; }
  const T& at(std::initializer_list<size_t> idx) const { return data_[offset(idx)]; }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  Tensor reshaped(std::vector<size_t> shape) const {
    if (detail::shape_numel(shape) != numel())
      throw std::invalid_argument(detail::str(
          "cannot reshape ", detail::shape_str(shape_), " (", numel(),
          " elements) to ", detail::shape_str(shape)));
    return Tensor(std::move(shape), data_);
  }

  void add_(const Tensor& o) {
    if (!same_shape(o))
      throw std::invalid_argument(detail::str("shape mismatch in add: ",
                                              detail::shape_str(shape_), " vs ",
                                              detail::shape_str(o.shape_)));
    for (size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  }

  void scale_(T c) {
    for (auto& x : data_) x *= c;
  }

 private:
  size_t offset(std::initializer_list<size_t> idx) const {
    if (idx.size() != shape_.size())
      throw std::out_of_range(detail::str("index rank ", idx.size(),
                                          " does not match tensor rank ", shape_.size()));
    size_t off = 0, i = 0;
    for (size_t v : idx) {
      if (v >= shape_[i])
        throw std::out_of_range(detail::str("index ", v, " out of bounds for dim ", i,
                                            " of shape ", detail::shape_str(shape_)));
      off = off * shape_[i] + v;
      ++i;
    }
    return off;
  }

  std::vector<size_t> shape_;
  std::vector<T> data_;
};

/// Seeded random stream. All draws are derived from the mt19937_64 engine
/// with fixed arithmetic so sequences are identical across platforms and
/// standard libraries, which keeps frozen test values stable.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  /// Uniform in [0,1) with 53 bits of resolution.
  double uniform() { return (eng_() >> 11) * (1.0 / 9007199254740992.0); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (cosine branch only, no cached pair).
  double normal() {
    double u1 = uniform(), u2 = uniform();
    double r = std::sqrt(-2.0 * std::log1p(-u1));
    return r * std::cos(6.283185307179586476925287 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Unbiased integer in [0, n).
  size_t below(size_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below(0)");
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t r;
    do {
      r = eng_();
    } while (r >= limit);
    return static_cast<size_t>(r % n);
  }

  bool coin() { return (eng_() & 1u) != 0; }

  template <typename V>
  void shuffle(std::vector<V>& v) {
    for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

  std::string save_state() const {
    std::ostringstream os;
    os << eng_;
    return os.str();
  }

  void restore_state(const std::string& s) {
    std::istringstream is(s);
    is >> eng_;
    if (is.fail()) throw std::runtime_error("bad rng state string");
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace coopnet
