// Copyright (c) 2026 the coopnet authors
// SPDX-License-Identifier: Apache-2.0
//
// Naive reference implementations used as test oracles. These deliberately
// stay loop-by-definition and share no code with the optimized kernels they
// check.
#pragma once

#include <cmath>
#include <vector>

#include "coopnet/tensor.hpp"

namespace oracle {

using coopnet::Tensor;

// Direct 6-nested-loop cross-correlation.
template <typename T>
Tensor<T> conv2d_reference(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                           size_t stride, size_t pad) {
  const size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), ww = x.dim(3);
  const size_t f = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  const size_t ho = (h + 2 * pad - kh) / stride + 1;
  const size_t wo = (ww + 2 * pad - kw) / stride + 1;
  Tensor<T> y({n, f, ho, wo});
  for (size_t ni = 0; ni < n; ++ni)
    for (size_t fi = 0; fi < f; ++fi)
      for (size_t oh = 0; oh < ho; ++oh)
        for (size_t ow = 0; ow < wo; ++ow) {
          double acc = b[fi];
          for (size_t ci = 0; ci < c; ++ci)
            for (size_t ki = 0; ki < kh; ++ki)
              for (size_t kj = 0; kj < kw; ++kj) {
                const long iy = static_cast<long>(oh * stride + ki) - static_cast<long>(pad);
                const long ix = static_cast<long>(ow * stride + kj) - static_cast<long>(pad);
                if (iy < 0 || iy >= static_cast<long>(h) || ix < 0 || ix >= static_cast<long>(ww))
                  continue;
                acc += static_cast<double>(x[((ni * c + ci) * h + iy) * ww + ix]) *
                       static_cast<double>(w[((fi * c + ci) * kh + ki) * kw + kj]);
              }
          y[((ni * f + fi) * ho + oh) * wo + ow] = static_cast<T>(acc);
        }
  return y;
}

// Window-scan max pooling.
template <typename T>
Tensor<T> max_pool2d_reference(const Tensor<T>& x, size_t k, size_t stride) {
  const size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const size_t ho = (h - k) / stride + 1, wo = (w - k) / stride + 1;
  Tensor<T> y({n, c, ho, wo});
  for (size_t img = 0; img < n * c; ++img)
    for (size_t oh = 0; oh < ho; ++oh)
      for (size_t ow = 0; ow < wo; ++ow) {
        T best = x[img * h * w + (oh * stride) * w + ow * stride];
        for (size_t ki = 0; ki < k; ++ki)
          for (size_t kj = 0; kj < k; ++kj)
            best = std::max(best, x[img * h * w + (oh * stride + ki) * w + ow * stride + kj]);
        y[(img * ho + oh) * wo + ow] = best;
      }
  return y;
}

// Triple-loop matrix multiply plus bias row.
template <typename T>
Tensor<T> dense_reference(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  const size_t n = x.dim(0), d = x.dim(1), m = w.dim(1);
  Tensor<T> y({n, m});
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < m; ++j) {
      double acc = b[j];
      for (size_t kk = 0; kk < d; ++kk)
        acc += static_cast<double>(x[i * d + kk]) * static_cast<double>(w[kk * m + j]);
      y[i * m + j] = static_cast<T>(acc);
    }
  return y;
}

// Softmax cross-entropy evaluated in extended precision.
inline long double softmax_xent_reference(const Tensor<double>& logits,
                                          const std::vector<int>& labels) {
  const size_t n = logits.dim(0), k = logits.dim(1);
  long double total = 0;
  for (size_t i = 0; i < n; ++i) {
    long double mx = logits[i * k];
    for (size_t j = 1; j < k; ++j) mx = std::max<long double>(mx, logits[i * k + j]);
    long double z = 0;
    for (size_t j = 0; j < k; ++j) z += std::exp(static_cast<long double>(logits[i * k + j]) - mx);
    total -= (static_cast<long double>(logits[i * k + labels[i]]) - mx) - std::log(z);
  }
  return total / n;
}

template <typename T>
double max_rel_err(const Tensor<T>& a, const Tensor<T>& b, double floor = 1e-12) {
  double worst = 0;
  for (size_t i = 0; i < a.numel(); ++i) {
    const double d = std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
    const double mag = std::max({std::abs(static_cast<double>(a[i])),
                                 std::abs(static_cast<double>(b[i])), floor});
    worst = std::max(worst, d / mag);
  }
  return worst;
}

}  // namespace oracle
