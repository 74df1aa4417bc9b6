// Copyright (c) 2026 the coopnet authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "coopnet/tape.hpp"
#include "coopnet/tensor.hpp"

namespace coopnet {

namespace detail {

// C[M,N] += A[M,K] * B[K,N], all row-major contiguous. The i-k-j order keeps
// the inner loop a contiguous axpy, which the compiler vectorizes; it wins
// over explicit register blocking at the sizes the conv layers produce.
template <typename T>
void gemm_accum(size_t M, size_t N, size_t K, const T* A, const T* B, T* C) {
  for (size_t i = 0; i < M; ++i) {
    T* __restrict c = C + i * N;
    const T* a = A + i * K;
    for (size_t k = 0; k < K; ++k) {
      const T av = a[k];
      const T* __restrict b = B + k * N;
      for (size_t j = 0; j < N; ++j) c[j] += av * b[j];
    }
  }
}

template <typename T>
void transpose(size_t rows, size_t cols, const T* src, T* dst) {
  for (size_t i = 0; i < rows; ++i)
    for (size_t j = 0; j < cols; ++j) dst[j * rows + i] = src[i * cols + j];
}

struct Conv2dDims {
  size_t n, c, h, w;       // input
  size_t f, kh, kw;        // filters
  size_t stride, pad;
  size_t ho, wo;           // output spatial
  size_t patch() const { return c * kh * kw; }
  size_t cols() const { return n * ho * wo; }
};

inline Conv2dDims conv2d_dims(const std::vector<size_t>& x, const std::vector<size_t>& w,
                              size_t stride, size_t pad) {
  if (x.size() != 4 || w.size() != 4)
    throw std::invalid_argument(detail::str("conv2d expects 4-d input and weight, got ",
                                            shape_str(x), " and ", shape_str(w)));
  Conv2dDims d{x[0], x[1], x[2], x[3], w[0], w[2], w[3], stride, pad, 0, 0};
  if (w[1] != d.c)
    throw std::invalid_argument(detail::str("conv2d channel mismatch: input has ", d.c,
                                            " channels, weight expects ", w[1]));
  if (stride < 1) throw std::invalid_argument("conv2d stride must be >= 1");
  if (d.h + 2 * pad < d.kh || d.w + 2 * pad < d.kw)
    throw std::invalid_argument(detail::str("conv2d kernel ", d.kh, "x", d.kw,
                                            " larger than padded input ", d.h + 2 * pad,
                                            "x", d.w + 2 * pad));
  d.ho = (d.h + 2 * pad - d.kh) / stride + 1;
  d.wo = (d.w + 2 * pad - d.kw) / stride + 1;
  if (d.ho == 0 || d.wo == 0)
    throw std::invalid_argument(detail::str("conv2d output would be empty: ", d.ho, "x", d.wo));
  return d;
}

// Unrolls padded input patches into a [patch, n*ho*wo] matrix; column order
// is (n, oh, ow) row-major so one gemm covers the whole batch.
template <typename T>
void im2col(const Conv2dDims& d, const T* x, T* cols) {
  const size_t ncols = d.cols();
  for (size_t c = 0; c < d.c; ++c) {
    for (size_t ki = 0; ki < d.kh; ++ki) {
      for (size_t kj = 0; kj < d.kw; ++kj) {
        T* row = cols + ((c * d.kh + ki) * d.kw + kj) * ncols;
        for (size_t n = 0; n < d.n; ++n) {
          const T* img = x + (n * d.c + c) * d.h * d.w;
          for (size_t oh = 0; oh < d.ho; ++oh) {
            const long ih = static_cast<long>(oh * d.stride + ki) - static_cast<long>(d.pad);
            T* out = row + (n * d.ho + oh) * d.wo;
            if (ih < 0 || ih >= static_cast<long>(d.h)) {
              std::fill(out, out + d.wo, T(0));
              continue;
            }
            const T* src = img + ih * d.w;
            for (size_t ow = 0; ow < d.wo; ++ow) {
              const long iw = static_cast<long>(ow * d.stride + kj) - static_cast<long>(d.pad);
              out[ow] = (iw < 0 || iw >= static_cast<long>(d.w)) ? T(0) : src[iw];
            }
          }
        }
      }
    }
  }
}

// Scatter-add of a patch matrix back onto the (unpadded) input, the adjoint
// of im2col.
template <typename T>
void col2im_add(const Conv2dDims& d, const T* cols, T* x) {
  const size_t ncols = d.cols();
  for (size_t c = 0; c < d.c; ++c) {
    for (size_t ki = 0; ki < d.kh; ++ki) {
      for (size_t kj = 0; kj < d.kw; ++kj) {
        const T* row = cols + ((c * d.kh + ki) * d.kw + kj) * ncols;
        for (size_t n = 0; n < d.n; ++n) {
          T* img = x + (n * d.c + c) * d.h * d.w;
          for (size_t oh = 0; oh < d.ho; ++oh) {
            const long ih = static_cast<long>(oh * d.stride + ki) - static_cast<long>(d.pad);
            if (ih < 0 || ih >= static_cast<long>(d.h)) continue;
            const T* src = row + (n * d.ho + oh) * d.wo;
            T* out = img + ih * d.w;
            for (size_t ow = 0; ow < d.wo; ++ow) {
              const long iw = static_cast<long>(ow * d.stride + kj) - static_cast<long>(d.pad);
              if (iw >= 0 && iw < static_cast<long>(d.w)) out[iw] += src[ow];
            }
          }
        }
      }
    }
  }
}

}  // namespace detail

/// 2-d cross-correlation (no kernel flip) with per-output-channel bias.
/// input [N,C,H,W], weight [F,C,kh,kw], bias [F] -> [N,F,H',W'] with
/// H' = floor((H + 2*pad - kh)/stride) + 1.
template <typename T>
int conv2d(Tape<T>& tape, int x_id, int w_id, int b_id, size_t stride = 1, size_t pad = 0) {
  const Tensor<T>& x = tape.value(x_id);
  const Tensor<T>& w = tape.value(w_id);
  const Tensor<T>& b = tape.value(b_id);
  const auto d = detail::conv2d_dims(x.shape(), w.shape(), stride, pad);
  if (b.shape() != std::vector<size_t>{d.f})
    throw std::invalid_argument(detail::str("conv2d bias shape ", detail::shape_str(b.shape()),
                                            " does not match filter count ", d.f));

  const size_t ncols = d.cols();
  std::vector<T> cols(d.patch() * ncols);
  detail::im2col(d, x.data(), cols.data());

  std::vector<T> ymat(d.f * ncols, T(0));
  detail::gemm_accum(d.f, ncols, d.patch(), w.data(), cols.data(), ymat.data());

  Tensor<T> y({d.n, d.f, d.ho, d.wo});
  for (size_t n = 0; n < d.n; ++n)
    for (size_t f = 0; f < d.f; ++f) {
      const T* src = ymat.data() + f * ncols + n * d.ho * d.wo;
      T* dst = y.data() + (n * d.f + f) * d.ho * d.wo;
      const T bias = b[f];
      for (size_t s = 0; s < d.ho * d.wo; ++s) dst[s] = src[s] + bias;
    }

  auto grad = [tp = &tape, x_id, w_id, d, cols = std::move(cols)](
                  const Tensor<T>& up, std::vector<Tensor<T>>& gs) {
    const size_t ncols = d.cols(), patch = d.patch(), hw = d.ho * d.wo;
    // Gather upstream into both orientations once.
    std::vector<T> dy(d.f * ncols);       // [F, n*ho*wo]
    std::vector<T> dyt(ncols * d.f);      // [n*ho*wo, F]
    for (size_t n = 0; n < d.n; ++n)
      for (size_t f = 0; f < d.f; ++f) {
        const T* src = up.data() + (n * d.f + f) * hw;
        T* dst = dy.data() + f * ncols + n * hw;
        std::copy(src, src + hw, dst);
        for (size_t s = 0; s < hw; ++s) dyt[(n * hw + s) * d.f + f] = src[s];
      }

    // dW^T = cols * dy^T, then transpose back.
    std::vector<T> dwt(patch * d.f, T(0));
    detail::gemm_accum(patch, d.f, ncols, cols.data(), dyt.data(), dwt.data());
    Tensor<T> dw(tp->value(w_id).shape());
    detail::transpose(patch, d.f, dwt.data(), dw.data());

    Tensor<T> db({d.f});
    for (size_t f = 0; f < d.f; ++f) {
      T s = 0;
      const T* row = dy.data() + f * ncols;
      for (size_t j = 0; j < ncols; ++j) s += row[j];
      db[f] = s;
    }

    // dX = col2im(W^T * dy).
    std::vector<T> wt(patch * d.f);
    detail::transpose(d.f, patch, tp->value(w_id).data(), wt.data());
    std::vector<T> dcols(patch * ncols, T(0));
    detail::gemm_accum(patch, ncols, d.f, wt.data(), dy.data(), dcols.data());
    Tensor<T> dx(tp->value(x_id).shape());
    detail::col2im_add(d, dcols.data(), dx.data());

    gs[0] = std::move(dx);
    gs[1] = std::move(dw);
    gs[2] = std::move(db);
  };
  return tape.record("conv2d", std::move(y), {x_id, w_id, b_id}, std::move(grad));
}

/// k x k max pooling. Backward routes the upstream gradient to the first
/// (row-major) maximum of each window.
template <typename T>
int max_pool2d(Tape<T>& tape, int x_id, size_t k, size_t stride) {
  const Tensor<T>& x = tape.value(x_id);
  if (x.rank() != 4)
    throw std::invalid_argument(detail::str("max_pool2d expects 4-d input, got ",
                                            detail::shape_str(x.shape())));
  const size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (k < 1 || stride < 1) throw std::invalid_argument("max_pool2d k and stride must be >= 1");
  if (h < k || w < k)
    throw std::invalid_argument(detail::str("max_pool2d window ", k, "x", k,
                                            " larger than input ", h, "x", w));
  const size_t ho = (h - k) / stride + 1, wo = (w - k) / stride + 1;

  Tensor<T> y({n, c, ho, wo});
  std::vector<uint32_t> argmax(y.numel());
  size_t o = 0;
  for (size_t img = 0; img < n * c; ++img) {
    const T* plane = x.data() + img * h * w;
    for (size_t oh = 0; oh < ho; ++oh)
      for (size_t ow = 0; ow < wo; ++ow, ++o) {
        size_t best = (oh * stride) * w + ow * stride;
        T bv = plane[best];
        for (size_t ki = 0; ki < k; ++ki)
          for (size_t kj = 0; kj < k; ++kj) {
            size_t p = (oh * stride + ki) * w + ow * stride + kj;
            if (plane[p] > bv) {
              bv = plane[p];
              best = p;
            }
          }
        y[o] = bv;
        argmax[o] = static_cast<uint32_t>(img * h * w + best);
      }
  }

  auto grad = [tp = &tape, x_id, argmax = std::move(argmax)](const Tensor<T>& up,
                                                             std::vector<Tensor<T>>& gs) {
    Tensor<T> dx(tp->value(x_id).shape());
    for (size_t i = 0; i < argmax.size(); ++i) dx[argmax[i]] += up[i];
    gs[0] = std::move(dx);
  };
  return tape.record("max_pool2d", std::move(y), {x_id}, std::move(grad));
}

/// Affine layer: input [N,D] * weight [D,M] + bias [M] -> [N,M].
template <typename T>
int dense(Tape<T>& tape, int x_id, int w_id, int b_id) {
  const Tensor<T>& x = tape.value(x_id);
  const Tensor<T>& w = tape.value(w_id);
  const Tensor<T>& b = tape.value(b_id);
  if (x.rank() != 2 || w.rank() != 2 || x.dim(1) != w.dim(0))
    throw std::invalid_argument(detail::str("dense dimension mismatch: input ",
                                            detail::shape_str(x.shape()), " vs weight ",
                                            detail::shape_str(w.shape())));
  const size_t n = x.dim(0), dd = x.dim(1), m = w.dim(1);
  if (b.shape() != std::vector<size_t>{m})
    throw std::invalid_argument(detail::str("dense bias shape ", detail::shape_str(b.shape()),
                                            " does not match output width ", m));

  Tensor<T> y({n, m});
  for (size_t i = 0; i < n; ++i) std::copy(b.data(), b.data() + m, y.data() + i * m);
  detail::gemm_accum(n, m, dd, x.data(), w.data(), y.data());

  auto grad = [tp = &tape, x_id, w_id, n, dd, m](const Tensor<T>& up,
                                                 std::vector<Tensor<T>>& gs) {
    // dX = dY * W^T
    std::vector<T> wt(m * dd);
    detail::transpose(dd, m, tp->value(w_id).data(), wt.data());
    Tensor<T> dx({n, dd});
    detail::gemm_accum(n, dd, m, up.data(), wt.data(), dx.data());
    // dW = X^T * dY
    std::vector<T> xt(dd * n);
    detail::transpose(n, dd, tp->value(x_id).data(), xt.data());
    Tensor<T> dw({dd, m});
    detail::gemm_accum(dd, m, n, xt.data(), up.data(), dw.data());
    Tensor<T> db({m});
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < m; ++j) db[j] += up[i * m + j];
    gs[0] = std::move(dx);
    gs[1] = std::move(dw);
    gs[2] = std::move(db);
  };
  return tape.record("dense", std::move(y), {x_id, w_id, b_id}, std::move(grad));
}

/// Mean softmax cross-entropy over the batch, stabilized by max subtraction.
/// Backward is (softmax - onehot)/N.
template <typename T>
int softmax_cross_entropy(Tape<T>& tape, int logits_id, const std::vector<int>& labels) {
  const Tensor<T>& logits = tape.value(logits_id);
  if (logits.rank() != 2)
    throw std::invalid_argument(detail::str("softmax_cross_entropy expects 2-d logits, got ",
                                            detail::shape_str(logits.shape())));
  const size_t n = logits.dim(0), k = logits.dim(1);
  if (labels.size() != n)
    throw std::invalid_argument(detail::str("label count ", labels.size(),
                                            " does not match batch size ", n));
  for (size_t i = 0; i < n; ++i)
    if (labels[i] < 0 || static_cast<size_t>(labels[i]) >= k)
      throw std::invalid_argument(detail::str("label ", labels[i], " at row ", i,
                                              " out of range [0,", k, ")"));

  Tensor<T> probs({n, k});
  double loss = 0;
  for (size_t i = 0; i < n; ++i) {
    const T* row = logits.data() + i * k;
    T mx = row[0];
    for (size_t j = 1; j < k; ++j) mx = std::max(mx, row[j]);
    double z = 0;
    for (size_t j = 0; j < k; ++j) z += std::exp(static_cast<double>(row[j] - mx));
    double logz = std::log(z);
    for (size_t j = 0; j < k; ++j)
      probs[i * k + j] = static_cast<T>(std::exp(static_cast<double>(row[j] - mx) - logz));
    loss -= static_cast<double>(row[labels[i]] - mx) - logz;
  }
  Tensor<T> out = Tensor<T>::scalar(static_cast<T>(loss / n));

  auto grad = [probs = std::move(probs), labels, n, k](const Tensor<T>& up,
                                                       std::vector<Tensor<T>>& gs) {
    Tensor<T> dl({n, k});
    const T scale = up[0] / static_cast<T>(n);
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < k; ++j) {
        T g = probs[i * k + j];
        if (static_cast<size_t>(labels[i]) == j) g -= T(1);
        dl[i * k + j] = g * scale;
      }
    gs[0] = std::move(dl);
  };
  return tape.record("softmax_cross_entropy", std::move(out), {logits_id}, std::move(grad));
}

/// Collapses all but the leading (batch) dimension.
template <typename T>
int flatten(Tape<T>& tape, int x_id) {
  const Tensor<T>& x = tape.value(x_id);
  if (x.rank() < 1) throw std::invalid_argument("flatten expects rank >= 1");
  const size_t n = x.dim(0), rest = x.numel() / std::max<size_t>(n, 1);
  Tensor<T> y = x.reshaped({n, rest});
  auto grad = [tp = &tape, x_id](const Tensor<T>& up, std::vector<Tensor<T>>& gs) {
    gs[0] = up.reshaped(tp->value(x_id).shape());
  };
  return tape.record("flatten", std::move(y), {x_id}, std::move(grad));
}

template <typename T>
int add(Tape<T>& tape, int a_id, int b_id) {
  Tensor<T> y = tape.value(a_id);
  y.add_(tape.value(b_id));
  auto grad = [](const Tensor<T>& up, std::vector<Tensor<T>>& gs) {
    gs[0] = up;
    gs[1] = up;
  };
  return tape.record("add", std::move(y), {a_id, b_id}, std::move(grad));
}

template <typename T>
int scale(Tape<T>& tape, int x_id, T c) {
  Tensor<T> y = tape.value(x_id);
  y.scale_(c);
  auto grad = [c](const Tensor<T>& up, std::vector<Tensor<T>>& gs) {
    gs[0] = up;
    gs[0].scale_(c);
  };
  return tape.record("scale", std::move(y), {x_id}, std::move(grad));
}

template <typename T>
int sum(Tape<T>& tape, int x_id) {
  const Tensor<T>& x = tape.value(x_id);
  double s = 0;
  for (size_t i = 0; i < x.numel(); ++i) s += x[i];
  auto grad = [tp = &tape, x_id](const Tensor<T>& up, std::vector<Tensor<T>>& gs) {
    gs[0] = Tensor<T>::full(tp->value(x_id).shape(), up[0]);
  };
  return tape.record("sum", Tensor<T>::scalar(static_cast<T>(s)), {x_id}, std::move(grad));
}

}  // namespace coopnet
