// Copyright (c) 2026 the coopnet authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <zlib.h>

#include "coopnet/tensor.hpp"

namespace coopnet {

/// Labeled image dataset with train/test splits. Images are stored
/// per-sample as [C,H,W] tensors, already normalized.
struct DatasetPair {
  std::vector<Tensor<float>> train_images;
  std::vector<int> train_labels;
  std::vector<Tensor<float>> test_images;
  std::vector<int> test_labels;
  size_t num_classes = 0;
  std::vector<float> norm_mean;  // per channel; empty when unnormalized
  std::vector<float> norm_std;

  const std::vector<size_t>& image_shape() const {
    if (train_images.empty() && test_images.empty())
      throw std::runtime_error("dataset is empty");
    return train_images.empty() ? test_images[0].shape() : train_images[0].shape();
  }
};

namespace detail {

inline std::vector<uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return bytes;
}

inline bool is_gzip(const std::vector<uint8_t>& b) {
  return b.size() >= 2 && b[0] == 0x1f && b[1] == 0x8b;
}

inline std::vector<uint8_t> gunzip(const std::vector<uint8_t>& in, const std::string& name) {
  z_stream zs{};
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK)
    throw std::runtime_error("zlib init failed for " + name);
  std::vector<uint8_t> out;
  out.reserve(in.size() * 4);
  std::array<uint8_t, 1 << 16> buf;
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  int rc = Z_OK;
  do {
    zs.next_out = buf.data();
    zs.avail_out = static_cast<uInt>(buf.size());
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw std::runtime_error("corrupt gzip stream in " + name);
    }
    out.insert(out.end(), buf.data(), buf.data() + (buf.size() - zs.avail_out));
  } while (rc != Z_STREAM_END);
  inflateEnd(&zs);
  return out;
}

inline uint32_t read_be32(const uint8_t* p) {
  return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) | uint32_t(p[3]);
}

inline void write_be32(std::ostream& os, uint32_t v) {
  uint8_t b[4] = {uint8_t(v >> 24), uint8_t(v >> 16), uint8_t(v >> 8), uint8_t(v)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

// Resolves "name" or "name.gz" under dir, whichever exists.
inline std::filesystem::path idx_path(const std::filesystem::path& dir, const std::string& name) {
  if (std::filesystem::exists(dir / name)) return dir / name;
  if (std::filesystem::exists(dir / (name + ".gz"))) return dir / (name + ".gz");
  throw std::runtime_error("missing dataset file " + (dir / name).string() + "[.gz]");
}

constexpr uint32_t kIdxImageMagic = 0x00000803;  // 2051
constexpr uint32_t kIdxLabelMagic = 0x00000801;  // 2049

struct IdxImages {
  size_t count = 0, rows = 0, cols = 0;
  std::vector<uint8_t> pixels;  // count*rows*cols
};

inline IdxImages parse_idx_images(std::vector<uint8_t> bytes, const std::string& name) {
  if (is_gzip(bytes)) bytes = gunzip(bytes, name);
  if (bytes.size() < 16) throw std::runtime_error("truncated IDX image file " + name);
  const uint32_t magic = read_be32(bytes.data());
  if (magic != kIdxImageMagic)
    throw std::runtime_error(str("bad magic in ", name, ": expected 0x",
                                 std::hex, kIdxImageMagic, ", got 0x", magic));
  IdxImages out;
  out.count = read_be32(bytes.data() + 4);
  out.rows = read_be32(bytes.data() + 8);
  out.cols = read_be32(bytes.data() + 12);
  const size_t need = 16 + out.count * out.rows * out.cols;
  if (bytes.size() < need)
    throw std::runtime_error(str("truncated IDX image file ", name, ": need ", need,
                                 " bytes, have ", bytes.size()));
  out.pixels.assign(bytes.begin() + 16, bytes.begin() + need);
  return out;
}

inline std::vector<uint8_t> parse_idx_labels(std::vector<uint8_t> bytes,
                                             const std::string& name) {
  if (is_gzip(bytes)) bytes = gunzip(bytes, name);
  if (bytes.size() < 8) throw std::runtime_error("truncated IDX label file " + name);
  const uint32_t magic = read_be32(bytes.data());
  if (magic != kIdxLabelMagic)
    throw std::runtime_error(str("bad magic in ", name, ": expected 0x",
                                 std::hex, kIdxLabelMagic, ", got 0x", magic));
  const size_t count = read_be32(bytes.data() + 4);
  if (bytes.size() < 8 + count)
    throw std::runtime_error(str("truncated IDX label file ", name, ": need ", 8 + count,
                                 " bytes, have ", bytes.size()));
  return std::vector<uint8_t>(bytes.begin() + 8, bytes.begin() + 8 + count);
}

}  // namespace detail

/// Maps raw byte images to normalized float tensors: x/255, then
/// (x - mean_c)/std_c per channel.
inline Tensor<float> normalize_image(const uint8_t* pixels, const std::vector<size_t>& shape,
                                     const std::vector<float>& mean,
                                     const std::vector<float>& std) {
  Tensor<float> t(shape);
  const size_t c = shape[0], plane = t.numel() / c;
  for (size_t ch = 0; ch < c; ++ch)
    for (size_t i = 0; i < plane; ++i) {
      float v = static_cast<float>(pixels[ch * plane + i]) / 255.0f;
      t[ch * plane + i] = (v - mean[ch]) / std[ch];
    }
  return t;
}

inline Tensor<float> denormalize_image(const Tensor<float>& t, const std::vector<float>& mean,
                                       const std::vector<float>& std) {
  Tensor<float> out(t.shape());
  const size_t c = t.dim(0), plane = t.numel() / c;
  for (size_t ch = 0; ch < c; ++ch)
    for (size_t i = 0; i < plane; ++i)
      out[ch * plane + i] = t[ch * plane + i] * std[ch] + mean[ch];
  return out;
}

inline const std::vector<float>& mnist_mean() {
  static const std::vector<float> m{0.1307f};
  return m;
}
inline const std::vector<float>& mnist_std() {
  static const std::vector<float> s{0.3081f};
  return s;
}
inline const std::vector<float>& cifar10_mean() {
  static const std::vector<float> m{0.4914f, 0.4822f, 0.4465f};
  return m;
}
inline const std::vector<float>& cifar10_std() {
  static const std::vector<float> s{0.2470f, 0.2435f, 0.2616f};
  return s;
}

/// Loads the four MNIST IDX files (plain or gzipped) from `dir`. Pixels are
/// scaled to [0,1] and normalized with the standard MNIST statistics.
inline DatasetPair load_mnist(const std::filesystem::path& dir) {
  DatasetPair ds;
  ds.num_classes = 10;
  ds.norm_mean = mnist_mean();
  ds.norm_std = mnist_std();
  auto load_split = [&](const std::string& img_name, const std::string& lbl_name,
                        std::vector<Tensor<float>>& images, std::vector<int>& labels) {
    auto img_path = detail::idx_path(dir, img_name);
    auto lbl_path = detail::idx_path(dir, lbl_name);
    auto imgs = detail::parse_idx_images(detail::read_file_bytes(img_path), img_path.string());
    auto lbls = detail::parse_idx_labels(detail::read_file_bytes(lbl_path), lbl_path.string());
    if (imgs.count != lbls.size())
      throw std::runtime_error(detail::str("image/label count mismatch: ", imgs.count, " vs ",
                                           lbls.size(), " in ", dir.string()));
    images.reserve(imgs.count);
    labels.reserve(imgs.count);
    const std::vector<size_t> shape{1, imgs.rows, imgs.cols};
    for (size_t i = 0; i < imgs.count; ++i) {
      images.push_back(normalize_image(imgs.pixels.data() + i * imgs.rows * imgs.cols, shape,
                                       ds.norm_mean, ds.norm_std));
      labels.push_back(lbls[i]);
    }
  };
  load_split("train-images-idx3-ubyte", "train-labels-idx1-ubyte", ds.train_images,
             ds.train_labels);
  load_split("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte", ds.test_images,
             ds.test_labels);
  return ds;
}

/// Writes a dataset of raw byte images as the four standard MNIST-format
/// IDX files (images magic 2051, labels magic 2049, big-endian).
inline void write_idx_dataset(const std::filesystem::path& dir,
                              const std::vector<std::vector<uint8_t>>& train_images,
                              const std::vector<uint8_t>& train_labels,
                              const std::vector<std::vector<uint8_t>>& test_images,
                              const std::vector<uint8_t>& test_labels, size_t rows,
                              size_t cols) {
  std::filesystem::create_directories(dir);
  auto write_split = [&](const std::string& img_name, const std::string& lbl_name,
                         const std::vector<std::vector<uint8_t>>& images,
                         const std::vector<uint8_t>& labels) {
    std::ofstream img(dir / img_name, std::ios::binary);
    detail::write_be32(img, detail::kIdxImageMagic);
    detail::write_be32(img, static_cast<uint32_t>(images.size()));
    detail::write_be32(img, static_cast<uint32_t>(rows));
    detail::write_be32(img, static_cast<uint32_t>(cols));
    for (const auto& im : images)
      img.write(reinterpret_cast<const char*>(im.data()), im.size());
    std::ofstream lbl(dir / lbl_name, std::ios::binary);
    detail::write_be32(lbl, detail::kIdxLabelMagic);
    detail::write_be32(lbl, static_cast<uint32_t>(labels.size()));
    lbl.write(reinterpret_cast<const char*>(labels.data()), labels.size());
    if (!img || !lbl) throw std::runtime_error("failed writing IDX files to " + dir.string());
  };
  write_split("train-images-idx3-ubyte", "train-labels-idx1-ubyte", train_images, train_labels);
  write_split("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte", test_images, test_labels);
}

/// Loads the CIFAR-10 binary batches (5 train + 1 test). Each record is
/// 3073 bytes: one label byte then 3x1024 channel-planar pixels.
inline DatasetPair load_cifar10(const std::filesystem::path& dir) {
  DatasetPair ds;
  ds.num_classes = 10;
  ds.norm_mean = cifar10_mean();
  ds.norm_std = cifar10_std();
  constexpr size_t kRecord = 3073;
  auto load_file = [&](const std::filesystem::path& path, std::vector<Tensor<float>>& images,
                       std::vector<int>& labels) {
    auto bytes = detail::read_file_bytes(path);
    if (bytes.empty() || bytes.size() % kRecord != 0)
      throw std::runtime_error(detail::str("bad CIFAR-10 file ", path.string(), ": length ",
                                           bytes.size(), " is not a multiple of ", kRecord));
    const std::vector<size_t> shape{3, 32, 32};
    for (size_t off = 0; off < bytes.size(); off += kRecord) {
      labels.push_back(bytes[off]);
      images.push_back(normalize_image(bytes.data() + off + 1, shape, ds.norm_mean, ds.norm_std));
    }
  };
  for (int b = 1; b <= 5; ++b)
    load_file(dir / ("data_batch_" + std::to_string(b) + ".bin"), ds.train_images,
              ds.train_labels);
  load_file(dir / "test_batch.bin", ds.test_images, ds.test_labels);
  return ds;
}

/// Zero-pads `pad` pixels per side, crops the same-size window at offset
/// (oy,ox) into the padded image, optionally mirrors horizontally first.
inline Tensor<float> crop_flip(const Tensor<float>& image, size_t oy, size_t ox, bool flip,
                               size_t pad = 4) {
  if (image.rank() != 3)
    throw std::invalid_argument("crop_flip expects a [C,H,W] image");
  const size_t c = image.dim(0), h = image.dim(1), w = image.dim(2);
  Tensor<float> out(image.shape());
  for (size_t ch = 0; ch < c; ++ch)
    for (size_t y = 0; y < h; ++y)
      for (size_t x = 0; x < w; ++x) {
        const long sy = static_cast<long>(y + oy) - static_cast<long>(pad);
        long sx = static_cast<long>(x + ox) - static_cast<long>(pad);
        if (flip && sx >= 0 && sx < static_cast<long>(w)) sx = static_cast<long>(w) - 1 - sx;
        float v = 0.0f;
        if (sy >= 0 && sy < static_cast<long>(h) && sx >= 0 && sx < static_cast<long>(w))
          v = image[(ch * h + sy) * w + sx];
        out[(ch * h + y) * w + x] = v;
      }
  return out;
}

/// CIFAR-style augmentation: 4-pixel zero padding, random crop back to the
/// original size, horizontal flip with probability 1/2. Shape and label are
/// unchanged.
inline Tensor<float> augment(const Tensor<float>& image, Rng& rng) {
  const size_t pad = 4;
  const size_t oy = rng.below(2 * pad + 1), ox = rng.below(2 * pad + 1);
  const bool flip = rng.coin();
  return crop_flip(image, oy, ox, flip, pad);
}

/// Stratified train subsample: floor(fraction*n_c) samples per class,
/// deterministic under `seed`, original order preserved. The test split is
/// untouched.
inline DatasetPair subset(const DatasetPair& data, double fraction, uint64_t seed) {
  if (fraction <= 0.0 || fraction > 1.0)
    throw std::invalid_argument(detail::str("subset fraction ", fraction, " not in (0,1]"));
  std::vector<std::vector<size_t>> per_class(data.num_classes);
  for (size_t i = 0; i < data.train_labels.size(); ++i) {
    const int lbl = data.train_labels[i];
    if (lbl < 0 || static_cast<size_t>(lbl) >= data.num_classes)
      throw std::invalid_argument(detail::str("label ", lbl, " out of range [0,",
                                              data.num_classes, ")"));
    per_class[lbl].push_back(i);
  }

  std::vector<size_t> chosen;
  for (size_t c = 0; c < per_class.size(); ++c) {
    auto& idx = per_class[c];
    const size_t keep = static_cast<size_t>(fraction * static_cast<double>(idx.size()));
    if (!idx.empty() && keep == 0)
      throw std::invalid_argument(detail::str("subset fraction ", fraction,
                                              " leaves class ", c, " empty"));
    Rng rng(detail::mix_seed(seed, 0xD5 + c));
    rng.shuffle(idx);
    chosen.insert(chosen.end(), idx.begin(), idx.begin() + keep);
  }
  std::sort(chosen.begin(), chosen.end());

  DatasetPair out;
  out.num_classes = data.num_classes;
  out.norm_mean = data.norm_mean;
  out.norm_std = data.norm_std;
  out.test_images = data.test_images;
  out.test_labels = data.test_labels;
  out.train_images.reserve(chosen.size());
  out.train_labels.reserve(chosen.size());
  for (size_t i : chosen) {
    out.train_images.push_back(data.train_images[i]);
    out.train_labels.push_back(data.train_labels[i]);
  }
  return out;
}

/// Two-class XOR blobs: Gaussian clouds at (+-1,+-1) with the sign-product
/// labeling, rendered as [1,1,2] coordinate tensors. Linearly inseparable
/// by construction; n points per split, blobs visited round-robin.
inline DatasetPair make_synthetic_xor(size_t n, uint64_t seed, double sigma = 0.2) {
  if (n < 4) throw std::invalid_argument("xor dataset needs n >= 4");
  static const double cx[4] = {1, -1, 1, -1};
  static const double cy[4] = {1, -1, -1, 1};
  DatasetPair ds;
  ds.num_classes = 2;
  auto fill = [&](size_t count, uint64_t s, std::vector<Tensor<float>>& images,
                  std::vector<int>& labels) {
    Rng rng(s);
    for (size_t i = 0; i < count; ++i) {
      const size_t blob = i % 4;
      const double x = cx[blob] + sigma * rng.normal();
      const double y = cy[blob] + sigma * rng.normal();
      images.push_back(Tensor<float>({1, 1, 2}, {static_cast<float>(x), static_cast<float>(y)}));
      labels.push_back(blob < 2 ? 1 : 0);  // sign-product: x*y > 0 -> class 1
    }
  };
  fill(n, detail::mix_seed(seed, 0xA0), ds.train_images, ds.train_labels);
  fill(n, detail::mix_seed(seed, 0xA1), ds.test_images, ds.test_labels);
  return ds;
}

namespace detail {

// Stroke endpoints per digit glyph on a unit box, y growing downward.
// Rendering these with random affine jitter gives a 10-class handwriting
// stand-in in the MNIST container format.
inline const std::vector<std::vector<std::array<double, 4>>>& digit_strokes() {
  static const std::vector<std::vector<std::array<double, 4>>> strokes = {
      // 0
      {{0.15, 0.15, 0.85, 0.15}, {0.85, 0.15, 0.85, 0.85}, {0.85, 0.85, 0.15, 0.85},
       {0.15, 0.85, 0.15, 0.15}},
      // 1
      {{0.3, 0.3, 0.55, 0.1}, {0.55, 0.1, 0.55, 0.9}},
      // 2
      {{0.15, 0.25, 0.5, 0.1}, {0.5, 0.1, 0.85, 0.25}, {0.85, 0.25, 0.15, 0.9},
       {0.15, 0.9, 0.85, 0.9}},
      // 3
      {{0.15, 0.1, 0.8, 0.1}, {0.8, 0.1, 0.45, 0.45}, {0.45, 0.45, 0.85, 0.7},
       {0.85, 0.7, 0.5, 0.9}, {0.5, 0.9, 0.15, 0.8}},
      // 4
      {{0.7, 0.9, 0.7, 0.1}, {0.7, 0.1, 0.15, 0.65}, {0.15, 0.65, 0.9, 0.65}},
      // 5
      {{0.85, 0.1, 0.2, 0.1}, {0.2, 0.1, 0.2, 0.45}, {0.2, 0.45, 0.7, 0.45},
       {0.7, 0.45, 0.85, 0.7}, {0.85, 0.7, 0.6, 0.9}, {0.6, 0.9, 0.15, 0.85}},
      // 6
      {{0.8, 0.1, 0.3, 0.4}, {0.3, 0.4, 0.15, 0.75}, {0.15, 0.75, 0.5, 0.9},
       {0.5, 0.9, 0.85, 0.75}, {0.85, 0.75, 0.7, 0.5}, {0.7, 0.5, 0.2, 0.6}},
      // 7
      {{0.15, 0.1, 0.85, 0.1}, {0.85, 0.1, 0.4, 0.9}},
      // 8
      {{0.5, 0.1, 0.8, 0.3}, {0.8, 0.3, 0.2, 0.65}, {0.2, 0.65, 0.5, 0.9},
       {0.5, 0.9, 0.8, 0.65}, {0.8, 0.65, 0.2, 0.3}, {0.2, 0.3, 0.5, 0.1}},
      // 9
      {{0.8, 0.45, 0.35, 0.55}, {0.35, 0.55, 0.2, 0.3}, {0.2, 0.3, 0.5, 0.1},
       {0.5, 0.1, 0.8, 0.3}, {0.8, 0.3, 0.8, 0.45}, {0.8, 0.45, 0.6, 0.9}}};
  return strokes;
}

inline double segment_distance(double px, double py, const std::array<double, 4>& s) {
  const double vx = s[2] - s[0], vy = s[3] - s[1];
  const double wx = px - s[0], wy = py - s[1];
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? (wx * vx + wy * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = px - (s[0] + t * vx), dy = py - (s[1] + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

// Renders one jittered digit into a rows*cols byte image.
inline std::vector<uint8_t> render_digit(int digit, Rng& rng, size_t rows, size_t cols) {
  const auto& strokes = digit_strokes()[digit];

  const double rot = rng.normal(0.0, 0.10);
  const double scale_x = std::exp(rng.normal(0.0, 0.08));
  const double scale_y = std::exp(rng.normal(0.0, 0.08));
  const double shear = rng.normal(0.0, 0.08);
  const double tx = rng.normal(0.0, 1.2);
  const double ty = rng.normal(0.0, 1.2);
  const double thick = rng.uniform(0.85, 1.5);

  // glyph box -> ~20x20 area centered in the image
  const double box = 19.0;
  const double cxo = (cols - 1) / 2.0 + tx, cyo = (rows - 1) / 2.0 + ty;
  const double cr = std::cos(rot), sr = std::sin(rot);
  auto map_pt = [&](double gx, double gy, double& ix, double& iy) {
    double x = (gx - 0.5) * box * scale_x;
    double y = (gy - 0.5) * box * scale_y;
    x += shear * y;
    ix = cr * x - sr * y + cxo;
    iy = sr * x + cr * y + cyo;
  };

  std::vector<std::array<double, 4>> segs;
  segs.reserve(strokes.size());
  // jitter stroke joints coherently so connected strokes stay connected
  std::vector<std::array<double, 2>> jitter(strokes.size() + 1);
  for (auto& j : jitter) j = {rng.normal(0.0, 0.028), rng.normal(0.0, 0.028)};
  for (size_t i = 0; i < strokes.size(); ++i) {
    const auto& s = strokes[i];
    double x0, y0, x1, y1;
    map_pt(s[0] + jitter[i][0], s[1] + jitter[i][1], x0, y0);
    map_pt(s[2] + jitter[i + 1][0], s[3] + jitter[i + 1][1], x1, y1);
    segs.push_back({x0, y0, x1, y1});
  }

  std::vector<uint8_t> img(rows * cols, 0);
  for (size_t y = 0; y < rows; ++y)
    for (size_t x = 0; x < cols; ++x) {
      double d = 1e9;
      for (const auto& s : segs) d = std::min(d, segment_distance(x, y, s));
      double v = std::clamp(0.5 + (thick - d) / 0.9, 0.0, 1.0);
      v += rng.normal(0.0, 0.03);
      img[y * cols + x] = static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
    }
  return img;
}

}  // namespace detail

/// Deterministic procedurally rendered digit dataset in the MNIST
/// container format (28x28 grayscale, labels 0-9, round-robin balanced).
/// Stands in for MNIST when the real files are not available.
struct SyntheticDigits {
  std::vector<std::vector<uint8_t>> train_images;
  std::vector<uint8_t> train_labels;
  std::vector<std::vector<uint8_t>> test_images;
  std::vector<uint8_t> test_labels;
};

inline SyntheticDigits make_synthetic_digits(size_t train_n, size_t test_n, uint64_t seed) {
  SyntheticDigits out;
  auto fill = [&](size_t n, uint64_t split, std::vector<std::vector<uint8_t>>& images,
                  std::vector<uint8_t>& labels) {
    images.reserve(n);
    labels.reserve(n);
    for (size_t i = 0; i < n; ++i) {
      const int digit = static_cast<int>(i % 10);
      Rng rng(detail::mix_seed(seed, detail::mix_seed(split, i)));
      images.push_back(detail::render_digit(digit, rng, 28, 28));
      labels.push_back(static_cast<uint8_t>(digit));
    }
  };
  fill(train_n, 0xB0, out.train_images, out.train_labels);
  fill(test_n, 0xB1, out.test_images, out.test_labels);
  return out;
}

/// Renders the synthetic digit dataset into `dir` as standard IDX files
/// (no-op if they are already there), so it is loadable with load_mnist.
inline void ensure_synthetic_digits_idx(const std::filesystem::path& dir, size_t train_n,
                                        size_t test_n, uint64_t seed) {
  namespace fs = std::filesystem;
  const char* names[4] = {"train-images-idx3-ubyte", "train-labels-idx1-ubyte",
                          "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"};
  bool all = true;
  for (const char* n : names)
    if (!fs::exists(dir / n)) all = false;
  if (all) return;
  SyntheticDigits d = make_synthetic_digits(train_n, test_n, seed);
  write_idx_dataset(dir, d.train_images, d.train_labels, d.test_images, d.test_labels, 28, 28);
}

}  // namespace coopnet
