// Copyright (c) 2026 the coopnet authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "coopnet/tensor.hpp"

namespace coopnet {

namespace detail {

// All multi-byte fields in the checkpoint container are little-endian.
inline void write_u32(std::ostream& os, uint32_t v) {
  uint8_t b[4] = {uint8_t(v), uint8_t(v >> 8), uint8_t(v >> 16), uint8_t(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline uint32_t read_u32(std::istream& is) {
  uint8_t b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw std::runtime_error("truncated checkpoint");
  return uint32_t(b[0]) | (uint32_t(b[1]) << 8) | (uint32_t(b[2]) << 16) | (uint32_t(b[3]) << 24);
}

template <typename T>
void write_scalars_le(std::ostream& os, const T* data, size_t n) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  // this library targets little-endian hosts; raw write is the LE encoding
  os.write(reinterpret_cast<const char*>(data), n * sizeof(T));
}

template <typename T>
void read_scalars_le(std::istream& is, T* data, size_t n) {
  is.read(reinterpret_cast<char*>(data), n * sizeof(T));
  if (!is) throw std::runtime_error("truncated checkpoint tensor data");
}

template <typename T>
constexpr uint8_t dtype_code() {
  return sizeof(T) == 4 ? 0 : 1;  // 0 = f32, 1 = f64
}

}  // namespace detail

constexpr char kCheckpointMagic[6] = {'C', 'I', 'N', 'W', '1', '\n'};

/// Persisted training state: named parameter tensors (optimizer velocity is
/// stored under the "velocity/" prefix) plus a key=value metadata block
/// carrying the architecture name, activation-slot encodings, plan
/// fingerprint, RNG state and the epoch/phase cursor.
template <typename T>
struct Checkpoint {
  uint32_t format_version = 1;
  std::string arch;
  std::vector<std::pair<std::string, std::string>> slots;  // site -> encoding, layer order
  std::map<std::string, Tensor<T>> tensors;
  std::string plan_fingerprint;
  std::string rng_state;
  int global_epoch = 0;  // epochs completed
  int phase = 1;

  std::map<std::string, Tensor<T>> network_params() const {
    std::map<std::string, Tensor<T>> out;
    for (const auto& [name, t] : tensors)
      if (name.rfind("velocity/", 0) != 0) out.emplace(name, t);
    return out;
  }

  std::map<std::string, Tensor<T>> velocity() const {
    std::map<std::string, Tensor<T>> out;
    for (const auto& [name, t] : tensors)
      if (name.rfind("velocity/", 0) == 0) out.emplace(name.substr(9), t);
    return out;
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write checkpoint " + path.string());
    os.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    detail::write_u32(os, static_cast<uint32_t>(tensors.size()));
    for (const auto& [name, t] : tensors) {
      detail::write_u32(os, static_cast<uint32_t>(name.size()));
      os.write(name.data(), name.size());
      const uint8_t dtype = detail::dtype_code<T>();
      os.write(reinterpret_cast<const char*>(&dtype), 1);
      detail::write_u32(os, static_cast<uint32_t>(t.rank()));
      for (size_t d : t.shape()) detail::write_u32(os, static_cast<uint32_t>(d));
      detail::write_scalars_le(os, t.data(), t.numel());
    }
    const std::string meta = metadata_text();
    detail::write_u32(os, static_cast<uint32_t>(meta.size()));
    os.write(meta.data(), meta.size());
    if (!os) throw std::runtime_error("failed writing checkpoint " + path.string());
  }

  static Checkpoint load(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open checkpoint " + path.string());
    char magic[6];
    is.read(magic, 6);
    if (!is || std::memcmp(magic, kCheckpointMagic, 6) != 0)
      throw std::runtime_error("bad checkpoint magic in " + path.string());
    Checkpoint ck;
    const uint32_t count = detail::read_u32(is);
    for (uint32_t i = 0; i < count; ++i) {
      const uint32_t name_len = detail::read_u32(is);
      std::string name(name_len, '\0');
      is.read(name.data(), name_len);
      uint8_t dtype = 0;
      is.read(reinterpret_cast<char*>(&dtype), 1);
      if (!is) throw std::runtime_error("truncated checkpoint " + path.string());
      if (dtype != detail::dtype_code<T>())
        throw std::runtime_error(detail::str("checkpoint tensor '", name, "' has dtype code ",
                                             int(dtype), ", expected ",
                                             int(detail::dtype_code<T>())));
      const uint32_t rank = detail::read_u32(is);
      std::vector<size_t> shape(rank);
      for (auto& d : shape) d = detail::read_u32(is);
      Tensor<T> t(shape);
      detail::read_scalars_le(is, t.data(), t.numel());
      ck.tensors.emplace(std::move(name), std::move(t));
    }
    const uint32_t meta_len = detail::read_u32(is);
    std::string meta(meta_len, '\0');
    is.read(meta.data(), meta_len);
    if (!is) throw std::runtime_error("truncated checkpoint metadata in " + path.string());
    ck.parse_metadata(meta);
    return ck;
  }

 private:
  std::string metadata_text() const {
    std::string s;
    s += "format_version=" + std::to_string(format_version) + "\n";
    s += "arch=" + arch + "\n";
    for (const auto& [site, enc] : slots) s += "slot." + site + "=" + enc + "\n";
    s += "plan_fingerprint=" + plan_fingerprint + "\n";
    s += "rng_state=" + rng_state + "\n";
    s += "global_epoch=" + std::to_string(global_epoch) + "\n";
    s += "phase=" + std::to_string(phase) + "\n";
    return s;
  }

  void parse_metadata(const std::string& meta) {
    size_t start = 0;
    while (start < meta.size()) {
      size_t end = meta.find('\n', start);
      if (end == std::string::npos) end = meta.size();
      const std::string line = meta.substr(start, end - start);
      start = end + 1;
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(0, eq), val = line.substr(eq + 1);
      if (key == "format_version")
        format_version = static_cast<uint32_t>(std::stoul(val));
      else if (key == "arch")
        arch = val;
      else if (key.rfind("slot.", 0) == 0)
        slots.emplace_back(key.substr(5), val);
      else if (key == "plan_fingerprint")
        plan_fingerprint = val;
      else if (key == "rng_state")
        rng_state = val;
      else if (key == "global_epoch")
        global_epoch = std::stoi(val);
      else if (key == "phase")
        phase = std::stoi(val);
    }
    if (format_version != 1)
      throw std::runtime_error(detail::str("unsupported checkpoint format version ",
                                           format_version));
  }
};

}  // namespace coopnet
