// Copyright (c) 2026 the coopnet authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "coopnet/tensor.hpp"

namespace coopnet {

/// One row of per-epoch statistics. `epoch` counts within the phase (the
/// counter restarts at the phase boundary); accuracies are percentages.
struct MetricsRecord {
  int epoch = 0;
  int phase = 1;
  double lr = 0;
  double train_loss = 0;
  double train_acc = 0;
  double test_loss = 0;
  double test_acc = 0;
};

inline const char* kMetricsHeader = "epoch,phase,lr,train_loss,train_acc,test_loss,test_acc";

inline std::string metrics_csv_text(const std::vector<MetricsRecord>& records) {
  std::string out = std::string(kMetricsHeader) + "\n";
  char buf[256];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.6f,%.6f,%.6f,%.6f,%.6f\n", r.epoch, r.phase, r.lr,
                  r.train_loss, r.train_acc, r.test_loss, r.test_acc);
    out += buf;
  }
  return out;
}

inline void write_metrics_csv(const std::filesystem::path& path,
                              const std::vector<MetricsRecord>& records) {
  std::ofstream os(path, std::ios::binary);  // binary keeps LF endings everywhere
  if (!os) throw std::runtime_error("cannot write metrics file " + path.string());
  os << metrics_csv_text(records);
}

inline std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open metrics file " + path.string());
  std::string line;
  if (!std::getline(is, line) || line != kMetricsHeader)
    throw std::runtime_error("bad metrics header in " + path.string() + ": '" + line + "'");
  std::vector<MetricsRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    MetricsRecord r;
    if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf,%lf,%lf,%lf", &r.epoch, &r.phase, &r.lr,
                    &r.train_loss, &r.train_acc, &r.test_loss, &r.test_acc) != 7)
      throw std::runtime_error("bad metrics row in " + path.string() + ": '" + line + "'");
    out.push_back(r);
  }
  return out;
}

}  // namespace coopnet
