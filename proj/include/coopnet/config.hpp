// Copyright (c) 2026 the coopnet authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "coopnet/trainer.hpp"

namespace coopnet {

/// Configuration problem (unknown key, unparsable value, bad combination).
/// The CLI maps these to exit code 2, runtime failures to 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Line-based `key = value` configuration with `#` comments and dotted
/// keys. Every key has a default; unknown keys are hard errors. The fully
/// resolved config is echoed into the run directory before training.
class RunConfig {
 public:
  RunConfig() : values_(defaults()) {}

  static const std::map<std::string, std::string>& defaults() {
    static const std::map<std::string, std::string> d = {
        {"mode", "mix"},
        {"arch", "lenet-mnist"},
        {"activation", "relu"},
        {"mixture", "mix(relu,prelu:0.25,elu:1,softplus;equal)"},
        {"dataset", "mnist"},
        {"data.dir", ""},
        {"data.fraction", "1"},
        {"data.augment", "auto"},
        {"phase1.fraction", "0.2"},
        {"phase1.lr.base", "0.1"},
        {"phase1.lr.factor", "5"},
        {"phase1.lr.step_every", "1"},
        {"phase2.epochs", "10"},
        {"phase2.lr.base", "0.1"},
        {"phase2.lr.factor", "5"},
        {"phase2.lr.step_every", "4"},
        {"lr.override", ""},
        {"sgd.momentum", "0.9"},
        {"sgd.weight_decay", "0.0001"},
        {"batch_size", "64"},
        {"eval.batch", "256"},
        {"init", "kaiming-normal"},
        {"seed", "1"},
        {"seeds", "1,2,3"},
        {"out", "runs"},
        {"threads", "1"},
        {"sweep.fractions", "0.1,0.2,0.3,0.4"},
        {"overfit.fraction", "0.25"},
        {"xor.n", "2000"},
        {"xor.sigma", "0.2"},
        {"synth.train", "60000"},
        {"synth.test", "10000"},
    };
    return d;
  }

  void set(const std::string& key, const std::string& value) {
    if (!values_.count(key)) throw ConfigError("unknown config key '" + key + "'");
    values_[key] = value;
  }

  /// Accepts a `key=value` command-line override.
  void set_arg(const std::string& arg) {
    const auto eq = arg.find('=');
    if (eq == std::string::npos)
      throw ConfigError("override '" + arg + "' is not of the form key=value");
    set(trim(arg.substr(0, eq)), trim(arg.substr(eq + 1)));
  }

  void load_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path.string());
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      if (auto h = line.find('#'); h != std::string::npos) line = line.substr(0, h);
      const std::string t = trim(line);
      if (t.empty()) continue;
      const auto eq = t.find('=');
      if (eq == std::string::npos)
        throw ConfigError(detail::str("bad config line ", lineno, " in ", path.string(),
                                      ": '", t, "'"));
      set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
  }

  const std::string& get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    return it->second;
  }

  int get_int(const std::string& key) const {
    return static_cast<int>(parse_ll(key));
  }

  uint64_t get_u64(const std::string& key) const {
    return static_cast<uint64_t>(parse_ll(key));
  }

  double get_double(const std::string& key) const {
    const std::string& v = get(key);
    try {
      size_t used = 0;
      double d = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "' has non-numeric value '" + v + "'");
    }
  }

  std::vector<double> get_double_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& tok : split_list(get(key))) {
      try {
        out.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' has non-numeric entry '" + tok + "'");
      }
    }
    return out;
  }

  std::vector<uint64_t> get_u64_list(const std::string& key) const {
    std::vector<uint64_t> out;
    for (const auto& tok : split_list(get(key))) {
      try {
        out.push_back(std::stoull(tok));
      } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' has non-integer entry '" + tok + "'");
      }
    }
    return out;
  }

  /// Dataset root: data.dir if set, else $COOPNET_DATA, else "data".
  std::filesystem::path data_dir() const {
    const std::string& d = get("data.dir");
    if (!d.empty()) return d;
    if (const char* env = std::getenv("COOPNET_DATA")) return env;
    return "data";
  }

  /// All keys in sorted order, one `key = value` line each.
  std::string resolved_text() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
  }

  TrainPlan to_plan() const {
    TrainPlan plan;
    wrap("mode", [&] { plan.mode = parse_mode(get("mode")); });
    wrap("arch", [&] { plan.arch = get("arch"); });
    wrap("activation", [&] { plan.phase2_activation = parse_activation(get("activation")); });
    wrap("mixture", [&] { plan.phase1_mixture = parse_mixture(get("mixture")); });
    plan.phase2_epochs = get_int("phase2.epochs");
    plan.phase1_fraction = get_double("phase1.fraction");
    plan.phase1_schedule = {get_double("phase1.lr.base"), get_double("phase1.lr.factor"),
                            get_int("phase1.lr.step_every")};
    plan.phase2_schedule = {get_double("phase2.lr.base"), get_double("phase2.lr.factor"),
                            get_int("phase2.lr.step_every")};
    if (!get("lr.override").empty()) plan.lr_override = get_double_list("lr.override");
    plan.sgd = {get_double("sgd.momentum"), get_double("sgd.weight_decay")};
    plan.batch_size = get_int("batch_size");
    plan.eval_batch = get_int("eval.batch");
    plan.seed = get_u64("seed");
    plan.dataset_fraction = get_double("data.fraction");
    wrap("init", [&] { plan.init = parse_init_scheme(get("init")); });

    const std::string& aug = get("data.augment");
    if (aug == "on")
      plan.augment_train = true;
    else if (aug == "off")
      plan.augment_train = false;
    else if (aug == "auto")
      plan.augment_train = get("dataset") == "cifar10";
    else
      throw ConfigError("config key 'data.augment' must be auto/on/off, got '" + aug + "'");

    try {
      plan.validate();
    } catch (const std::exception& e) {
      throw ConfigError(std::string("invalid training plan: ") + e.what());
    }
    return plan;
  }

 private:
  static std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    size_t e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  }

  static std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start < s.size()) {
      auto p = s.find(',', start);
      if (p == std::string::npos) p = s.size();
      const std::string tok = trim(s.substr(start, p - start));
      if (!tok.empty()) out.push_back(tok);
      start = p + 1;
    }
    return out;
  }

  long long parse_ll(const std::string& key) const {
    const std::string& v = get(key);
    try {
      size_t used = 0;
      long long n = std::stoll(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return n;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "' has non-integer value '" + v + "'");
    }
  }

  template <typename F>
  static void wrap(const char* key, F&& f) {
    try {
      f();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(detail::str("config key '", key, "': ", e.what()));
    }
  }

  std::map<std::string, std::string> values_;
};

}  // namespace coopnet
