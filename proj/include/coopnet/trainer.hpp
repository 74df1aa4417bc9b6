// Copyright (c) 2026 the coopnet authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "coopnet/checkpoint.hpp"
#include "coopnet/data.hpp"
#include "coopnet/metrics.hpp"
#include "coopnet/network.hpp"
#include "coopnet/optim.hpp"

namespace coopnet {

/// Training regimes:
///  - Baseline:     single activation, phase-2 epochs only.
///  - BaselineTpt:  the two-phase schedule with the single activation in
///                  both phases (controls for the extra epochs).
///  - MixtureFull:  the mixture for the entire run, never swapped out.
///  - Mix:          mixture in phase 1, swapped to the single activation
///                  for phase 2 (the cooperative-initialization scheme).
///  - Wnla:         identity in every slot, both phases (collapse control).
enum class RunMode { Baseline, BaselineTpt, MixtureFull, Mix, Wnla };

inline std::string mode_name(RunMode m) {
  switch (m) {
    case RunMode::Baseline: return "baseline";
    case RunMode::BaselineTpt: return "baseline-tpt";
    case RunMode::MixtureFull: return "mixture-full";
    case RunMode::Mix: return "mix";
    case RunMode::Wnla: return "wnla";
  }
  return "?";
}

inline RunMode parse_mode(const std::string& s) {
  if (s == "baseline") return RunMode::Baseline;
  if (s == "baseline-tpt") return RunMode::BaselineTpt;
  if (s == "mixture-full") return RunMode::MixtureFull;
  if (s == "mix") return RunMode::Mix;
  if (s == "wnla") return RunMode::Wnla;
  throw std::invalid_argument("unknown mode '" + s + "'");
}

/// Complete description of one training run.
struct TrainPlan {
  RunMode mode = RunMode::Mix;
  std::string arch = "lenet-mnist";
  ActivationSpec phase2_activation = ActivationSpec::relu();
  MixedActivation phase1_mixture = MixedActivation::default4();
  int phase2_epochs = 10;
  double phase1_fraction = 0.20;
  StepSchedule phase1_schedule{0.1, 5.0, 1};
  StepSchedule phase2_schedule{0.1, 5.0, 4};
  std::vector<double> lr_override;  // optional explicit lr per global epoch
  SgdConfig sgd{0.9, 1e-4};
  int batch_size = 64;
  int eval_batch = 256;
  uint64_t seed = 1;
  double dataset_fraction = 1.0;
  bool augment_train = false;
  InitScheme init = InitScheme::KaimingNormal;

  int phase1_epochs() const {
    if (mode == RunMode::Baseline) return 0;
    return static_cast<int>(std::lround(phase1_fraction * phase2_epochs));
  }
  int total_epochs() const { return phase1_epochs() + phase2_epochs; }

  void validate() const {
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (eval_batch < 1) throw std::invalid_argument("eval batch must be >= 1");
    if (phase2_epochs < 0) throw std::invalid_argument("phase2 epochs must be >= 0");
    if (phase1_fraction < 0 || phase1_fraction > 1)
      throw std::invalid_argument(detail::str("phase1 fraction ", phase1_fraction,
                                              " not in [0,1]"));
    if (dataset_fraction <= 0 || dataset_fraction > 1)
      throw std::invalid_argument(detail::str("dataset fraction ", dataset_fraction,
                                              " not in (0,1]"));
    if (sgd.momentum < 0 || sgd.momentum >= 1)
      throw std::invalid_argument(detail::str("momentum ", sgd.momentum, " not in [0,1)"));
    if (sgd.weight_decay < 0) throw std::invalid_argument("weight decay must be >= 0");
    lr_at(phase1_schedule, 0);
    lr_at(phase2_schedule, 0);
    if (!lr_override.empty() && static_cast<int>(lr_override.size()) < total_epochs())
      throw std::invalid_argument(detail::str("lr override has ", lr_override.size(),
                                              " entries but the run has ", total_epochs(),
                                              " epochs"));
    if (mode != RunMode::Wnla && phase2_activation.kind == ActKind::Identity)
      throw std::invalid_argument("identity activation is only legal in wnla mode");
    build_network<float>(arch);  // rejects unknown architectures
  }

  /// Canonical key=value encoding; hashed into the checkpoint fingerprint.
  std::string encode() const {
    std::string s;
    s += "mode=" + mode_name(mode) + ";arch=" + arch;
    s += ";activation=" + encode_activation(phase2_activation);
    s += ";mixture=" + encode_mixture(phase1_mixture);
    s += ";phase2_epochs=" + std::to_string(phase2_epochs);
    s += ";phase1_fraction=" + detail::num_str(phase1_fraction);
    s += ";lr1=" + detail::num_str(phase1_schedule.base_lr) + "/" +
         detail::num_str(phase1_schedule.decay_factor) + "/" +
         std::to_string(phase1_schedule.step_every);
    s += ";lr2=" + detail::num_str(phase2_schedule.base_lr) + "/" +
         detail::num_str(phase2_schedule.decay_factor) + "/" +
         std::to_string(phase2_schedule.step_every);
    s += ";lr_override=";
    for (size_t i = 0; i < lr_override.size(); ++i)
      s += (i ? "," : "") + detail::num_str(lr_override[i]);
    s += ";momentum=" + detail::num_str(sgd.momentum);
    s += ";weight_decay=" + detail::num_str(sgd.weight_decay);
    s += ";batch_size=" + std::to_string(batch_size);
    s += ";seed=" + std::to_string(seed);
    s += ";dataset_fraction=" + detail::num_str(dataset_fraction);
    s += ";augment=" + std::string(augment_train ? "on" : "off");
    s += ";init=" + std::string(init == InitScheme::KaimingNormal ? "kaiming-normal"
                                                                  : "uniform-range");
    return s;
  }

  std::string fingerprint() const {
    uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a 64
    for (char c : encode()) {
      h ^= static_cast<uint8_t>(c);
      h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }
};

/// Installs the single activation into every slot. Conv/dense parameters
/// carry over untouched; mixture slope tensors are dropped, and a PReLU
/// target gets fresh slopes at their initial value.
template <typename T>
void phase_swap(Network<T>& net, const ActivationSpec& act) {
  set_all_slots(net, act);
}

struct RunResult {
  Checkpoint<float> checkpoint;
  std::vector<MetricsRecord> metrics;
};

struct RunOptions {
  int stop_after_global_epochs = -1;              // -1 = run to completion
  const Checkpoint<float>* resume = nullptr;      // continue a stopped run
  std::function<void(const MetricsRecord&)> on_epoch;
};

namespace detail {

template <typename T>
struct EvalStats {
  double loss = 0;
  double acc = 0;  // percent
};

template <typename T>
Tensor<T> assemble_batch(const std::vector<Tensor<float>>& images,
                         const std::vector<size_t>& order, size_t begin, size_t end) {
  const auto& s = images[order[begin]].shape();
  Tensor<T> batch({end - begin, s[0], s[1], s[2]});
  const size_t stride = s[0] * s[1] * s[2];
  for (size_t i = begin; i < end; ++i) {
    const Tensor<float>& img = images[order[i]];
    T* dst = batch.data() + (i - begin) * stride;
    for (size_t j = 0; j < stride; ++j) dst[j] = static_cast<T>(img[j]);
  }
  return batch;
}

template <typename T>
size_t argmax_row(const Tensor<T>& logits, size_t row) {
  const size_t k = logits.dim(1);
  size_t best = 0;
  for (size_t j = 1; j < k; ++j)
    if (logits[row * k + j] > logits[row * k + best]) best = j;
  return best;
}

template <typename T>
EvalStats<T> evaluate(const Network<T>& net, const std::vector<Tensor<float>>& images,
                      const std::vector<int>& labels, size_t batch) {
  EvalStats<T> st;
  if (images.empty()) return st;
  std::vector<size_t> order(images.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  double loss_sum = 0;
  size_t correct = 0;
  for (size_t begin = 0; begin < images.size(); begin += batch) {
    const size_t end = std::min(images.size(), begin + batch);
    Tape<T> tape;
    int x = tape.leaf(assemble_batch<T>(images, order, begin, end));
    int logits = net.forward(tape, x);
    std::vector<int> ybatch(labels.begin() + begin, labels.begin() + end);
    int loss = softmax_cross_entropy(tape, logits, ybatch);
    loss_sum += static_cast<double>(tape.value(loss)[0]) * static_cast<double>(end - begin);
    for (size_t i = begin; i < end; ++i)
      if (argmax_row(tape.value(logits), i - begin) == static_cast<size_t>(labels[i]))
        ++correct;
  }
  st.loss = loss_sum / static_cast<double>(images.size());
  st.acc = 100.0 * static_cast<double>(correct) / static_cast<double>(images.size());
  return st;
}

}  // namespace detail

template <typename T>
Network<T> network_from_checkpoint(const Checkpoint<T>& ck) {
  Network<T> net = build_network<T>(ck.arch);
  for (const auto& [site, enc] : ck.slots) {
    bool found = false;
    for (Layer& l : net.layers) {
      if (l.kind != LayerKind::Act || l.slot.site != site) continue;
      detail::drop_slot_params(net, l.slot);
      l.slot.current = SlotActivation::parse(enc);
      detail::register_slot_params(net, l.slot);
      found = true;
    }
    if (!found)
      throw std::runtime_error("checkpoint references unknown activation slot '" + site + "'");
  }
  auto params = ck.network_params();
  for (auto& [name, t] : net.params) {
    auto it = params.find(name);
    if (it == params.end())
      throw std::runtime_error("checkpoint is missing parameter '" + name + "'");
    if (it->second.shape() != t.shape())
      throw std::runtime_error(detail::str("checkpoint parameter '", name, "' has shape ",
                                           detail::shape_str(it->second.shape()), ", expected ",
                                           detail::shape_str(t.shape())));
    t = it->second;
  }
  if (params.size() != net.params.size())
    throw std::runtime_error("checkpoint carries parameters the architecture does not have");
  return net;
}

/// Runs the full two-phase plan: install the phase-1 activations, train for
/// E1 epochs under schedule 1, swap the slots for phase 2 (per mode), train
/// for E2 epochs under schedule 2. One MetricsRecord per epoch with
/// evaluation on the test split. The epoch counter, learning rate and
/// momentum buffers all restart at the phase boundary.
inline RunResult run_plan(const TrainPlan& plan, const DatasetPair& full_data,
                          const RunOptions& opts = {}) {
  using T = float;
  plan.validate();

  const DatasetPair subset_data =
      plan.dataset_fraction < 1.0 ? subset(full_data, plan.dataset_fraction, plan.seed)
                                  : DatasetPair{};
  const DatasetPair& data = plan.dataset_fraction < 1.0 ? subset_data : full_data;

  Network<T> net = build_network<T>(plan.arch);
  if (data.image_shape() != net.input_shape)
    throw std::invalid_argument(detail::str("dataset images ",
                                            detail::shape_str(data.image_shape()),
                                            " do not match architecture input ",
                                            detail::shape_str(net.input_shape)));
  if (data.num_classes != net.num_classes)
    throw std::invalid_argument(detail::str("dataset has ", data.num_classes,
                                            " classes, architecture expects ",
                                            net.num_classes));

  for (int lbl : data.train_labels)
    if (lbl < 0 || static_cast<size_t>(lbl) >= data.num_classes)
      throw std::invalid_argument(detail::str("train label ", lbl, " out of range [0,",
                                              data.num_classes, ")"));
  for (int lbl : data.test_labels)
    if (lbl < 0 || static_cast<size_t>(lbl) >= data.num_classes)
      throw std::invalid_argument(detail::str("test label ", lbl, " out of range [0,",
                                              data.num_classes, ")"));

  const int e1 = plan.phase1_epochs(), e2 = plan.phase2_epochs;
  const int total = e1 + e2;
  if (total > 0 && data.train_images.empty())
    throw std::invalid_argument("training split is empty");

  Rng run_rng(detail::mix_seed(plan.seed, 0x7EA1));
  SgdState<T> sgd;
  int global = 0;
  std::vector<MetricsRecord> metrics;

  auto install_phase1 = [&] {
    switch (plan.mode) {
      case RunMode::Baseline:
      case RunMode::BaselineTpt:
        set_all_slots(net, plan.phase2_activation);
        break;
      case RunMode::Mix:
      case RunMode::MixtureFull:
        set_all_slots(net, plan.phase1_mixture);
        break;
      case RunMode::Wnla:
        set_all_slots(net, ActivationSpec::identity());
        break;
    }
  };

  auto boundary_swap = [&] {
    if (plan.mode == RunMode::Mix || plan.mode == RunMode::BaselineTpt)
      phase_swap(net, plan.phase2_activation);
    sgd.reset();
  };

  bool crossed_boundary = false;
  if (opts.resume) {
    const Checkpoint<T>& ck = *opts.resume;
    if (ck.plan_fingerprint != plan.fingerprint())
      throw std::runtime_error("checkpoint fingerprint does not match the plan; refusing to resume");
    net = network_from_checkpoint(ck);
    for (auto& [name, v] : ck.velocity()) sgd.velocity()[name] = v;
    run_rng.restore_state(ck.rng_state);
    global = ck.global_epoch;
    crossed_boundary = global > e1;  // a checkpoint at exactly e1 is pre-swap
  } else {
    install_phase1();
    init_weights(net, plan.seed, plan.init);
  }

  auto make_checkpoint = [&]() {
    Checkpoint<T> ck;
    ck.arch = plan.arch;
    for (const ActivationSlot* s : net.slots()) ck.slots.emplace_back(s->site, s->current.encode());
    ck.tensors = net.params;
    for (const auto& [name, v] : sgd.velocity()) ck.tensors.emplace("velocity/" + name, v);
    ck.plan_fingerprint = plan.fingerprint();
    ck.rng_state = run_rng.save_state();
    ck.global_epoch = global;
    ck.phase = global < e1 ? 1 : 2;
    return ck;
  };

  while (global < total) {
    if (opts.stop_after_global_epochs >= 0 && global >= opts.stop_after_global_epochs)
      return {make_checkpoint(), std::move(metrics)};
    if (!crossed_boundary && global >= e1) {
      boundary_swap();
      crossed_boundary = true;
    }

    const int phase = global < e1 ? 1 : 2;
    const int phase_epoch = phase == 1 ? global : global - e1;
    const double lr = !plan.lr_override.empty()
                          ? plan.lr_override[global]
                          : lr_at(phase == 1 ? plan.phase1_schedule : plan.phase2_schedule,
                                  phase_epoch);

    const uint64_t shuffle_seed = run_rng.next_u64();
    const uint64_t aug_seed = run_rng.next_u64();

    std::vector<size_t> order(data.train_images.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle_rng(shuffle_seed);
    shuffle_rng.shuffle(order);

    double loss_sum = 0;
    size_t correct = 0;
    const size_t n_train = order.size();
    if (n_train == 0) throw std::invalid_argument("training split is empty");
    for (size_t begin = 0; begin < n_train; begin += plan.batch_size) {
      const size_t end = std::min(n_train, begin + plan.batch_size);
      Tape<T> tape;
      Tensor<T> xb;
      if (plan.augment_train) {
        std::vector<Tensor<float>> aug_imgs;
        aug_imgs.reserve(end - begin);
        std::vector<size_t> ids(end - begin);
        for (size_t i = begin; i < end; ++i) {
          Rng arng(detail::mix_seed(aug_seed, order[i]));
          aug_imgs.push_back(augment(data.train_images[order[i]], arng));
          ids[i - begin] = i - begin;
        }
        xb = detail::assemble_batch<T>(aug_imgs, ids, 0, ids.size());
      } else {
        xb = detail::assemble_batch<T>(data.train_images, order, begin, end);
      }
      int x = tape.leaf(std::move(xb));
      int logits = net.forward(tape, x);
      std::vector<int> ybatch(end - begin);
      for (size_t i = begin; i < end; ++i) ybatch[i - begin] = data.train_labels[order[i]];
      int loss = softmax_cross_entropy(tape, logits, ybatch);

      loss_sum += static_cast<double>(tape.value(loss)[0]) * static_cast<double>(end - begin);
      for (size_t i = begin; i < end; ++i)
        if (detail::argmax_row(tape.value(logits), i - begin) ==
            static_cast<size_t>(data.train_labels[order[i]]))
          ++correct;

      auto grads = tape.backward(loss);
      sgd.step(net.params, grads, plan.sgd, lr);
    }

    auto test = detail::evaluate(net, data.test_images, data.test_labels, plan.eval_batch);
    MetricsRecord rec;
    rec.epoch = phase_epoch;
    rec.phase = phase;
    rec.lr = lr;
    rec.train_loss = loss_sum / static_cast<double>(n_train);
    rec.train_acc = 100.0 * static_cast<double>(correct) / static_cast<double>(n_train);
    rec.test_loss = test.loss;
    rec.test_acc = test.acc;
    metrics.push_back(rec);
    if (opts.on_epoch) opts.on_epoch(rec);
    ++global;
  }

  if (!crossed_boundary) boundary_swap();  // E2 == 0 runs still end phase 1
  return {make_checkpoint(), std::move(metrics)};
}

/// Final test accuracy per phase-1 epoch fraction (shared seeds across
/// fractions so the sweep isolates the fraction).
struct SweepRow {
  double fraction = 0;
  std::vector<double> test_accs;  // one per seed
  double mean = 0;
  double stddev = 0;
};

inline std::vector<SweepRow> epoch_fraction_sweep(const TrainPlan& base,
                                                  const std::vector<double>& fractions,
                                                  const std::vector<uint64_t>& seeds,
                                                  const DatasetPair& data) {
  std::vector<SweepRow> rows;
  for (double f : fractions) {
    if (f <= 0 || f > 1)
      throw std::invalid_argument(detail::str("phase-1 fraction ", f, " not in (0,1]"));
    SweepRow row;
    row.fraction = f;
    for (uint64_t s : seeds) {
      TrainPlan plan = base;
      plan.phase1_fraction = f;
      plan.seed = s;
      auto res = run_plan(plan, data);
      row.test_accs.push_back(res.metrics.empty() ? 0.0 : res.metrics.back().test_acc);
    }
    double sum = 0;
    for (double a : row.test_accs) sum += a;
    row.mean = sum / static_cast<double>(row.test_accs.size());
    double var = 0;
    for (double a : row.test_accs) var += (a - row.mean) * (a - row.mean);
    row.stddev = row.test_accs.size() > 1
                     ? std::sqrt(var / static_cast<double>(row.test_accs.size() - 1))
                     : 0.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Trains on a stratified fraction of the training split and reports the
/// final train/test accuracy and their gap (the overfitting proxy).
struct ReducedDataResult {
  double train_acc = 0;
  double test_acc = 0;
  double gap = 0;
};

inline ReducedDataResult reduced_data_study(const TrainPlan& base, double fraction,
                                            const DatasetPair& data) {
  if (fraction <= 0 || fraction > 1)
    throw std::invalid_argument(detail::str("training fraction ", fraction, " not in (0,1]"));
  TrainPlan plan = base;
  plan.dataset_fraction = fraction;
  auto res = run_plan(plan, data);
  if (res.metrics.empty()) throw std::runtime_error("reduced-data study ran zero epochs");
  ReducedDataResult out;
  out.train_acc = res.metrics.back().train_acc;
  out.test_acc = res.metrics.back().test_acc;
  out.gap = out.train_acc - out.test_acc;
  return out;
}

/// Writes one TSV row per sample: label, then the named layer's flattened
/// output. The header names the feature columns, so an empty input yields a
/// header-only file. Row order is dataset order; re-export is byte-stable.
template <typename T>
void export_features(const Network<T>& net, const std::vector<Tensor<float>>& images,
                     const std::vector<int>& labels, const std::string& layer,
                     const std::filesystem::path& out_path, long limit = -1) {
  bool known = false;
  for (const Layer& l : net.layers) known = known || l.name == layer;
  if (!known) {
    std::string valid;
    for (const Layer& l : net.layers) valid += (valid.empty() ? "" : ", ") + l.name;
    throw std::invalid_argument("unknown layer '" + layer + "'; valid layers: " + valid);
  }

  // Feature width from a dummy forward so empty datasets still get a header.
  size_t width = 0;
  {
    Tape<T> tape;
    std::vector<size_t> shape = net.input_shape;
    shape.insert(shape.begin(), 1);
    int x = tape.leaf(Tensor<T>(shape));
    std::map<std::string, int> taps;
    net.forward(tape, x, &taps);
    width = tape.value(taps.at(layer)).numel();
  }

  std::ofstream os(out_path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write feature file " + out_path.string());
  os << "label";
  for (size_t i = 0; i < width; ++i) os << "\tf" << i;
  os << "\n";

  const size_t n =
      limit >= 0 ? std::min(images.size(), static_cast<size_t>(limit)) : images.size();
  char buf[32];
  std::vector<size_t> order(1);
  for (size_t i = 0; i < n; ++i) {
    order[0] = i;
    Tape<T> tape;
    int x = tape.leaf(detail::assemble_batch<T>(images, order, 0, 1));
    std::map<std::string, int> taps;
    net.forward(tape, x, &taps);
    const Tensor<T>& feat = tape.value(taps.at(layer));
    os << labels[i];
    for (size_t j = 0; j < feat.numel(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.6f", static_cast<double>(feat[j]));
      os << "\t" << buf;
    }
    os << "\n";
  }
  if (!os) throw std::runtime_error("failed writing feature file " + out_path.string());
}

}  // namespace coopnet
