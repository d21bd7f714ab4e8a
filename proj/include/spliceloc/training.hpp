// ----------------------------------------------------------------------------
// Copyright 2026 The spliceloc Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ----------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spliceloc/config_file.hpp"
#include "spliceloc/features.hpp"
#include "spliceloc/forgery.hpp"
#include "spliceloc/model.hpp"

namespace spliceloc {

template <typename T>
using NamedParameters = std::vector<std::pair<std::string, ad::Tensor<T>>>;

struct AdamOptions {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::size_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

/// Bias-corrected Adam update from each parameter's gradient buffer. Throws
/// Numeric, naming the parameter, before touching anything when a gradient
/// is not finite.
template <typename T>
void adam_step(NamedParameters<T>& params, AdamState& state, const AdamOptions& options);

/// Scales all gradients so their global L2 norm is at most `max_norm`.
/// Returns the norm before scaling.
template <typename T>
double clip_grad_norm(NamedParameters<T>& params, double max_norm);

/// Improvement means value < best - delta. Stops after `patience`
/// consecutive epochs without improvement.
class EarlyStopping {
 public:
  EarlyStopping(double delta, std::size_t patience);
  /// Returns true when `value` is a new best.
  bool update(double value);
  bool should_stop() const noexcept { return stale_ >= patience_; }
  double best() const noexcept { return best_; }
  std::size_t stale_epochs() const noexcept { return stale_; }

 private:
  double delta_;
  std::size_t patience_;
  double best_;
  std::size_t stale_ = 0;
};

struct TrainConfig {
  std::size_t batch_size = 512;
  AdamOptions adam;
  double early_stop_delta = 0.2;
  std::size_t early_stop_patience = 10;
  std::size_t max_epochs = 100;
  std::uint64_t seed = 0;
  double clip_norm = 1.0;  // 0 disables clipping
  std::size_t threads = 0; // feature extraction workers, 0 = hardware
  FeatureSet features = FeatureSet::Combined;
  std::filesystem::path cache_dir;  // empty: features are not cached
  ModelConfig model;
  /// Model fields set explicitly in the config file.
  std::map<std::string, double> model_overrides;

  void validate() const;
  /// Keys: batch_size, learning_rate, adam_beta1, adam_beta2, adam_eps,
  /// early_stop_delta, early_stop_patience, max_epochs, seed, clip_norm,
  /// threads, features (combined|mel), cache_dir and model.<field>.
  static TrainConfig from_config(const KeyValueConfig& kv);
  static TrainConfig load(const std::filesystem::path& path);
};

/// Features and target sequences of a manifest, held in memory.
struct Dataset {
  std::vector<ForgeryRecord> records;
  std::vector<FeatureStack> features;
  std::vector<TokenSeq> targets;

  std::size_t size() const noexcept { return records.size(); }
  /// Reads the manifest and extracts (or loads cached) features in parallel.
  static Dataset load(const std::filesystem::path& manifest, const std::filesystem::path& cache_dir, FeatureSet set,
                      std::size_t threads = 0);
  static Dataset from_records(std::vector<ForgeryRecord> records, const std::filesystem::path& cache_dir,
                              FeatureSet set, std::size_t threads = 0);
};

/// Cache file for a record: <cache_dir>/<id>-<key>.<mel|combined>.sfft, where
/// key hashes the audio path, size and modification time.
std::filesystem::path feature_cache_path(const std::filesystem::path& cache_dir, const ForgeryRecord& record,
                                         FeatureSet set);

/// Token-weighted mean cross-entropy over a dataset, without dropout.
template <typename T>
double dataset_loss(const Transformer<T>& model, const Dataset& data, std::size_t batch_size);

/// Sample order of one epoch; depends only on (seed, epoch).
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double wall_seconds = 0.0;
  bool improved = false;  // by more than the early-stop delta
  bool new_best = false;  // lowest validation loss so far, checkpoint written
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  std::string stop_reason;  // "early_stop" or "max_epochs"
  std::size_t best_epoch = 0;  // 0: the initial weights were never beaten
  double best_val_loss = 0.0;
  std::filesystem::path best_checkpoint;
  std::filesystem::path last_checkpoint;  // weights after the final epoch
  std::filesystem::path report_path;
};

struct TrainHooks {
  std::function<void(const EpochRecord&)> on_epoch;
};

/// Freshly initialized model for `config.model`, seeded from `config.seed`.
Transformer<float> initial_model(const TrainConfig& config);

/// Teacher-forced training with Adam, gradient clipping and early stopping
/// on validation loss. <out_dir>/best.ckpt always holds the weights with the
/// lowest validation loss seen, starting with the initial weights.
/// <out_dir>/last.ckpt holds the final weights and <out_dir>/train_report.jsonl
/// gets one line per epoch, then a summary. On
/// return the model holds the best weights.
TrainReport train(Transformer<float>& model, const Dataset& train_set, const Dataset& val_set, const TrainConfig& config,
                  const std::filesystem::path& out_dir, const TrainHooks& hooks = {});

/// Loads a checkpoint and trains it with a fresh optimizer. Model fields
/// set in `config.model_overrides` must agree with the checkpoint.
TrainReport finetune(const std::filesystem::path& checkpoint, const Dataset& train_set, const Dataset& val_set,
                     const TrainConfig& config, const std::filesystem::path& out_dir, const TrainHooks& hooks = {});

/// Model config for a fresh run: defaults with the overrides applied and the
/// input width taken from the feature set.
ModelConfig resolve_model_config(const TrainConfig& config);

std::string epoch_json(const EpochRecord& record);

}  // namespace spliceloc
