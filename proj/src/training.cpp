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

#include "spliceloc/training.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "json.hpp"
#include "spliceloc/checkpoint.hpp"
#include "spliceloc/error.hpp"
#include "spliceloc/manifest.hpp"

namespace spliceloc {
namespace {

constexpr std::uint64_t kInitStream = 0x1417;
constexpr std::uint64_t kOrderStream = 0x0DE5;
constexpr std::uint64_t kDropoutStream = 0xD50F;

std::size_t worker_count(std::size_t requested, std::size_t jobs) {
  std::size_t n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(n, jobs));
}

void write_report_line(std::ofstream& out, const std::string& line) {
  out << line << '\n';
  out.flush();
  if (!out) fail(ErrorKind::Io, "cannot write training report");
}

}  // namespace

template <typename T>
void adam_step(NamedParameters<T>& params, AdamState& state, const AdamOptions& o) {
  for (auto& [name, p] : params) {
    if (!p.has_grad()) continue;
    for (T g : p.grad())
      if (!std::isfinite(static_cast<double>(g))) fail(ErrorKind::Numeric, "non-finite gradient in parameter '" + name + "'");
  }
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), {});
    state.v.assign(params.size(), {});
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.m[i].assign(params[i].second.size(), 0.0);
      state.v[i].assign(params[i].second.size(), 0.0);
    }
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i].second;
    require(state.m[i].size() == p.size(), "adam_step: optimizer state does not match parameters");
    if (!p.has_grad()) continue;
    auto& value = p.data();
    const auto& grad = p.grad();
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t j = 0; j < value.size(); ++j) {
      const double g = grad[j];
      m[j] = o.beta1 * m[j] + (1.0 - o.beta1) * g;
      v[j] = o.beta2 * v[j] + (1.0 - o.beta2) * g * g;
      const double m_hat = m[j] / c1;
      const double v_hat = v[j] / c2;
      value[j] = static_cast<T>(value[j] - o.learning_rate * m_hat / (std::sqrt(v_hat) + o.eps));
    }
  }
}

template <typename T>
double clip_grad_norm(NamedParameters<T>& params, double max_norm) {
  double sq = 0.0;
  for (auto& [name, p] : params)
    if (p.has_grad())
      for (T g : p.grad()) sq += static_cast<double>(g) * g;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double factor = max_norm / norm;
    for (auto& [name, p] : params)
      if (p.has_grad())
        for (T& g : p.grad()) g = static_cast<T>(g * factor);
  }
  return norm;
}

EarlyStopping::EarlyStopping(double delta, std::size_t patience)
    : delta_(delta), patience_(patience), best_(std::numeric_limits<double>::infinity()) {
  require(delta >= 0.0, "early stopping delta must be non-negative");
  require(patience >= 1, "early stopping patience must be at least 1");
}

bool EarlyStopping::update(double value) {
  if (value < best_ - delta_) {
    best_ = value;
    stale_ = 0;
    return true;
  }
  ++stale_;
  return false;
}

void TrainConfig::validate() const {
  if (batch_size == 0) fail(ErrorKind::InvalidArgument, "batch_size must be positive");
  if (!(adam.learning_rate > 0.0)) fail(ErrorKind::InvalidArgument, "learning_rate must be positive");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0))
    fail(ErrorKind::InvalidArgument, "adam betas must lie in [0, 1)");
  if (!(adam.eps > 0.0)) fail(ErrorKind::InvalidArgument, "adam_eps must be positive");
  if (!(early_stop_delta >= 0.0)) fail(ErrorKind::InvalidArgument, "early_stop_delta must be non-negative");
  if (early_stop_patience < 1) fail(ErrorKind::InvalidArgument, "early_stop_patience must be at least 1");
  if (!(clip_norm >= 0.0)) fail(ErrorKind::InvalidArgument, "clip_norm must be non-negative");
}

TrainConfig TrainConfig::from_config(const KeyValueConfig& kv) {
  TrainConfig c;
  auto count = [&](const char* key, std::size_t fallback) {
    const auto v = kv.get_int(key, static_cast<long long>(fallback));
    if (v < 0) fail(ErrorKind::InvalidArgument, kv.origin() + ": " + key + " must be non-negative");
    return static_cast<std::size_t>(v);
  };
  c.batch_size = count("batch_size", c.batch_size);
  c.adam.learning_rate = kv.get_double("learning_rate", c.adam.learning_rate);
  c.adam.beta1 = kv.get_double("adam_beta1", c.adam.beta1);
  c.adam.beta2 = kv.get_double("adam_beta2", c.adam.beta2);
  c.adam.eps = kv.get_double("adam_eps", c.adam.eps);
  c.early_stop_delta = kv.get_double("early_stop_delta", c.early_stop_delta);
  c.early_stop_patience = count("early_stop_patience", c.early_stop_patience);
  c.max_epochs = count("max_epochs", c.max_epochs);
  c.seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));
  c.clip_norm = kv.get_double("clip_norm", c.clip_norm);
  c.threads = count("threads", c.threads);
  const auto features = kv.get_string("features", "combined");
  if (features == "combined") c.features = FeatureSet::Combined;
  else if (features == "mel") c.features = FeatureSet::MelOnly;
  else fail(ErrorKind::InvalidArgument, kv.origin() + ": features must be 'combined' or 'mel'");
  c.cache_dir = kv.get_string("cache_dir", "");
  for (const auto& [name, value] : ModelConfig{}.fields()) {
    const std::string key = "model." + name;
    if (kv.has(key)) c.model_overrides[name] = kv.get_double(key, value);
  }
  c.model = resolve_model_config(c);
  kv.check_all_used();
  c.validate();
  return c;
}

TrainConfig TrainConfig::load(const std::filesystem::path& path) { return from_config(KeyValueConfig::load(path)); }

ModelConfig resolve_model_config(const TrainConfig& config) {
  auto fields = ModelConfig{}.fields();
  std::map<std::string, double> merged(fields.begin(), fields.end());
  merged["input_width"] = static_cast<double>(feature_width(config.features));
  for (const auto& [k, v] : config.model_overrides) merged[k] = v;
  ModelConfig m;
  try {
    m = ModelConfig::from_fields(merged);
  } catch (const Error& e) {
    fail(ErrorKind::InvalidArgument, e.what());
  }
  m.validate();
  if (m.input_width != feature_width(config.features))
    fail(ErrorKind::InvalidArgument, "model.input_width " + std::to_string(m.input_width) +
                                         " does not match the feature set width " +
                                         std::to_string(feature_width(config.features)));
  return m;
}

std::filesystem::path feature_cache_path(const std::filesystem::path& cache_dir, const ForgeryRecord& record,
                                         FeatureSet set) {
  if (cache_dir.empty()) return {};
  std::error_code ec;
  const auto audio = std::filesystem::weakly_canonical(record.audio_path, ec);
  std::string key = (ec ? record.audio_path : audio).string();
  const auto size = std::filesystem::file_size(record.audio_path, ec);
  key += '|' + std::to_string(ec ? 0 : size);
  const auto stamp = std::filesystem::last_write_time(record.audio_path, ec);
  key += '|' + std::to_string(ec ? 0 : stamp.time_since_epoch().count());
  std::uint64_t h = 14695981039346656037ull;  // FNV-1a
  for (unsigned char c : key) h = (h ^ c) * 1099511628211ull;
  char tag[17];
  std::snprintf(tag, sizeof tag, "%016llx", static_cast<unsigned long long>(h));
  return cache_dir / (record.id + "-" + tag + (set == FeatureSet::MelOnly ? ".mel.sfft" : ".combined.sfft"));
}

Dataset Dataset::load(const std::filesystem::path& manifest, const std::filesystem::path& cache_dir, FeatureSet set,
                      std::size_t threads) {
  return from_records(read_manifest(manifest), cache_dir, set, threads);
}

Dataset Dataset::from_records(std::vector<ForgeryRecord> records, const std::filesystem::path& cache_dir,
                              FeatureSet set, std::size_t threads) {
  Dataset d;
  d.records = std::move(records);
  d.features.resize(d.records.size());
  d.targets.reserve(d.records.size());
  for (const auto& r : d.records) d.targets.push_back(target_sequence(r.grid_labels));
  if (!cache_dir.empty()) std::filesystem::create_directories(cache_dir);

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < d.records.size(); i = next++) {
      try {
        d.features[i] = load_features(d.records[i].audio_path, feature_cache_path(cache_dir, d.records[i], set), set);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const auto n = worker_count(threads, d.records.size());
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return d;
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(derive_seed(seed, kOrderStream), epoch));
  rng.shuffle(order);
  return order;
}

namespace {

Batch batch_of(const Dataset& data, const std::vector<std::size_t>& order, std::size_t begin, std::size_t end) {
  std::vector<const FeatureStack*> features;
  std::vector<TokenSeq> targets;
  for (std::size_t i = begin; i < end; ++i) {
    features.push_back(&data.features[order[i]]);
    targets.push_back(data.targets[order[i]]);
  }
  return make_batch(features, targets);
}

std::size_t target_tokens(const Batch& b) {
  std::size_t n = 0;
  for (int t : b.tgt_out) n += t != SpliceVocab::kPad;
  return n;
}

void check_dataset(const Dataset& data, const ModelConfig& model, const char* role) {
  if (data.size() == 0) fail(ErrorKind::Contract, std::string(role) + " set is empty");
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.features[i].width != model.input_width)
      fail(ErrorKind::Contract, std::string(role) + " record " + data.records[i].id + " has feature width " +
                                    std::to_string(data.features[i].width) + ", model expects " +
                                    std::to_string(model.input_width));
    if (data.targets[i].indices.size() > model.max_tgt_len)
      fail(ErrorKind::Contract, std::string(role) + " record " + data.records[i].id + " needs " +
                                    std::to_string(data.targets[i].indices.size()) + " target tokens, max_tgt_len is " +
                                    std::to_string(model.max_tgt_len));
  }
}

TrainReport run_training(Transformer<float>& model, const Dataset& train_set, const Dataset& val_set,
                         const TrainConfig& config, const std::filesystem::path& out_dir, const TrainHooks& hooks) {
  config.validate();
  check_dataset(train_set, model.config(), "training");
  check_dataset(val_set, model.config(), "validation");
  std::filesystem::create_directories(out_dir);

  TrainReport report;
  report.best_checkpoint = out_dir / "best.ckpt";
  report.last_checkpoint = out_dir / "last.ckpt";
  report.report_path = out_dir / "train_report.jsonl";
  std::ofstream out(report.report_path, std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot create " + report.report_path.string());

  EarlyStopping stopper(config.early_stop_delta, config.early_stop_patience);
  auto& params = model.parameters();
  AdamState adam;
  report.best_val_loss = dataset_loss(model, val_set, config.batch_size);
  save_checkpoint(report.best_checkpoint, model);
  report.stop_reason = "max_epochs";

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const auto order = epoch_order(train_set.size(), config.seed, epoch);
    Rng dropout_rng(derive_seed(derive_seed(config.seed, kDropoutStream), epoch));
    double loss_sum = 0.0;
    std::size_t token_sum = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const auto batch = batch_of(train_set, order, begin, std::min(order.size(), begin + config.batch_size));
      for (auto& [name, p] : params) p.zero_grad();
      ad::Tape<float> tape;
      double value = 0.0;
      {
        ad::TapeScope<float> scope(tape);
        const auto loss = model.loss(batch, true, &dropout_rng);
        value = loss.item();
        if (!std::isfinite(value)) fail(ErrorKind::Numeric, "non-finite training loss in epoch " + std::to_string(epoch));
        tape.backward(loss);
      }
      try {
        clip_grad_norm(params, config.clip_norm);
        adam_step(params, adam, config.adam);
      } catch (const Error& e) {
        fail(e.kind(), "epoch " + std::to_string(epoch) + " aborted: " + e.what());
      }
      const auto tokens = target_tokens(batch);
      loss_sum += value * static_cast<double>(tokens);
      token_sum += tokens;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(token_sum);
    rec.val_loss = dataset_loss(model, val_set, config.batch_size);
    if (!std::isfinite(rec.val_loss)) fail(ErrorKind::Numeric, "non-finite validation loss in epoch " + std::to_string(epoch));
    rec.improved = stopper.update(rec.val_loss);
    rec.new_best = rec.val_loss < report.best_val_loss;
    if (rec.new_best) {
      report.best_epoch = epoch;
      report.best_val_loss = rec.val_loss;
      save_checkpoint(report.best_checkpoint, model);
    }
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.epochs.push_back(rec);
    write_report_line(out, epoch_json(rec));
    if (hooks.on_epoch) hooks.on_epoch(rec);
    if (stopper.should_stop()) {
      report.stop_reason = "early_stop";
      break;
    }
  }
  save_checkpoint(report.last_checkpoint, model);
  load_checkpoint(report.best_checkpoint, model);

  nlohmann::json summary;
  summary["summary"] = {{"stop_reason", report.stop_reason},
                        {"epochs", report.epochs.size()},
                        {"best_epoch", report.best_epoch},
                        {"best_val_loss", report.best_val_loss},
                        {"best_checkpoint", report.best_checkpoint.string()},
                        {"last_checkpoint", report.last_checkpoint.string()}};
  write_report_line(out, summary.dump());
  return report;
}

}  // namespace

template <typename T>
double dataset_loss(const Transformer<T>& model, const Dataset& data, std::size_t batch_size) {
  require(data.size() > 0, "dataset_loss: empty dataset");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  double sum = 0.0;
  std::size_t tokens = 0;
  for (std::size_t begin = 0; begin < order.size(); begin += batch_size) {
    const auto batch = batch_of(data, order, begin, std::min(order.size(), begin + batch_size));
    const auto n = target_tokens(batch);
    sum += static_cast<double>(model.loss(batch).item()) * static_cast<double>(n);
    tokens += n;
  }
  return sum / static_cast<double>(tokens);
}

Transformer<float> initial_model(const TrainConfig& config) {
  return Transformer<float>(config.model, derive_seed(config.seed, kInitStream));
}

TrainReport train(Transformer<float>& model, const Dataset& train_set, const Dataset& val_set, const TrainConfig& config,
                  const std::filesystem::path& out_dir, const TrainHooks& hooks) {
  return run_training(model, train_set, val_set, config, out_dir, hooks);
}

TrainReport finetune(const std::filesystem::path& checkpoint, const Dataset& train_set, const Dataset& val_set,
                     const TrainConfig& config, const std::filesystem::path& out_dir, const TrainHooks& hooks) {
  const auto stored = read_checkpoint_config(checkpoint);
  std::string diff;
  for (const auto& [name, value] : stored.fields()) {
    const auto it = config.model_overrides.find(name);
    if (it != config.model_overrides.end() && it->second != value)
      diff += " " + name + "=" + std::to_string(it->second) + " (checkpoint " + std::to_string(value) + ")";
  }
  if (train_set.size() > 0 && train_set.features[0].width != stored.input_width)
    diff += " feature width " + std::to_string(train_set.features[0].width) + " (checkpoint " +
            std::to_string(stored.input_width) + ")";
  if (!diff.empty()) fail(ErrorKind::Checkpoint, "config incompatible with " + checkpoint.string() + ":" + diff);
  auto model = load_model(checkpoint);
  return run_training(model, train_set, val_set, config, out_dir, hooks);
}

std::string epoch_json(const EpochRecord& r) {
  nlohmann::json j = {{"epoch", r.epoch},
                      {"train_loss", r.train_loss},
                      {"val_loss", r.val_loss},
                      {"wall_s", r.wall_seconds},
                      {"improved", r.improved},
                      {"new_best", r.new_best}};
  return j.dump();
}

template void adam_step(NamedParameters<float>&, AdamState&, const AdamOptions&);
template void adam_step(NamedParameters<double>&, AdamState&, const AdamOptions&);
template double clip_grad_norm(NamedParameters<float>&, double);
template double clip_grad_norm(NamedParameters<double>&, double);
template double dataset_loss(const Transformer<float>&, const Dataset&, std::size_t);
template double dataset_loss(const Transformer<double>&, const Dataset&, std::size_t);

}  // namespace spliceloc
