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

#include <cmath>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "spliceloc/checkpoint.hpp"
#include "spliceloc/decode.hpp"
#include "spliceloc/error.hpp"
#include "spliceloc/features.hpp"
#include "spliceloc/training.hpp"
#include "support/synth.hpp"
#include "support/temp_dir.hpp"

using namespace spliceloc;
using ad::Tensor;
using spliceloc::testing::TempDir;

namespace {

ModelConfig toy_config() {
  ModelConfig c;
  c.d_model = 16;
  c.n_heads = 2;
  c.n_encoder_layers = 1;
  c.n_decoder_layers = 1;
  c.d_ff = 24;
  c.input_width = 8;
  c.dropout = 0.0;
  return c;
}

Dataset toy_dataset(std::size_t n, std::uint64_t seed, std::size_t width = 8) {
  Rng rng(seed);
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    ForgeryRecord r;
    r.id = "toy-" + std::to_string(i);
    const std::size_t frames = 2 + rng.index(4);
    r.duration = static_cast<double>(frames) * 0.5;
    const double label = 0.5 * static_cast<double>(1 + rng.index(frames));
    if (rng.uniform() < 0.8) r.grid_labels = {label};
    FeatureStack f;
    f.frames = frames;
    f.width = width;
    for (std::size_t j = 0; j < frames * width; ++j) f.data.push_back(static_cast<float>(rng.uniform(-1.0, 1.0)));
    for (double t : r.grid_labels) f.data[(static_cast<std::size_t>(t / 0.5) - 1) * width] += 2.0f;
    d.targets.push_back(target_sequence(r.grid_labels));
    d.records.push_back(r);
    d.features.push_back(f);
  }
  return d;
}

TrainConfig toy_train_config() {
  TrainConfig c;
  c.batch_size = 4;
  c.adam.learning_rate = 3e-3;
  c.early_stop_delta = 0.0;
  c.early_stop_patience = 1000;
  c.max_epochs = 3;
  c.seed = 5;
  c.model = toy_config();
  return c;
}

std::vector<float> flat_parameters(const Transformer<float>& m) {
  std::vector<float> out;
  for (const auto& [name, p] : m.parameters()) out.insert(out.end(), p.data().begin(), p.data().end());
  return out;
}

}  // namespace

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  NamedParameters<double> p{{"w", Tensor<double>::from({3}, {1.0, -2.0, 0.5}, true)}};
  p[0].second.zero_grad();
  AdamState state;
  adam_step(p, state, {});
  CHECK(p[0].second.data() == std::vector<double>{1.0, -2.0, 0.5});
  CHECK(state.step == 1);
}

TEST_CASE("adam: first step moves against the gradient by about lr") {
  NamedParameters<double> p{{"w", Tensor<double>::from({3}, {0.0, 0.0, 0.0}, true)}};
  p[0].second.grad() = {0.3, -4.0, 1e-3};
  AdamState state;
  AdamOptions o;
  o.learning_rate = 0.01;
  adam_step(p, state, o);
  const std::vector<double> g{0.3, -4.0, 1e-3};
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(p[0].second.data()[i] == doctest::Approx(-o.learning_rate * g[i] / (std::abs(g[i]) + o.eps)).epsilon(1e-9));
    CHECK((p[0].second.data()[i] < 0) == (g[i] > 0));
  }
}

TEST_CASE("adam: quadratic bowl matches an independent scalar recurrence") {
  NamedParameters<double> p{{"theta", Tensor<double>::from({1}, {1.0}, true)}};
  AdamState state;
  AdamOptions o;
  o.learning_rate = 0.1;
  double theta = 1.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 200; ++t) {
    p[0].second.grad() = {2.0 * p[0].second.data()[0]};
    adam_step(p, state, o);
    const double g = 2.0 * theta;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    theta -= 0.1 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
  }
  CHECK(std::abs(p[0].second.data()[0]) < 1e-2);
  CHECK(p[0].second.data()[0] == doctest::Approx(theta).epsilon(1e-12));
}

TEST_CASE("adam: non-finite gradient aborts without updating") {
  NamedParameters<float> p{{"a", Tensor<float>::from({2}, {1.0f, 2.0f}, true)},
                           {"b", Tensor<float>::from({1}, {3.0f}, true)}};
  p[0].second.grad() = {0.5f, 0.5f};
  p[1].second.grad() = {std::numeric_limits<float>::quiet_NaN()};
  AdamState state;
  try {
    adam_step(p, state, {});
    FAIL("expected a numeric error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Numeric);
    CHECK(std::string(e.what()).find("'b'") != std::string::npos);
  }
  CHECK(p[0].second.data() == std::vector<float>{1.0f, 2.0f});
}

TEST_CASE("gradient clipping to a global norm") {
  NamedParameters<double> p{{"a", Tensor<double>::from({2}, {0, 0}, true)}, {"b", Tensor<double>::from({1}, {0}, true)}};
  p[0].second.grad() = {3.0, 0.0};
  p[1].second.grad() = {4.0};
  CHECK(clip_grad_norm(p, 1.0) == doctest::Approx(5.0));
  CHECK(p[0].second.grad()[0] == doctest::Approx(0.6));
  CHECK(p[1].second.grad()[0] == doctest::Approx(0.8));
  CHECK(clip_grad_norm(p, 10.0) == doctest::Approx(1.0));
  CHECK(p[1].second.grad()[0] == doctest::Approx(0.8));
}

TEST_CASE("early stopping fires after exactly patience stale epochs") {
  EarlyStopping s(0.2, 3);
  CHECK(s.update(5.0));
  CHECK(s.update(4.7));
  CHECK_FALSE(s.update(4.55));  // not better by more than delta
  CHECK_FALSE(s.should_stop());
  CHECK_FALSE(s.update(4.6));
  CHECK_FALSE(s.should_stop());
  CHECK_FALSE(s.update(4.69));
  CHECK(s.should_stop());
  CHECK(s.best() == 4.7);
  CHECK_THROWS_AS(EarlyStopping(0.1, 0), Error);
}

TEST_CASE("training config parsing") {
  const auto kv = KeyValueConfig::parse(
      "batch_size = 16\nlearning_rate = 1e-3\nmax_epochs = 7\nseed = 9\nmodel.d_model = 32\n"
      "model.n_encoder_layers = 2\nmodel.n_decoder_layers = 2\nmodel.d_ff = 64\nmodel.n_heads = 4\n");
  const auto c = TrainConfig::from_config(kv);
  CHECK(c.batch_size == 16);
  CHECK(c.adam.learning_rate == 1e-3);
  CHECK(c.early_stop_delta == 0.2);
  CHECK(c.early_stop_patience == 10);
  CHECK(c.model.d_model == 32);
  CHECK(c.model.input_width == 277);
  CHECK(c.model_overrides.size() == 5);
  CHECK(TrainConfig::from_config(KeyValueConfig::parse("features = mel\n")).model.input_width == 256);
  CHECK_THROWS_AS(TrainConfig::from_config(KeyValueConfig::parse("batch_sise = 3\n")), Error);
  CHECK_THROWS_AS(TrainConfig::from_config(KeyValueConfig::parse("early_stop_patience = 0\n")), Error);
  CHECK_THROWS_AS(TrainConfig::from_config(KeyValueConfig::parse("model.input_width = 100\n")), Error);
  const TrainConfig defaults;
  CHECK(defaults.batch_size == 512);
  CHECK(defaults.adam.learning_rate == 1e-4);
  CHECK(defaults.adam.beta1 == 0.9);
  CHECK(defaults.adam.beta2 == 0.999);
  CHECK(defaults.adam.eps == 1e-8);
}

TEST_CASE("epoch order depends only on seed and epoch") {
  CHECK(epoch_order(50, 1, 3) == epoch_order(50, 1, 3));
  CHECK(epoch_order(50, 1, 3) != epoch_order(50, 1, 4));
  CHECK(epoch_order(50, 1, 3) != epoch_order(50, 2, 3));
  auto o = epoch_order(50, 1, 3);
  std::sort(o.begin(), o.end());
  for (std::size_t i = 0; i < o.size(); ++i) CHECK(o[i] == i);
}

TEST_CASE("pad-only rows do not change the loss") {
  Transformer<double> model(toy_config(), 3);
  const auto d = toy_dataset(2, 4);
  const auto batch = make_batch({&d.features[0], &d.features[1]}, {d.targets[0], d.targets[1]});
  auto padded = batch;
  padded.size += 1;
  padded.src.resize(padded.size * padded.src_len * padded.width, 0.5f);
  padded.src_lengths.push_back(1);
  padded.tgt_in.resize(padded.size * padded.tgt_len, SpliceVocab::kPad);
  padded.tgt_in[2 * padded.tgt_len] = SpliceVocab::kBos;
  padded.tgt_out.resize(padded.size * padded.tgt_len, SpliceVocab::kPad);
  CHECK(model.loss(padded).item() == doctest::Approx(model.loss(batch).item()).epsilon(1e-12));
}

TEST_CASE("loss on a fixed batch decreases over the first steps at small learning rate") {
  int passing = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Transformer<float> model(toy_config(), seed);
    const auto d = toy_dataset(8, seed + 100);
    std::vector<const FeatureStack*> f;
    for (const auto& x : d.features) f.push_back(&x);
    const auto batch = make_batch(f, d.targets);
    AdamState state;
    AdamOptions o;
    o.learning_rate = 1e-4;
    std::vector<double> losses;
    for (int step = 0; step < 10; ++step) {
      for (auto& [n, p] : model.parameters()) p.zero_grad();
      ad::Tape<float> tape;
      ad::TapeScope<float> scope(tape);
      const auto loss = model.loss(batch);
      losses.push_back(loss.item());
      tape.backward(loss);
      adam_step(model.parameters(), state, o);
    }
    bool monotone = true;
    for (std::size_t i = 1; i < losses.size(); ++i) monotone = monotone && losses[i] <= losses[i - 1];
    passing += monotone;
  }
  CHECK(passing >= 4);
}

TEST_CASE("single-sample overfit") {
  TempDir dir;
  auto d = toy_dataset(1, 77);
  d.records[0].grid_labels = {1.0};
  d.targets[0] = target_sequence({1.0});
  Transformer<float> model(toy_config(), 11);
  auto cfg = toy_train_config();
  cfg.batch_size = 1;
  cfg.max_epochs = 500;
  cfg.adam.learning_rate = 1e-2;
  std::size_t epochs = 0;
  double last = 0.0;
  TrainHooks hooks;
  const auto report = train(model, d, d, cfg, dir.path(), hooks);
  for (const auto& e : report.epochs) {
    ++epochs;
    last = e.train_loss;
  }
  CHECK(epochs <= 500);
  CHECK(report.best_val_loss < 0.01);
  CHECK(last < 0.01);
  CHECK(decode_greedy(model, d.features[0]).tokens == d.targets[0]);
}

TEST_CASE("training is deterministic and writes a report") {
  TempDir dir;
  const auto tr = toy_dataset(12, 1);
  const auto va = toy_dataset(4, 2);
  const auto cfg = toy_train_config();
  Transformer<float> a(toy_config(), 1), b(toy_config(), 1);
  const auto ra = train(a, tr, va, cfg, dir / "a");
  const auto rb = train(b, tr, va, cfg, dir / "b");
  REQUIRE(ra.epochs.size() == 3);
  REQUIRE(rb.epochs.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(ra.epochs[i].train_loss == rb.epochs[i].train_loss);
    CHECK(ra.epochs[i].val_loss == rb.epochs[i].val_loss);
  }
  CHECK(flat_parameters(a) == flat_parameters(b));
  CHECK(ra.stop_reason == "max_epochs");

  std::ifstream in(ra.report_path);
  std::string line;
  std::vector<nlohmann::json> lines;
  while (std::getline(in, line)) lines.push_back(nlohmann::json::parse(line));
  REQUIRE(lines.size() == 4);
  CHECK(lines[0]["epoch"] == 1);
  CHECK(lines[2]["val_loss"].get<double>() == ra.epochs[2].val_loss);
  CHECK(lines[3]["summary"]["stop_reason"] == "max_epochs");

  double best = 1e300;
  for (const auto& e : ra.epochs) best = std::min(best, e.val_loss);
  if (ra.best_epoch > 0) CHECK(ra.best_val_loss == best);
  CHECK(dataset_loss(load_model(ra.best_checkpoint), va, 4) == doctest::Approx(ra.best_val_loss).epsilon(1e-6));
  CHECK(dataset_loss(a, va, 4) == doctest::Approx(ra.best_val_loss).epsilon(1e-6));
}

TEST_CASE("early stopping ends training on a plateau") {
  TempDir dir;
  const auto tr = toy_dataset(6, 3);
  const auto va = toy_dataset(3, 4);
  auto cfg = toy_train_config();
  cfg.early_stop_delta = 100.0;  // nothing after the first epoch counts
  cfg.early_stop_patience = 2;
  cfg.max_epochs = 20;
  Transformer<float> model(toy_config(), 2);
  const auto r = train(model, tr, va, cfg, dir.path());
  CHECK(r.stop_reason == "early_stop");
  CHECK(r.epochs.size() == 3);
  CHECK(r.epochs[0].improved);
  CHECK_FALSE(r.epochs[1].improved);
  CHECK_FALSE(r.epochs[2].improved);
}

TEST_CASE("feature cache keeps records with equal ids from different sets apart") {
  TempDir dir;
  ForgeryRecord a, b;
  a.id = b.id = "rec-000000";
  a.audio_path = dir / "train" / "a.wav";
  b.audio_path = dir / "held" / "a.wav";
  std::filesystem::create_directories(a.audio_path.parent_path());
  std::filesystem::create_directories(b.audio_path.parent_path());
  write_wav(a.audio_path, synth::tone(300.0, 3.0));
  write_wav(b.audio_path, synth::speech_like(4.0, 2, 150.0));
  CHECK(feature_cache_path(dir / "cache", a, FeatureSet::Combined) !=
        feature_cache_path(dir / "cache", b, FeatureSet::Combined));
  CHECK(feature_cache_path(dir / "cache", a, FeatureSet::Combined) ==
        feature_cache_path(dir / "cache", a, FeatureSet::Combined));
  CHECK(feature_cache_path({}, a, FeatureSet::Combined).empty());

  const auto first = Dataset::from_records({a}, dir / "cache", FeatureSet::Combined, 1);
  const auto second = Dataset::from_records({b}, dir / "cache", FeatureSet::Combined, 1);
  CHECK(first.features[0].frames == 6);
  CHECK(second.features[0].frames == 8);
  CHECK(second.features[0].data == assemble(load_wav_working_rate(b.audio_path)).data);
}

TEST_CASE("training rejects empty or oversized data") {
  TempDir dir;
  Transformer<float> model(toy_config(), 2);
  const auto va = toy_dataset(2, 4);
  CHECK_THROWS_AS(train(model, Dataset{}, va, toy_train_config(), dir.path()), Error);
  auto wide = toy_dataset(2, 5, 9);
  CHECK_THROWS_AS(train(model, wide, va, toy_train_config(), dir.path()), Error);
}

TEST_CASE("finetuning") {
  TempDir dir;
  const auto tr = toy_dataset(10, 6);
  const auto va = toy_dataset(4, 7);
  auto cfg = toy_train_config();
  Transformer<float> model(toy_config(), 4);
  const auto base = train(model, tr, va, cfg, dir / "base");

  SUBCASE("zero epochs keeps the weights") {
    cfg.max_epochs = 0;
    const auto r = finetune(base.best_checkpoint, tr, va, cfg, dir / "ft0");
    CHECK(r.epochs.empty());
    CHECK(flat_parameters(load_model(r.best_checkpoint)) == flat_parameters(load_model(base.best_checkpoint)));
  }
  SUBCASE("original data does not raise the best validation loss by more than delta") {
    cfg.max_epochs = 3;
    const auto r = finetune(base.best_checkpoint, tr, va, cfg, dir / "ft");
    CHECK(r.best_val_loss <= base.best_val_loss + TrainConfig{}.early_stop_delta);
  }
  SUBCASE("first update matches a fresh optimizer") {
    cfg.max_epochs = 1;
    cfg.batch_size = 10;
    auto expected = load_model(base.best_checkpoint);
    const auto order = epoch_order(tr.size(), cfg.seed, 1);
    std::vector<const FeatureStack*> f;
    std::vector<TokenSeq> t;
    for (auto i : order) {
      f.push_back(&tr.features[i]);
      t.push_back(tr.targets[i]);
    }
    const auto batch = make_batch(f, t);
    {
      ad::Tape<float> tape;
      ad::TapeScope<float> scope(tape);
      Rng dummy(0);
      tape.backward(expected.loss(batch, true, &dummy));
    }
    clip_grad_norm(expected.parameters(), cfg.clip_norm);
    AdamState fresh;
    adam_step(expected.parameters(), fresh, cfg.adam);
    const auto r = finetune(base.best_checkpoint, tr, va, cfg, dir / "ft1");
    Transformer<float> after(toy_config(), 0);
    load_checkpoint(dir / "ft1" / "last.ckpt", after);
    const auto a = flat_parameters(after), e = flat_parameters(expected);
    REQUIRE(a.size() == e.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(e[i]).epsilon(1e-5));
    CHECK(r.epochs.size() == 1);
  }
  SUBCASE("model fields that disagree with the checkpoint are rejected") {
    cfg.model_overrides["d_model"] = 32;
    try {
      finetune(base.best_checkpoint, tr, va, cfg, dir / "bad");
      FAIL("expected a checkpoint error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Checkpoint);
      CHECK(std::string(e.what()).find("d_model") != std::string::npos);
    }
  }
}
