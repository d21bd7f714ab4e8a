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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "spliceloc/audio.hpp"
#include "spliceloc/checkpoint.hpp"
#include "spliceloc/decode.hpp"
#include "spliceloc/error.hpp"
#include "spliceloc/features.hpp"
#include "spliceloc/forgery.hpp"
#include "spliceloc/manifest.hpp"
#include "spliceloc/metrics.hpp"
#include "spliceloc/model.hpp"
#include "spliceloc/scenario.hpp"
#include "spliceloc/spliceloc.h"
#include "spliceloc/training.hpp"
#include "spliceloc/vocab.hpp"
#include "support/match_oracle.hpp"
#include "support/op_cases.hpp"
#include "support/synth.hpp"

namespace fs = std::filesystem;
using namespace spliceloc;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void expect(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back((ok ? "" : "FAILED ") + what);
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double wall_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double cpu_seconds() { return static_cast<double>(std::clock()) / CLOCKS_PER_SEC; }

double power(const std::vector<float>& x) {
  double s = 0.0;
  for (float v : x) s += double(v) * v;
  return s / static_cast<double>(std::max<std::size_t>(1, x.size()));
}

std::vector<double> direct_convolution(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

std::vector<double> random_vector(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

FeatureStack random_stack(std::size_t frames, std::size_t width, Rng& rng) {
  FeatureStack f;
  f.frames = frames;
  f.width = width;
  f.data.resize(frames * width);
  for (auto& v : f.data) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return f;
}

// 1. architecture

Outcome architecture(const fs::path&) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const ModelConfig defaults;
  o.expect(defaults.d_model == 256 && defaults.n_encoder_layers == 5 && defaults.n_decoder_layers == 5 &&
               defaults.n_heads == 8 &&
               defaults.d_ff == 512 && defaults.vocab == 93 && defaults.input_width == 277,
           "default config is d=256, 5+5 layers, 8 heads, FF 512, vocab 93, input 277");
  Transformer<float> model(defaults, 1);
  const auto params = model.parameter_count();
  o.expect(params >= 5'000'000 && params <= 9'000'000, "trainable parameters " + std::to_string(params) + " in [5M, 9M]");

  Rng rng(5);
  const auto features = random_stack(90, 277, rng);
  const std::vector<int> a{1, 10, 20, 30, 2};
  const auto la = model.forward(make_single(features, a));
  o.expect(la.shape() == ad::Shape{1, 5, 93}, "logits shape " + ad::shape_string(la.shape()) + " for 90x277 input");
  const auto l3 = model.forward(make_single(random_stack(6, 277, rng), {1, 10, 20}));
  o.expect(l3.shape() == ad::Shape{1, 3, 93}, "logits shape " + ad::shape_string(l3.shape()) + " for 6x277 input");

  bool causal = true, later_changes = true;
  for (std::size_t pos = 1; pos < a.size(); ++pos) {
    auto b = a;
    b[pos] = 3 + static_cast<int>(rng.index(90));
    if (b[pos] == a[pos]) b[pos] = a[pos] + 1;
    const auto lb = model.forward(make_single(features, b));
    for (std::size_t j = 0; j < pos * 93; ++j) causal = causal && la.data()[j] == lb.data()[j];
    bool changed = false;
    for (std::size_t j = pos * 93; j < (pos + 1) * 93; ++j) changed = changed || la.data()[j] != lb.data()[j];
    later_changes = later_changes && changed;
  }
  o.expect(causal, "perturbing token t leaves logits at positions < t bit-identical");
  o.expect(later_changes, "perturbing token t changes logits at position t");

  bool rejects = false;
  try {
    model.forward(make_single(random_stack(91, 277, rng), {1}));
  } catch (const Error&) {
    rejects = true;
  }
  o.expect(rejects, "91 input frames are rejected");
  const double secs = wall_since(t0);
  o.expect(secs < 60.0, "runtime " + fmt("%.1f s", secs) + " < 60 s");
  return o;
}

// 2. geometry

Outcome geometry(const fs::path& work) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto pool_dir = work / "pool";
  synth::write_pool(pool_dir, {.speakers = 1, .recordings = 2, .min_duration_s = 30.0, .max_duration_s = 32.0, .seed = 8});
  ScenarioConfig scenario = scenario_preset("single-clean");
  scenario.rir = false;
  AssetStore assets(SpeakerPool::load(pool_dir), scenario);
  const auto& ids = assets.pool().entries.begin()->second;

  auto render_span = [&](double seconds, std::size_t expected) {
    ForgerySpec spec;
    spec.n_sources = 2;
    spec.source_ids = {ids[0], ids[1]};
    spec.cut_points = {{1.0, 1.0 + seconds / 2}, {2.0, 2.0 + seconds / 2}};
    spec.seed = 1;
    const auto rendered = render(spec, assets);
    if (!rendered) {
      o.expect(false, fmt("%.0f s spec renders", seconds));
      return;
    }
    const auto wav = work / ("sample_" + std::to_string(expected) + ".wav");
    write_wav(wav, rendered->audio);
    const auto stack = assemble(load_wav_working_rate(wav));
    o.expect(std::abs(rendered->duration - seconds) < 1e-9, fmt("generated duration %.3f s", rendered->duration));
    o.expect(stack.frames == expected && stack.width == kFeatureWidth,
             fmt("%.0f s -> ", seconds) + std::to_string(stack.frames) + " x " + std::to_string(stack.width) +
                 " (expected " + std::to_string(expected) + " x 277)");
  };
  render_span(45.0, 90);
  render_span(3.0, 6);
  o.expect(kMaxFrames == 90, "model source length limit is 90 frames");
  const double secs = wall_since(t0);
  o.expect(secs < 30.0, "runtime " + fmt("%.1f s", secs) + " < 30 s");
  return o;
}

// 3. vocabulary

Outcome vocabulary(const fs::path&) {
  Outcome o;
  o.expect(SpliceVocab::kSize == 93, "vocabulary size " + std::to_string(SpliceVocab::kSize) + " == 93");
  int positions = 0;
  bool grid = true;
  for (int t = 0; t < SpliceVocab::kSize; ++t) {
    if (!SpliceVocab::is_position(t)) continue;
    const double expected = 0.5 * (positions + 1);
    grid = grid && SpliceVocab::position(t) == expected && SpliceVocab::token_for(expected) == t;
    ++positions;
  }
  o.expect(positions == 89, std::to_string(positions) + " position tokens == 89");
  o.expect(grid, "position tokens are 0.5, 1.0, ..., 44.5 s in 0.5 s steps");
  o.expect(SpliceVocab::position(SpliceVocab::kFirstPosition) == 0.5 &&
               SpliceVocab::position(SpliceVocab::kSize - 1) == 44.5,
           "first position 0.5 s, last position 44.5 s");
  const auto symbols = SpliceVocab::symbols();
  o.expect(symbols.size() == 93 && std::set<std::string>(symbols.begin(), symbols.end()).size() == 93,
           "93 distinct symbols");
  o.expect(!SpliceVocab::is_position(SpliceVocab::kPad) && !SpliceVocab::is_position(SpliceVocab::kBos) &&
               !SpliceVocab::is_position(SpliceVocab::kEos) && !SpliceVocab::is_position(SpliceVocab::kNone),
           "four special tokens: pad, bos, eos, no-splice");
  return o;
}

// 4. gradients

Outcome gradients(const fs::path&) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  constexpr int kInstances = 100;
  auto run = [&](const std::vector<testing::OpCase>& cases, std::uint64_t seed) {
    Rng rng(seed);
    for (const auto& c : cases) {
      double worst = 0.0;
      int failed = 0;
      for (int i = 0; i < kInstances; ++i) {
        const auto r = c.run(rng);
        worst = std::max(worst, r.worst);
        failed += !r.ok();
      }
      if (failed > 0)
        o.expect(false, c.name + ": " + std::to_string(failed) + " of 100 instances outside tolerance" +
                            fmt(" (worst ratio %.3g)", worst));
    }
    return cases.size();
  };
  const auto ops = run(testing::tensor_op_cases(), 404);
  const auto models = run(testing::model_cases(), 808);
  if (o.pass)
    o.notes.push_back(std::to_string(ops) + " operation cases (tol 1e-4) and " + std::to_string(models) +
                      " model cases incl. end-to-end (tol 1e-3), 100 instances each");
  const double secs = wall_since(t0);
  o.expect(secs < 300.0, "runtime " + fmt("%.1f s", secs) + " < 300 s");
  return o;
}

// 5. DSP oracles

Outcome dsp(const fs::path&) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(55);

  double worst_rms = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> sizes{{16000, 4000}, {10000, 512}, {1, 1}, {7, 300}};
  for (int i = 0; i < 40; ++i) sizes.emplace_back(1 + rng.index(2000), 1 + rng.index(400));
  for (const auto& [na, nb] : sizes) {
    const auto a = random_vector(na, rng), b = random_vector(nb, rng);
    const auto f = fft_convolve(a, b);
    const auto d = direct_convolution(a, b);
    double se = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) se += (f[i] - d[i]) * (f[i] - d[i]);
    worst_rms = f.size() == d.size() ? std::max(worst_rms, std::sqrt(se / double(d.size()))) : 1.0;
  }
  o.expect(worst_rms < 1e-6, "FFT vs direct convolution worst RMS " + fmt("%.2e", worst_rms) + " < 1e-6");

  double worst_dct = 0.0;
  for (std::size_t n : {256u, 20u, 7u, 1u, 333u}) {
    for (int i = 0; i < 20; ++i) {
      const auto x = random_vector(n, rng);
      const auto back = dct_iii(dct_ii(x));
      for (std::size_t k = 0; k < n; ++k) worst_dct = std::max(worst_dct, std::abs(back[k] - x[k]));
    }
  }
  o.expect(worst_dct < 1e-9, "DCT-III(DCT-II(x)) worst error " + fmt("%.2e", worst_dct) + " < 1e-9");

  double worst_snr = 0.0;
  const auto file_noise = synth::noise_bed(2.7, 77);
  for (double snr : {-10.0, -3.0, 0.0, 10.0, 20.0, 35.0, 50.0}) {
    const auto sig = synth::speech_like(5.0, static_cast<std::uint64_t>(100 + snr), 160.0);
    for (const auto& noise : {white_noise(sig.size(), 9), file_noise}) {
      const auto mix = add_noise(sig, noise, snr);
      std::vector<float> residual(sig.size());
      for (std::size_t i = 0; i < sig.size(); ++i)
        residual[i] = static_cast<float>(double(mix.audio.samples[i]) / mix.scale - sig.samples[i]);
      const double realized = 10.0 * std::log10(power(sig.samples) / power(residual));
      worst_snr = std::max(worst_snr, std::abs(realized - snr));
    }
  }
  o.expect(worst_snr < 0.1, "realized SNR worst deviation " + fmt("%.4f dB", worst_snr) + " < 0.1 dB (white and file noise)");

  double worst_centroid = 0.0;
  for (double hz : {200.0, 440.0, 1000.0, 2000.0, 3150.0, 5000.0, 7000.0}) {
    const auto c = spectral_centroid(synth::tone(hz, 2.0, 0.5));
    for (std::size_t f = 0; f < c.rows; ++f) worst_centroid = std::max(worst_centroid, std::abs(c.at(f, 0) - hz) / hz);
  }
  o.expect(worst_centroid < 0.01, "tone centroid worst relative error " + fmt("%.3e", worst_centroid) + " < 1%");
  const double secs = wall_since(t0);
  o.expect(secs < 120.0, "runtime " + fmt("%.1f s", secs) + " < 120 s");
  return o;
}

// 6. metric oracles

Outcome metric_oracles(const fs::path& work) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(6006);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const auto truth = testing::random_points(rng, 4, 8.0);
    const auto pred = testing::random_points(rng, 4, 8.0);
    const double w = std::vector<double>{0.25, 0.5, 1.0, 2.0, 3.0}[rng.index(5)];
    const auto pairs = match_points(truth, pred, w);
    const auto oracle = testing::exhaustive_matching(truth, pred, w);
    double cost = 0.0;
    bool in_window = true;
    for (const auto& p : pairs) {
      cost += std::abs(p.truth - p.pred);
      in_window = in_window && std::abs(p.truth - p.pred) <= w + 1e-9;
    }
    if (pairs.size() != oracle.count || std::abs(cost - oracle.cost) > 1e-9 || !in_window) ++mismatches;
  }
  o.expect(mismatches == 0, "matching equals exhaustive min-cost maximum matching on 10000 instances (" +
                                std::to_string(mismatches) + " mismatches)");

  const auto pool_dir = work / "pool";
  synth::write_pool(pool_dir, {.speakers = 4, .recordings = 3, .seed = 61});
  ScenarioConfig scenario = scenario_preset("multisplice-uniform");
  scenario.splice_mode = SpliceCountMode::Balanced;
  AssetStore assets(SpeakerPool::load(pool_dir), scenario);
  const auto report = generate_dataset(assets, scenario, {.count = 120, .seed = 606, .out_dir = work / "uniform", .threads = 0});
  const auto records = read_manifest(report.manifest);
  std::vector<int> counts(6, 0);
  std::vector<SampleEval> evals;
  const std::vector<double> windows{0.5, 1.0, 2.0, 3.0};
  for (const auto& r : records) {
    ++counts[static_cast<std::size_t>(std::min<std::size_t>(5, r.grid_labels.size()))];
    evals.push_back(score_sample(r.id, target_sequence(r.grid_labels), {{target_sequence({}), 0.0, false}}, windows));
  }
  const auto agg = aggregate(evals, windows, 1);
  bool uniform = records.size() == 120;
  for (int c : counts) uniform = uniform && c == 20;
  o.expect(uniform, "generated manifest holds 120 records, 20 per splice count 0..5");
  bool sixth = true;
  std::string jr;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    sixth = sixth && std::abs(agg.jaccard[i] - 1.0 / 6.0) <= 0.005 && std::abs(agg.recall[i] - 1.0 / 6.0) <= 0.005;
    jr += fmt(" J%g", windows[i]) + fmt("=%.2f%%", 100 * agg.jaccard[i]) + fmt(" R=%.2f%%", 100 * agg.recall[i]);
  }
  o.expect(sixth, "always-none predictor:" + jr + " within 16.7% +- 0.5pp");

  const auto iid = scenario_preset("multisplice-uniform");
  std::size_t zeros = 0;
  constexpr int kDraws = 60000;
  for (int i = 0; i < kDraws; ++i) zeros += draw_splice_count(iid, 606, static_cast<std::uint64_t>(i)) == 0;
  const double share = double(zeros) / kDraws;
  o.expect(std::abs(share - 1.0 / 6.0) <= 0.005,
           "i.i.d. uniform preset: no-splice share " + fmt("%.2f%%", 100 * share) + " over 60000 draws");
  const double secs = wall_since(t0);
  o.expect(secs < 120.0, "runtime " + fmt("%.1f s", secs) + " < 120 s");
  return o;
}

// 7. learning smoke test

double uniform_chance(const Dataset& data) {
  double sum = 0.0;
  for (const auto& r : data.records) {
    const auto grid = static_cast<std::size_t>(std::ceil(r.duration / SpliceVocab::kStep - 1e-9)) - 1;
    sum += 1.0 / static_cast<double>(std::max<std::size_t>(1, grid));
  }
  return sum / static_cast<double>(data.size());
}

double top1(const Transformer<float>& model, const Dataset& data) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i) hits += decode_greedy(model, data.features[i]).tokens == data.targets[i];
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

Outcome learning(const fs::path& work) {
  Outcome o;
  const double cpu0 = cpu_seconds();
  const auto pool_dir = work / "pool";
  synth::write_pool(pool_dir, {.speakers = 6, .recordings = 4, .min_duration_s = 6.0, .max_duration_s = 10.0, .seed = 3});
  ScenarioConfig scenario = scenario_preset("single-clean");
  scenario.rir = false;
  scenario.max_duration_s = 10.0;
  AssetStore assets(SpeakerPool::load(pool_dir), scenario);
  const auto train_gen = generate_dataset(assets, scenario, {.count = 200, .seed = 71, .out_dir = work / "train", .threads = 0});
  const auto val_gen = generate_dataset(assets, scenario, {.count = 50, .seed = 73, .out_dir = work / "val", .threads = 0});
  const auto held_gen = generate_dataset(assets, scenario, {.count = 50, .seed = 72, .out_dir = work / "held", .threads = 0});
  const auto train_set = Dataset::load(train_gen.manifest, work / "cache", FeatureSet::Combined);
  const auto val_set = Dataset::load(val_gen.manifest, work / "cache", FeatureSet::Combined);
  const auto held_set = Dataset::load(held_gen.manifest, work / "cache", FeatureSet::Combined);

  TrainConfig config;
  config.model.d_model = 32;
  config.model.n_heads = 4;
  config.model.n_encoder_layers = 2;
  config.model.n_decoder_layers = 2;
  config.model.d_ff = 64;
  config.adam.learning_rate = 1e-3;
  config.batch_size = 16;
  config.max_epochs = 100;
  config.early_stop_patience = config.max_epochs;
  config.seed = 7;
  auto initial = initial_model(config);
  const auto report = train(initial, train_set, val_set, config, work / "run");
  const auto model = load_model(report.last_checkpoint);

  const double train_acc = top1(model, train_set);
  const double held_acc = top1(model, held_set);
  const double chance = uniform_chance(held_set);
  o.notes.push_back("200 train / 50 validation / 50 held-out single-splice samples, clean, no RIR, <= 10 s; d=32, 2+2 layers, " +
                    std::to_string(report.epochs.size()) + " epochs, final weights");
  o.expect(train_acc >= 0.9, "training top-1 " + fmt("%.1f%%", 100 * train_acc) + " >= 90%");
  o.expect(held_acc >= 2.0 * chance, "held-out top-1 " + fmt("%.1f%%", 100 * held_acc) + " >= 2 x chance (" +
                                         fmt("%.1f%%", 100 * chance) + ", uniform guess over grid positions)");
  const double cpu = cpu_seconds() - cpu0;
  o.expect(cpu < 1800.0, "CPU time " + fmt("%.0f s", cpu) + " < 1800 s");
  return o;
}

// 8. determinism

Outcome determinism(const fs::path& work) {
  Outcome o;
  const auto pool_dir = work / "pool";
  synth::write_pool(pool_dir, {.speakers = 3, .recordings = 3, .seed = 88});

  sl_scenario* sc = nullptr;
  if (sl_scenario_load("multisplice-train", &sc) != SL_OK) {
    o.expect(false, std::string("scenario load: ") + sl_last_error());
    return o;
  }
  auto generate = [&](const std::string& name, unsigned threads) {
    const auto out = work / name;
    sl_generate_options opts{pool_dir.c_str(), out.c_str(), 24, 8080, threads, nullptr};
    sl_generate_result res{};
    const auto st = sl_generate(sc, &opts, &res);
    if (st != SL_OK) o.expect(false, std::string("generate: ") + sl_last_error());
    return out;
  };
  const auto a = generate("gen_a", 1), b = generate("gen_b", 1), c = generate("gen_c", 2);
  sl_scenario_free(sc);
  bool identical = slurp(a / "manifest.jsonl") == slurp(b / "manifest.jsonl") &&
                   slurp(a / "manifest.jsonl") == slurp(c / "manifest.jsonl") && !slurp(a / "manifest.jsonl").empty();
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(a / "audio")) {
    const auto bytes = slurp(e.path());
    identical = identical && bytes == slurp(b / "audio" / e.path().filename()) &&
                bytes == slurp(c / "audio" / e.path().filename());
    ++files;
  }
  o.expect(identical && files == 24, "generate twice (and with 2 threads): byte-identical manifest and " +
                                         std::to_string(files) + " WAV files");

  sl_train_config* cfg = nullptr;
  sl_train_config_load(nullptr, &cfg);
  const auto st = sl_train_config_apply(cfg,
                                        "model.d_model = 16\nmodel.n_heads = 2\nmodel.n_encoder_layers = 1\n"
                                        "model.n_decoder_layers = 1\nmodel.d_ff = 32\nbatch_size = 6\n"
                                        "max_epochs = 6\nearly_stop_patience = 6\nlearning_rate = 1e-3\nseed = 42\n");
  if (st != SL_OK) o.expect(false, std::string("train config: ") + sl_last_error());
  std::vector<std::vector<double>> runs;
  for (const char* name : {"train_a", "train_b"}) {
    const auto manifest = (a / "manifest.jsonl").string();
    const auto out = (work / name).string();
    if (sl_train(cfg, manifest.c_str(), manifest.c_str(), out.c_str(), nullptr, nullptr, nullptr) != SL_OK) {
      o.expect(false, std::string("train: ") + sl_last_error());
      break;
    }
    std::vector<double> losses;
    std::ifstream in(work / name / "train_report.jsonl");
    std::string line;
    while (std::getline(in, line)) {
      const auto j = nlohmann::json::parse(line);
      if (j.contains("train_loss")) {
        losses.push_back(j["train_loss"].get<double>());
        losses.push_back(j["val_loss"].get<double>());
      }
    }
    runs.push_back(losses);
  }
  sl_train_config_free(cfg);
  double worst = 0.0;
  bool same_length = runs.size() == 2 && runs[0].size() == runs[1].size() && runs[0].size() == 12;
  if (same_length)
    for (std::size_t i = 0; i < runs[0].size(); ++i) worst = std::max(worst, std::abs(runs[0][i] - runs[1][i]));
  o.expect(same_length && worst <= 1e-6,
           "train twice: 6 epochs of train/val losses, worst difference " + fmt("%.1e", worst) + " <= 1e-6");
  return o;
}

// 9. scenario coverage

Outcome scenarios(const fs::path& work) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto pool_dir = work / "pool";
  synth::write_pool(pool_dir, {.speakers = 4, .recordings = 3, .seed = 99});
  const auto noise_path = work / "street.wav";
  write_wav(noise_path, synth::noise_bed(30.0, 98));
  std::vector<std::string> names{"single-clean", "single-degraded", "multisplice-train", "multisplice-uniform"};
  for (int k = 0; k <= 5; ++k) names.push_back("multicompression-" + std::to_string(k));
  names.push_back("intersplicing");
  names.push_back("realnoise-street");
  std::size_t valid = 0;
  for (const auto& name : names) {
    try {
      auto scenario = scenario_preset(name);
      if (scenario.noise == NoiseMode::File) scenario.noise_file = noise_path;
      scenario.validate();
      AssetStore assets(SpeakerPool::load(pool_dir), scenario);
      const auto report = generate_dataset(assets, scenario, {.count = 50, .seed = 909, .out_dir = work / name, .threads = 0});
      const auto records = read_manifest(report.manifest);
      std::size_t bad = records.size() == 50 ? 0 : 1;
      for (const auto& r : records) bad += !record_problems(r).empty();
      for (const auto& ins : inspect_manifest(report.manifest)) bad += !ins.problems.empty();
      if (bad == 0)
        ++valid;
      else
        o.expect(false, name + ": " + std::to_string(records.size()) + " records, " + std::to_string(bad) + " problems");
    } catch (const std::exception& e) {
      o.expect(false, name + ": " + e.what());
    }
  }
  o.notes.push_back(std::to_string(valid) + " of " + std::to_string(names.size()) +
                    " presets produce 50 valid records (invariants and audio re-check)");
  const double secs = wall_since(t0);
  o.expect(secs < 300.0, "runtime " + fmt("%.1f s", secs) + " < 300 s");
  return o;
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome(const fs::path&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "architecture fidelity", architecture}, {2, "geometry anchor", geometry},
      {3, "vocabulary anchor", vocabulary},      {4, "gradient suite", gradients},
      {5, "DSP oracles", dsp},                   {6, "metric oracles", metric_oracles},
      {7, "learning smoke test", learning},      {8, "determinism", determinism},
      {9, "scenario coverage", scenarios}};
  std::set<int> selected;
  bool verbose = false;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "-v" || arg == "--verbose")
      verbose = true;
    else
      selected.insert(std::stoi(arg));
  }

  const auto root = fs::temp_directory_path() / "spliceloc-acceptance";
  bool all = true;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto work = root / std::to_string(c.id);
    fs::remove_all(work);
    fs::create_directories(work);
    const auto t0 = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run(work);
    } catch (const std::exception& e) {
      outcome.expect(false, std::string("exception: ") + e.what());
    }
    all = all && outcome.pass;
    std::string summary;
    for (const auto& n : outcome.notes)
      if (verbose || n.rfind("FAILED", 0) == 0 || outcome.pass) summary += (summary.empty() ? "" : "; ") + n;
    std::printf("[%s] %d %s (%.1f s): %s\n", outcome.pass ? "PASS" : "FAIL", c.id, c.title, wall_since(t0),
                summary.c_str());
    std::fflush(stdout);
    fs::remove_all(work);
  }
  fs::remove_all(root);
  return all ? 0 : 1;
}
