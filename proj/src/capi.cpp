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

#include "spliceloc/spliceloc.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <new>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "spliceloc/audio.hpp"
#include "spliceloc/checkpoint.hpp"
#include "spliceloc/config_file.hpp"
#include "spliceloc/decode.hpp"
#include "spliceloc/error.hpp"
#include "spliceloc/features.hpp"
#include "spliceloc/forgery.hpp"
#include "spliceloc/manifest.hpp"
#include "spliceloc/metrics.hpp"
#include "spliceloc/scenario.hpp"
#include "spliceloc/training.hpp"

struct sl_scenario {
  spliceloc::ScenarioConfig config;
};

struct sl_train_config {
  spliceloc::TrainConfig config;
  std::string text;  // accumulated key = value lines
};

struct sl_model {
  spliceloc::Transformer<float> model;
};

struct sl_detection {
  double duration = 0.0;
  std::vector<spliceloc::Hypothesis> hypotheses;
  std::vector<std::vector<double>> positions;
  std::vector<std::string> texts;
};

struct sl_report {
  spliceloc::EvalResult result;
  std::string summary;
};

struct sl_inspection {
  std::string text;
  std::size_t items = 0;
  std::size_t problems = 0;
};

namespace {

using namespace spliceloc;

thread_local std::string g_last_error;

sl_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return SL_ERR_INVALID_ARGUMENT;
    case ErrorKind::Format: return SL_ERR_FORMAT;
    case ErrorKind::Unsupported: return SL_ERR_UNSUPPORTED;
    case ErrorKind::Io: return SL_ERR_IO;
    case ErrorKind::Contract: return SL_ERR_CONTRACT;
    case ErrorKind::Checkpoint: return SL_ERR_CHECKPOINT;
    case ErrorKind::Subprocess: return SL_ERR_SUBPROCESS;
    case ErrorKind::Degenerate: return SL_ERR_DEGENERATE;
    case ErrorKind::Resolution: return SL_ERR_RESOLUTION;
    case ErrorKind::Numeric: return SL_ERR_NUMERIC;
  }
  return SL_ERR_INTERNAL;
}

template <typename F>
sl_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return SL_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    g_last_error = e.what();
    return SL_ERR_IO;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SL_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SL_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return SL_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) fail(ErrorKind::InvalidArgument, std::string(what) + " must not be NULL");
}

std::string format_double(double v, const char* spec = "%.4f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string report_summary(const EvalResult& r) {
  const auto& a = r.aggregates;
  std::ostringstream out;
  out << "samples        " << a.samples << '\n';
  for (std::size_t k = 0; k < a.topn.size(); ++k) out << "top-" << k + 1 << " accuracy " << format_double(a.topn[k]) << '\n';
  for (std::size_t k = 0; k < a.windows.size(); ++k)
    out << "w=" << format_double(a.windows[k], "%g") << "  J " << format_double(a.jaccard[k]) << "  R "
        << format_double(a.recall[k]) << '\n';
  out << "mean d_sp      " << (a.mean_d_sp ? format_double(*a.mean_d_sp) + " s" : std::string("n/a")) << " over "
      << a.d_sp_count << " samples, " << a.d_sp_excluded << " excluded\n";
  out << "truncated      " << a.truncated << '\n';
  return out.str();
}

FeatureSet feature_set_for(const Transformer<float>& model) {
  return model.config().input_width == feature_width(FeatureSet::MelOnly) ? FeatureSet::MelOnly : FeatureSet::Combined;
}

sl_status run_training(const sl_train_config* config, const char* checkpoint, const char* train_manifest,
                       const char* val_manifest, const char* out_dir, sl_epoch_callback callback, void* user,
                       sl_train_summary* summary) {
  return guarded([&] {
    need(config, "config");
    need(train_manifest, "train_manifest");
    need(val_manifest, "val_manifest");
    need(out_dir, "out_dir");
    const auto& cfg = config->config;
    const auto train_set = Dataset::load(train_manifest, cfg.cache_dir, cfg.features, cfg.threads);
    const auto val_set = Dataset::load(val_manifest, cfg.cache_dir, cfg.features, cfg.threads);
    TrainHooks hooks;
    if (callback)
      hooks.on_epoch = [&](const EpochRecord& r) {
        const sl_epoch_info info{r.epoch, r.train_loss, r.val_loss, r.wall_seconds, r.improved, r.new_best};
        callback(&info, user);
      };
    TrainReport report;
    if (checkpoint) {
      report = finetune(checkpoint, train_set, val_set, cfg, out_dir, hooks);
    } else {
      auto model = initial_model(cfg);
      report = train(model, train_set, val_set, cfg, out_dir, hooks);
    }
    if (summary) {
      summary->epochs = report.epochs.size();
      summary->best_epoch = report.best_epoch;
      summary->best_val_loss = report.best_val_loss;
      summary->early_stopped = report.stop_reason == "early_stop";
    }
  });
}

}  // namespace

extern "C" {

const char* sl_last_error(void) { return g_last_error.c_str(); }

const char* sl_status_name(sl_status status) {
  switch (status) {
    case SL_OK: return "ok";
    case SL_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case SL_ERR_FORMAT: return "format";
    case SL_ERR_UNSUPPORTED: return "unsupported";
    case SL_ERR_IO: return "io";
    case SL_ERR_CONTRACT: return "contract";
    case SL_ERR_CHECKPOINT: return "checkpoint";
    case SL_ERR_SUBPROCESS: return "subprocess";
    case SL_ERR_DEGENERATE: return "degenerate";
    case SL_ERR_RESOLUTION: return "resolution";
    case SL_ERR_NUMERIC: return "numeric";
    case SL_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* sl_version(void) { return SPLICELOC_VERSION; }

sl_status sl_scenario_load(const char* name_or_path, sl_scenario** out) {
  return guarded([&] {
    need(name_or_path, "name_or_path");
    need(out, "out");
    *out = nullptr;
    const std::string name(name_or_path);
    auto handle = std::make_unique<sl_scenario>();
    if (is_preset_name(name) && !std::filesystem::exists(name))
      handle->config = scenario_preset(name);
    else
      handle->config = load_scenario(name);
    *out = handle.release();
  });
}

sl_status sl_scenario_apply(sl_scenario* scenario, const char* kv_text) {
  return guarded([&] {
    need(scenario, "scenario");
    need(kv_text, "kv_text");
    const auto kv = KeyValueConfig::parse(kv_text, "scenario overrides");
    scenario->config = apply_scenario_overrides(scenario->config, kv, std::filesystem::current_path());
  });
}

const char* sl_scenario_name(const sl_scenario* scenario) { return scenario ? scenario->config.name.c_str() : ""; }

void sl_scenario_free(sl_scenario* scenario) { delete scenario; }

const char* sl_preset_help(void) {
  static const std::string help = preset_help();
  return help.c_str();
}

sl_status sl_generate(const sl_scenario* scenario, const sl_generate_options* options, sl_generate_result* result) {
  return guarded([&] {
    need(scenario, "scenario");
    need(options, "options");
    need(options->pool_dir, "options->pool_dir");
    need(options->out_dir, "options->out_dir");
    scenario->config.validate();
    AssetStore assets(SpeakerPool::load(options->pool_dir), scenario->config);
    GenerateOptions g;
    g.count = options->count;
    g.seed = options->seed;
    g.out_dir = options->out_dir;
    g.threads = options->threads ? options->threads : std::max(1u, std::thread::hardware_concurrency());
    if (options->codec_command) g.codec_command = options->codec_command;
    const auto report = generate_dataset(assets, scenario->config, g);
    if (result) {
      result->written = report.written;
      result->skipped = report.skipped.size();
    }
  });
}

sl_status sl_train_config_load(const char* path, sl_train_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    auto handle = std::make_unique<sl_train_config>();
    if (path) {
      std::ifstream in(path, std::ios::binary);
      if (!in) fail(ErrorKind::Io, std::string("cannot open training config ") + path);
      std::stringstream ss;
      ss << in.rdbuf();
      handle->text = ss.str();
      handle->config = TrainConfig::from_config(KeyValueConfig::parse(handle->text, path));
    } else {
      handle->config = TrainConfig::from_config(KeyValueConfig::parse(""));
    }
    *out = handle.release();
  });
}

sl_status sl_train_config_apply(sl_train_config* config, const char* kv_text) {
  return guarded([&] {
    need(config, "config");
    need(kv_text, "kv_text");
    const std::string merged = config->text + "\n" + kv_text;
    config->config = TrainConfig::from_config(KeyValueConfig::parse(merged, "training config"));
    config->text = merged;
  });
}

void sl_train_config_free(sl_train_config* config) { delete config; }

sl_status sl_train(const sl_train_config* config, const char* train_manifest, const char* val_manifest,
                   const char* out_dir, sl_epoch_callback callback, void* user, sl_train_summary* summary) {
  return run_training(config, nullptr, train_manifest, val_manifest, out_dir, callback, user, summary);
}

sl_status sl_finetune(const sl_train_config* config, const char* checkpoint, const char* train_manifest,
                      const char* val_manifest, const char* out_dir, sl_epoch_callback callback, void* user,
                      sl_train_summary* summary) {
  if (!checkpoint) {
    g_last_error = "checkpoint must not be NULL";
    return SL_ERR_INVALID_ARGUMENT;
  }
  return run_training(config, checkpoint, train_manifest, val_manifest, out_dir, callback, user, summary);
}

sl_status sl_model_load(const char* checkpoint, sl_model** out) {
  return guarded([&] {
    need(checkpoint, "checkpoint");
    need(out, "out");
    *out = nullptr;
    *out = new sl_model{load_model(checkpoint)};
  });
}

sl_status sl_model_info_get(const sl_model* model, sl_model_info* info) {
  return guarded([&] {
    need(model, "model");
    need(info, "info");
    const auto& c = model->model.config();
    *info = {c.d_model, c.n_heads, c.n_encoder_layers, c.n_decoder_layers, c.d_ff,
             c.input_width, c.vocab, c.max_tgt_len, model->model.parameter_count()};
  });
}

void sl_model_free(sl_model* model) { delete model; }

sl_status sl_detect(const sl_model* model, const char* audio_path, size_t topn, size_t beam, sl_detection** out) {
  return guarded([&] {
    need(model, "model");
    need(audio_path, "audio_path");
    need(out, "out");
    *out = nullptr;
    if (topn == 0) fail(ErrorKind::InvalidArgument, "topn must be at least 1");
    if (beam != 0 && beam < topn) fail(ErrorKind::InvalidArgument, "beam width must be at least topn");
    const auto audio = load_wav_working_rate(audio_path);
    if (audio.duration() > kMaxFeatureDuration + 1e-9)
      fail(ErrorKind::Contract, std::string(audio_path) + " lasts " + format_double(audio.duration(), "%.2f") +
                                    " s but the model accepts at most 45 s; split it into segments of at most 45 s "
                                    "and run detect on each segment");
    const auto features = assemble(audio, feature_set_for(model->model));
    auto d = std::make_unique<sl_detection>();
    d->duration = audio.duration();
    d->hypotheses = decode_topn(model->model, features, topn, beam);
    if (d->hypotheses.size() > topn) d->hypotheses.resize(topn);
    for (const auto& h : d->hypotheses) {
      d->positions.push_back(positions_of(h.tokens));
      d->texts.push_back(to_string(h.tokens));
    }
    *out = d.release();
  });
}

size_t sl_detection_count(const sl_detection* detection) { return detection ? detection->hypotheses.size() : 0; }

double sl_detection_duration(const sl_detection* detection) { return detection ? detection->duration : 0.0; }

sl_status sl_detection_get(const sl_detection* detection, size_t index, sl_hypothesis* out) {
  return guarded([&] {
    need(detection, "detection");
    need(out, "out");
    if (index >= detection->hypotheses.size())
      fail(ErrorKind::InvalidArgument, "hypothesis index " + std::to_string(index) + " out of range");
    const auto& h = detection->hypotheses[index];
    const auto& p = detection->positions[index];
    *out = {h.score, h.log_prob, h.truncated ? 1 : 0, p.size(), p.empty() ? nullptr : p.data(),
            detection->texts[index].c_str()};
  });
}

void sl_detection_free(sl_detection* detection) { delete detection; }

sl_status sl_evaluate(const sl_model* model, const char* manifest, const sl_eval_options* options, sl_report** out) {
  return guarded([&] {
    need(model, "model");
    need(manifest, "manifest");
    need(out, "out");
    *out = nullptr;
    EvalOptions o;
    std::string cache_dir;
    const FeatureSet set = feature_set_for(model->model);
    if (options) {
      if (options->windows) o.windows.assign(options->windows, options->windows + options->n_windows);
      if (options->topn) o.topn = options->topn;
      o.beam = options->beam;
      o.threads = options->threads;
      if (options->cache_dir) cache_dir = options->cache_dir;
    }
    for (double w : o.windows)
      if (!(w >= 0.0)) fail(ErrorKind::InvalidArgument, "tolerance windows must be non-negative");
    if (o.beam != 0 && o.beam < o.topn) fail(ErrorKind::InvalidArgument, "beam width must be at least topn");
    const auto data = Dataset::load(manifest, cache_dir, set, o.threads);
    auto r = std::make_unique<sl_report>();
    r->result = evaluate(model->model, data, o);
    r->summary = report_summary(r->result);
    *out = r.release();
  });
}

sl_status sl_report_load(const char* path, sl_report** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    auto r = std::make_unique<sl_report>();
    r->result = read_report(path);
    r->summary = report_summary(r->result);
    *out = r.release();
  });
}

sl_status sl_report_write_json(const sl_report* report, const char* path) {
  return guarded([&] {
    need(report, "report");
    need(path, "path");
    write_report(report->result, path);
  });
}

sl_status sl_report_write_csv(const sl_report* report, const char* aggregate_path, const char* samples_path) {
  return guarded([&] {
    need(report, "report");
    if (aggregate_path) write_aggregate_csv(report->result, aggregate_path);
    if (samples_path) write_samples_csv(report->result, samples_path);
  });
}

sl_status sl_report_write_svg(const sl_report* report, const char* path) {
  return guarded([&] {
    need(report, "report");
    need(path, "path");
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream svg(p, std::ios::trunc);
    svg << render_svg(report->result.aggregates);
    if (!svg) fail(ErrorKind::Io, "cannot write " + p.string());
  });
}

const char* sl_report_summary(const sl_report* report) { return report ? report->summary.c_str() : ""; }

size_t sl_report_sample_count(const sl_report* report) { return report ? report->result.samples.size() : 0; }

sl_status sl_report_topn(const sl_report* report, size_t n, double* accuracy) {
  return guarded([&] {
    need(report, "report");
    need(accuracy, "accuracy");
    const auto& t = report->result.aggregates.topn;
    if (n == 0 || n > t.size()) fail(ErrorKind::InvalidArgument, "n must lie in [1, " + std::to_string(t.size()) + "]");
    *accuracy = t[n - 1];
  });
}

size_t sl_report_window_count(const sl_report* report) { return report ? report->result.aggregates.windows.size() : 0; }

sl_status sl_report_window(const sl_report* report, size_t index, double* w, double* jaccard, double* recall) {
  return guarded([&] {
    need(report, "report");
    const auto& a = report->result.aggregates;
    if (index >= a.windows.size()) fail(ErrorKind::InvalidArgument, "window index out of range");
    if (w) *w = a.windows[index];
    if (jaccard) *jaccard = a.jaccard[index];
    if (recall) *recall = a.recall[index];
  });
}

void sl_report_free(sl_report* report) { delete report; }

sl_status sl_inspect(const char* path, sl_inspection** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    auto ins = std::make_unique<sl_inspection>();
    std::ostringstream text;
    const std::filesystem::path p(path);
    if (p.extension() == ".jsonl") {
      const auto rows = inspect_manifest(p);
      text << "id\tduration_s\tframes\texpected_frames\tgrid_labels\tstatus\n";
      for (const auto& r : rows) {
        text << r.id << '\t' << format_double(r.audio_duration, "%.4f") << '\t' << r.frames << '\t'
             << r.expected_frames << '\t';
        if (r.grid_labels.empty()) text << "none";
        for (std::size_t i = 0; i < r.grid_labels.size(); ++i) text << (i ? "," : "") << format_double(r.grid_labels[i], "%g");
        text << '\t' << (r.problems.empty() ? "ok" : "FAIL") << '\n';
        for (const auto& problem : r.problems) text << "  " << r.id << ": " << problem << '\n';
        ins->problems += r.problems.size();
      }
      ins->items = rows.size();
      text << rows.size() << " records, " << ins->problems << " problems\n";
    } else {
      const auto audio = load_wav_working_rate(p);
      text << "file        " << p.string() << '\n';
      text << "duration   " << format_double(audio.duration(), "%.4f") << " s at " << audio.sample_rate << " Hz\n";
      text << "frames     " << frame_count(audio.samples.size()) << " x " << kFeatureWidth << '\n';
      if (audio.duration() > kMaxFeatureDuration) {
        text << "longer than 45 s: split into segments before detection\n";
        ins->problems = 1;
      } else {
        const auto f = assemble(audio);
        float lo = 0.0f, hi = 0.0f;
        if (!f.data.empty()) lo = hi = f.data.front();
        for (float v : f.data) {
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
        text << "range      [" << format_double(lo) << ", " << format_double(hi) << "]\n";
        const auto silences = detect_silence(audio);
        text << "silences   " << silences.size() << '\n';
        for (const auto& s : silences)
          text << "  " << format_double(s.start, "%.3f") << " - " << format_double(s.end, "%.3f") << " s\n";
      }
      ins->items = 1;
    }
    ins->text = text.str();
    *out = ins.release();
  });
}

const char* sl_inspection_text(const sl_inspection* inspection) { return inspection ? inspection->text.c_str() : ""; }

size_t sl_inspection_items(const sl_inspection* inspection) { return inspection ? inspection->items : 0; }

size_t sl_inspection_problems(const sl_inspection* inspection) { return inspection ? inspection->problems : 0; }

void sl_inspection_free(sl_inspection* inspection) { delete inspection; }

}  // extern "C"
