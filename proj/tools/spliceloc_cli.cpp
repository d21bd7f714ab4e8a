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

#include <cstdio>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spliceloc/spliceloc.h"

namespace {

constexpr int kExitError = 1;
constexpr int kExitTruncated = 2;

struct Failure {
  sl_status status;
  std::string message;
};

void check(sl_status status) {
  if (status != SL_OK) throw Failure{status, sl_last_error()};
}

std::string kv_lines(const std::vector<std::string>& assignments) {
  std::string text;
  for (const auto& a : assignments) {
    if (a.find('=') == std::string::npos) throw Failure{SL_ERR_INVALID_ARGUMENT, "--set expects key=value, got '" + a + "'"};
    text += a + "\n";
  }
  return text;
}

std::string join_positions(const sl_hypothesis& h) {
  if (h.n_positions == 0) return "\xE2\x88\x98";
  std::string out;
  char buf[32];
  for (size_t i = 0; i < h.n_positions; ++i) {
    std::snprintf(buf, sizeof buf, "%g", h.positions[i]);
    out += (i ? " " : "") + std::string(buf);
  }
  return out;
}

std::vector<double> parse_windows(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Failure{SL_ERR_INVALID_ARGUMENT, "bad tolerance window '" + item + "'"};
    }
  }
  if (out.empty()) throw Failure{SL_ERR_INVALID_ARGUMENT, "--windows needs at least one value"};
  return out;
}

void print_epoch(const sl_epoch_info* e, void*) {
  std::printf("epoch %4zu  train %.6f  val %.6f  %.1f s%s\n", e->epoch, e->train_loss, e->val_loss, e->wall_seconds,
              e->new_best ? "  *" : "");
  std::fflush(stdout);
}

struct TrainArgs {
  std::string train, val, config, out, from, cache_dir;
  std::vector<std::string> sets;
  long long seed = -1;
  bool quiet = false;
};

void add_train_options(CLI::App* cmd, TrainArgs& a) {
  cmd->add_option("--train", a.train, "Training manifest (JSON lines)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--val", a.val, "Validation manifest (JSON lines)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--config", a.config, "Training config file (key = value)")->check(CLI::ExistingFile);
  cmd->add_option("--out", a.out, "Output directory for checkpoints and report")->required();
  cmd->add_option("--seed", a.seed, "Overrides the config seed");
  cmd->add_option("--cache-dir", a.cache_dir, "Feature cache directory");
  cmd->add_option("--set", a.sets, "Config override key=value (repeatable)");
  cmd->add_flag("--quiet", a.quiet, "Do not print per-epoch progress");
}

int run_train(const TrainArgs& a, bool finetune) {
  sl_train_config* cfg = nullptr;
  check(sl_train_config_load(a.config.empty() ? nullptr : a.config.c_str(), &cfg));
  std::unique_ptr<sl_train_config, decltype(&sl_train_config_free)> guard(cfg, sl_train_config_free);
  std::string overrides = kv_lines(a.sets);
  if (a.seed >= 0) overrides += "seed = " + std::to_string(a.seed) + "\n";
  if (!a.cache_dir.empty()) overrides += "cache_dir = " + a.cache_dir + "\n";
  if (!overrides.empty()) check(sl_train_config_apply(cfg, overrides.c_str()));
  sl_train_summary summary{};
  const sl_epoch_callback cb = a.quiet ? nullptr : print_epoch;
  if (finetune)
    check(sl_finetune(cfg, a.from.c_str(), a.train.c_str(), a.val.c_str(), a.out.c_str(), cb, nullptr, &summary));
  else
    check(sl_train(cfg, a.train.c_str(), a.val.c_str(), a.out.c_str(), cb, nullptr, &summary));
  std::printf("%s after %zu epochs; best epoch %zu, validation loss %.6f\n",
              summary.early_stopped ? "early stop" : "finished", summary.epochs, summary.best_epoch,
              summary.best_val_loss);
  std::printf("best checkpoint: %s/best.ckpt\n", a.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Audio splicing forgery generation and splice localization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sl_version()));

  // generate
  std::string scenario_name = "single-clean", pool, gen_out, noise_file, rir_dir, codec_cmd;
  std::vector<std::string> gen_sets;
  std::size_t count = 100;
  std::uint64_t gen_seed = 0;
  unsigned gen_threads = 0;
  auto* gen = app.add_subcommand("generate", "Generate spliced samples and a manifest");
  gen->add_option("--scenario", scenario_name, "Preset name or scenario file")->capture_default_str();
  gen->add_option("--pool", pool, "Speaker pool: one directory per speaker holding WAV files")
      ->required()
      ->check(CLI::ExistingDirectory);
  gen->add_option("--count", count, "Number of samples")->capture_default_str();
  gen->add_option("--seed", gen_seed, "Master seed")->capture_default_str();
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--threads", gen_threads, "Worker threads (0: all cores)");
  gen->add_option("--noise-file", noise_file, "Noise recording for file-backed noise (realnoise-<name>)");
  gen->add_option("--rir-dir", rir_dir, "Directory of measured room impulse responses");
  gen->add_option("--codec-cmd", codec_cmd, "External codec command template ({in}, {out}, {bitrate})");
  gen->add_option("--set", gen_sets, "Scenario override key=value (repeatable)");
  gen->footer(sl_preset_help());

  // train / finetune
  TrainArgs train_args, ft_args;
  auto* tr = app.add_subcommand("train", "Train a model from scratch");
  add_train_options(tr, train_args);
  auto* ft = app.add_subcommand("finetune", "Continue training from a checkpoint with a fresh optimizer");
  add_train_options(ft, ft_args);
  ft->add_option("--from", ft_args.from, "Checkpoint to start from")->required()->check(CLI::ExistingFile);

  // eval
  std::string eval_manifest, eval_ckpt, eval_out, windows = "0.5,1,2,3", eval_csv, eval_svg, eval_cache;
  std::size_t eval_topn = 5, eval_beam = 0;
  unsigned eval_threads = 0;
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a manifest");
  ev->add_option("--manifest", eval_manifest, "Manifest to evaluate")->required()->check(CLI::ExistingFile);
  ev->add_option("--checkpoint", eval_ckpt, "Model checkpoint")->required()->check(CLI::ExistingFile);
  ev->add_option("--windows", windows, "Tolerance windows in seconds")->capture_default_str();
  ev->add_option("--topn", eval_topn, "Largest n for top-n accuracy")->capture_default_str();
  ev->add_option("--beam", eval_beam, "Beam width (0: max(5, topn))");
  ev->add_option("--out", eval_out, "Report JSON path")->required();
  ev->add_option("--csv", eval_csv, "Prefix for <prefix>_aggregate.csv and <prefix>_samples.csv");
  ev->add_option("--svg", eval_svg, "Plot path");
  ev->add_option("--threads", eval_threads, "Worker threads (0: all cores)");
  ev->add_option("--cache-dir", eval_cache, "Feature cache directory");
  ev->add_option("--seed", gen_seed, "Accepted for uniformity; evaluation is deterministic");

  // detect
  std::string audio, det_ckpt;
  std::size_t det_topn = 1, det_beam = 0;
  bool det_verbose = false;
  auto* det = app.add_subcommand("detect", "Print ranked splice hypotheses for one audio file");
  det->add_option("audio", audio, "WAV file (at most 45 s)")->required();
  det->add_option("--checkpoint", det_ckpt, "Model checkpoint")->required();
  det->add_option("--topn", det_topn, "Number of hypotheses to print")->capture_default_str();
  det->add_option("--beam", det_beam, "Beam width (0: max(5, topn))");
  det->add_flag("--verbose", det_verbose, "Print a header line");
  det->add_option("--seed", gen_seed, "Accepted for uniformity; decoding is deterministic");
  det->footer("Exit status: 0 success, 1 error, 2 a printed hypothesis hit the length limit.");

  // inspect
  std::string inspect_path;
  auto* ins = app.add_subcommand("inspect", "Check a manifest against its audio, or summarize one WAV file");
  ins->add_option("path", inspect_path, "Manifest (*.jsonl) or WAV file")->required()->check(CLI::ExistingFile);

  // report
  std::string report_in, report_dir;
  auto* rep = app.add_subcommand("report", "Tables and plots from an evaluation report");
  rep->add_option("--in", report_in, "Report JSON from eval")->required()->check(CLI::ExistingFile);
  rep->add_option("--out", report_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitError;
  }

  try {
    if (*gen) {
      sl_scenario* sc = nullptr;
      check(sl_scenario_load(scenario_name.c_str(), &sc));
      std::unique_ptr<sl_scenario, decltype(&sl_scenario_free)> guard(sc, sl_scenario_free);
      std::string overrides = kv_lines(gen_sets);
      if (!noise_file.empty()) overrides += "noise_file = " + noise_file + "\n";
      if (!rir_dir.empty()) overrides += "rir_dir = " + rir_dir + "\n";
      if (!overrides.empty()) check(sl_scenario_apply(sc, overrides.c_str()));
      sl_generate_options o{pool.c_str(), gen_out.c_str(), count, gen_seed, gen_threads,
                            codec_cmd.empty() ? nullptr : codec_cmd.c_str()};
      sl_generate_result r{};
      check(sl_generate(sc, &o, &r));
      std::printf("%s: wrote %zu samples to %s/manifest.jsonl (%zu specs redrawn)\n", sl_scenario_name(sc), r.written,
                  gen_out.c_str(), r.skipped);
    } else if (*tr) {
      return run_train(train_args, false);
    } else if (*ft) {
      return run_train(ft_args, true);
    } else if (*ev) {
      const auto w = parse_windows(windows);
      sl_model* model = nullptr;
      check(sl_model_load(eval_ckpt.c_str(), &model));
      std::unique_ptr<sl_model, decltype(&sl_model_free)> mg(model, sl_model_free);
      sl_eval_options o{w.data(), w.size(), eval_topn, eval_beam, eval_threads,
                        eval_cache.empty() ? nullptr : eval_cache.c_str()};
      sl_report* report = nullptr;
      check(sl_evaluate(model, eval_manifest.c_str(), &o, &report));
      std::unique_ptr<sl_report, decltype(&sl_report_free)> rg(report, sl_report_free);
      check(sl_report_write_json(report, eval_out.c_str()));
      if (!eval_csv.empty())
        check(sl_report_write_csv(report, (eval_csv + "_aggregate.csv").c_str(), (eval_csv + "_samples.csv").c_str()));
      if (!eval_svg.empty()) check(sl_report_write_svg(report, eval_svg.c_str()));
      std::fputs(sl_report_summary(report), stdout);
    } else if (*det) {
      sl_model* model = nullptr;
      check(sl_model_load(det_ckpt.c_str(), &model));
      std::unique_ptr<sl_model, decltype(&sl_model_free)> mg(model, sl_model_free);
      sl_detection* d = nullptr;
      check(sl_detect(model, audio.c_str(), det_topn, det_beam, &d));
      std::unique_ptr<sl_detection, decltype(&sl_detection_free)> dg(d, sl_detection_free);
      if (det_verbose)
        std::printf("# %s  %.2f s  rank, score, splice times (s)\n", audio.c_str(), sl_detection_duration(d));
      bool truncated = false;
      for (size_t i = 0; i < sl_detection_count(d); ++i) {
        sl_hypothesis h{};
        check(sl_detection_get(d, i, &h));
        truncated = truncated || h.truncated;
        std::printf("%zu\t%.6f\t%s%s\n", i + 1, h.score, join_positions(h).c_str(), h.truncated ? "\t(truncated)" : "");
      }
      if (truncated) return kExitTruncated;
    } else if (*ins) {
      sl_inspection* in = nullptr;
      check(sl_inspect(inspect_path.c_str(), &in));
      std::unique_ptr<sl_inspection, decltype(&sl_inspection_free)> ig(in, sl_inspection_free);
      std::fputs(sl_inspection_text(in), stdout);
      if (sl_inspection_problems(in) > 0) {
        std::fprintf(stderr, "error: %zu problems found\n", sl_inspection_problems(in));
        return kExitError;
      }
    } else if (*rep) {
      sl_report* report = nullptr;
      check(sl_report_load(report_in.c_str(), &report));
      std::unique_ptr<sl_report, decltype(&sl_report_free)> rg(report, sl_report_free);
      const std::string dir = report_dir + "/";
      check(sl_report_write_csv(report, (dir + "aggregate.csv").c_str(), (dir + "samples.csv").c_str()));
      check(sl_report_write_svg(report, (dir + "report.svg").c_str()));
      std::fputs(sl_report_summary(report), stdout);
      std::printf("wrote %saggregate.csv, %ssamples.csv and %sreport.svg\n", dir.c_str(), dir.c_str(), dir.c_str());
    }
  } catch (const Failure& f) {
    std::fprintf(stderr, "error (%s): %s\n", sl_status_name(f.status), f.message.c_str());
    return kExitError;
  }
  return 0;
}
