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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "spliceloc/audio.hpp"
#include "spliceloc/checkpoint.hpp"
#include "spliceloc/features.hpp"
#include "spliceloc/spliceloc.h"
#include "spliceloc/training.hpp"
#include "spliceloc/vocab.hpp"
#include "support/synth.hpp"

namespace fs = std::filesystem;
using namespace spliceloc;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line))
    if (!line.empty()) out.push_back(line);
  return out;
}

Run cli(const fs::path& work, const std::string& args) {
  const auto out = work / "stdout.txt", err = work / "stderr.txt";
  const std::string cmd = std::string("\"") + SPLICELOC_CLI + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                          err.string() + "\"";
  const int raw = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("spliceloc_capi_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const char* kTinyModel =
    "--set model.d_model=16 --set model.n_heads=2 --set model.n_encoder_layers=1 "
    "--set model.n_decoder_layers=1 --set model.d_ff=32 --set batch_size=4 --set max_epochs=2 --quiet";

}  // namespace

TEST_CASE("status names, version and last error") {
  CHECK(std::string(sl_status_name(SL_OK)) == "ok");
  CHECK(std::string(sl_status_name(SL_ERR_CONTRACT)) == "contract");
  CHECK(std::string(sl_version()) == "0.1.0");
  sl_scenario* sc = nullptr;
  CHECK(sl_scenario_load("no-such-preset", &sc) != SL_OK);
  CHECK(sc == nullptr);
  CHECK(std::string(sl_last_error()).find("no-such-preset") != std::string::npos);
  REQUIRE(sl_scenario_load("single-clean", &sc) == SL_OK);
  CHECK(std::string(sl_last_error()).empty());
  CHECK(std::string(sl_scenario_name(sc)) == "single-clean");
  sl_scenario_free(sc);
}

TEST_CASE("null arguments are rejected and frees accept null") {
  CHECK(sl_scenario_load(nullptr, nullptr) == SL_ERR_INVALID_ARGUMENT);
  CHECK(sl_generate(nullptr, nullptr, nullptr) == SL_ERR_INVALID_ARGUMENT);
  CHECK(sl_model_load(nullptr, nullptr) == SL_ERR_INVALID_ARGUMENT);
  CHECK(sl_detect(nullptr, "x.wav", 1, 0, nullptr) == SL_ERR_INVALID_ARGUMENT);
  CHECK(sl_report_topn(nullptr, 1, nullptr) == SL_ERR_INVALID_ARGUMENT);
  sl_scenario_free(nullptr);
  sl_train_config_free(nullptr);
  sl_model_free(nullptr);
  sl_detection_free(nullptr);
  sl_report_free(nullptr);
  sl_inspection_free(nullptr);
}

TEST_CASE("scenario overrides are validated") {
  sl_scenario* sc = nullptr;
  REQUIRE(sl_scenario_load("realnoise-office", &sc) == SL_OK);
  const auto dir = fresh_dir("scenario");
  const auto pool = dir / "pool";
  synth::write_pool(pool, {.speakers = 2, .recordings = 2});
  sl_generate_options o{pool.c_str(), (dir / "out").c_str(), 2, 1, 1, nullptr};
  sl_generate_result r{};
  CHECK(sl_generate(sc, &o, &r) != SL_OK);
  CHECK(sl_scenario_apply(sc, "splices = banana\n") != SL_OK);
  CHECK(sl_scenario_apply(sc, "no_such_key = 1\n") != SL_OK);
  sl_scenario_free(sc);
  fs::remove_all(dir);
}

TEST_CASE("train config loading and overrides") {
  sl_train_config* cfg = nullptr;
  REQUIRE(sl_train_config_load(nullptr, &cfg) == SL_OK);
  CHECK(sl_train_config_apply(cfg, "batch_size = 8\nmodel.d_model = 32\n") == SL_OK);
  CHECK(sl_train_config_apply(cfg, "batch_size = 0\n") != SL_OK);
  CHECK(sl_train_config_apply(cfg, "not_a_key = 1\n") != SL_OK);
  sl_train_config_free(cfg);
  CHECK(sl_train_config_load("/nonexistent/train.cfg", &cfg) == SL_ERR_IO);
}

TEST_CASE("long audio asks for segmentation") {
  const auto dir = fresh_dir("long");
  const auto wav = dir / "long.wav";
  write_wav(wav, synth::speech_like(50.0, 3, 140.0));
  TrainConfig c;
  c.model.d_model = 16;
  c.model.n_heads = 2;
  c.model.n_encoder_layers = c.model.n_decoder_layers = 1;
  c.model.d_ff = 32;
  const auto ckpt = dir / "m.ckpt";
  save_checkpoint(ckpt, initial_model(c));
  sl_model* m = nullptr;
  REQUIRE(sl_model_load(ckpt.c_str(), &m) == SL_OK);
  sl_model_info info{};
  REQUIRE(sl_model_info_get(m, &info) == SL_OK);
  CHECK(info.d_model == 16);
  CHECK(info.input_width == kFeatureWidth);
  CHECK(info.vocab == SpliceVocab::kSize);
  sl_detection* d = nullptr;
  CHECK(sl_detect(m, wav.c_str(), 1, 0, &d) == SL_ERR_CONTRACT);
  CHECK(d == nullptr);
  CHECK(std::string(sl_last_error()).find("segments") != std::string::npos);
  sl_model_free(m);

  const auto r = cli(dir, "detect \"" + wav.string() + "\" --checkpoint \"" + ckpt.string() + "\"");
  CHECK(r.code == 1);
  CHECK(r.err.find("45 s") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("an overfit model reports no splice on unspliced audio") {
  const auto dir = fresh_dir("nosplice");
  const auto wav = dir / "clean.wav";
  const auto audio = synth::speech_like(8.0, 11, 120.0);
  write_wav(wav, audio);
  Dataset data;
  data.records.push_back(ForgeryRecord{.id = "clean"});
  data.features.push_back(assemble(load_wav_working_rate(wav)));
  data.targets.push_back(target_sequence({}));
  TrainConfig c;
  c.model.d_model = 16;
  c.model.n_heads = 2;
  c.model.n_encoder_layers = c.model.n_decoder_layers = 1;
  c.model.d_ff = 32;
  c.model.dropout = 0.0;
  c.adam.learning_rate = 1e-2;
  c.max_epochs = 150;
  c.early_stop_patience = 150;
  c.batch_size = 1;
  auto model = initial_model(c);
  train(model, data, data, c, dir / "run");
  const auto r = cli(dir, "detect \"" + wav.string() + "\" --checkpoint \"" + (dir / "run" / "best.ckpt").string() + "\"");
  CHECK(r.code == 0);
  const auto out = lines_of(r.out);
  REQUIRE(out.size() == 1);
  CHECK(out[0].rfind("1\t", 0) == 0);
  CHECK(out[0].find("\xE2\x88\x98") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("command line workflow end to end") {
  const auto dir = fresh_dir("workflow");
  const auto pool = dir / "pool";
  synth::write_pool(pool, {.speakers = 3, .recordings = 2, .min_duration_s = 8.0, .max_duration_s = 10.0});
  const std::string gen = "generate --pool \"" + pool.string() + "\" --count 6 --seed 5 --threads 2 "
                          "--set max_duration_s=10 --set min_duration_s=3 --out ";

  auto r = cli(dir, gen + "\"" + (dir / "a").string() + "\"");
  REQUIRE_MESSAGE(r.code == 0, r.err);
  r = cli(dir, gen + "\"" + (dir / "b").string() + "\"");
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto manifest = dir / "a" / "manifest.jsonl";
  CHECK(lines_of(slurp(manifest)).size() == 6);
  CHECK(slurp(manifest) == slurp(dir / "b" / "manifest.jsonl"));
  for (const auto& e : fs::directory_iterator(dir / "a" / "audio"))
    CHECK(slurp(e.path()) == slurp(dir / "b" / "audio" / e.path().filename()));

  r = cli(dir, "inspect \"" + manifest.string() + "\"");
  CHECK_MESSAGE(r.code == 0, (r.out + r.err));

  const auto run = dir / "run";
  r = cli(dir, "train --train \"" + manifest.string() + "\" --val \"" + manifest.string() + "\" --out \"" +
                   run.string() + "\" --cache-dir \"" + (dir / "cache").string() + "\" " + kTinyModel);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(fs::exists(run / "best.ckpt"));
  CHECK(fs::exists(run / "last.ckpt"));
  CHECK(lines_of(slurp(run / "train_report.jsonl")).size() == 3);

  r = cli(dir, "finetune --from \"" + (run / "best.ckpt").string() + "\" --train \"" + manifest.string() +
                   "\" --val \"" + manifest.string() + "\" --out \"" + (dir / "ft").string() + "\" " + kTinyModel);
  CHECK_MESSAGE(r.code == 0, r.err);

  const auto sample = (dir / "a" / "audio" / fs::directory_iterator(dir / "a" / "audio")->path().filename()).string();
  r = cli(dir, "detect \"" + sample + "\" --checkpoint \"" + (run / "best.ckpt").string() + "\" --topn 3");
  CHECK((r.code == 0 || r.code == 2));
  const auto det = lines_of(r.out);
  REQUIRE(det.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(det[i].rfind(std::to_string(i + 1) + "\t", 0) == 0);

  r = cli(dir, "detect \"" + (dir / "missing.wav").string() + "\" --checkpoint \"" + (run / "best.ckpt").string() + "\"");
  CHECK(r.code == 1);
  CHECK(r.err.find("error") != std::string::npos);

  r = cli(dir, "eval --manifest \"" + manifest.string() + "\" --checkpoint \"" + (run / "best.ckpt").string() +
                   "\" --out \"" + (dir / "report.json").string() + "\" --topn 3 --csv \"" + (dir / "ev").string() +
                   "\" --svg \"" + (dir / "ev.svg").string() + "\"");
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(fs::exists(dir / "ev_aggregate.csv"));
  CHECK(lines_of(slurp(dir / "ev_samples.csv")).size() == 7);

  r = cli(dir, "report --in \"" + (dir / "report.json").string() + "\" --out \"" + dir.string() + "\"");
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(slurp(dir / "aggregate.csv").rfind("metric,parameter,value", 0) == 0);
  CHECK(slurp(dir / "report.svg").find("<svg") != std::string::npos);

  sl_report* rep = nullptr;
  REQUIRE(sl_report_load((dir / "report.json").c_str(), &rep) == SL_OK);
  CHECK(sl_report_sample_count(rep) == 6);
  CHECK(sl_report_window_count(rep) == 4);
  double acc1 = -1, acc3 = -1;
  REQUIRE(sl_report_topn(rep, 1, &acc1) == SL_OK);
  REQUIRE(sl_report_topn(rep, 3, &acc3) == SL_OK);
  CHECK(acc1 <= acc3);
  CHECK(sl_report_topn(rep, 0, &acc1) != SL_OK);
  double w = 0, j = 0, rc = 0;
  REQUIRE(sl_report_window(rep, 0, &w, &j, &rc) == SL_OK);
  CHECK(w == 0.5);
  CHECK(sl_report_window(rep, 4, &w, &j, &rc) != SL_OK);
  sl_report_free(rep);

  sl_inspection* ins = nullptr;
  REQUIRE(sl_inspect(sample.c_str(), &ins) == SL_OK);
  CHECK(sl_inspection_problems(ins) == 0);
  CHECK(std::string(sl_inspection_text(ins)).size() > 0);
  sl_inspection_free(ins);

  CHECK(cli(dir, "--version").out.find("0.1.0") != std::string::npos);
  CHECK(cli(dir, "bogus").code == 1);
  fs::remove_all(dir);
}
