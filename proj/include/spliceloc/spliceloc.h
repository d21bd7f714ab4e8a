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

#ifndef SPLICELOC_SPLICELOC_H
#define SPLICELOC_SPLICELOC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SL_API __declspec(dllexport)
#else
#define SL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sl_status {
  SL_OK = 0,
  SL_ERR_INVALID_ARGUMENT = 1,
  SL_ERR_FORMAT = 2,
  SL_ERR_UNSUPPORTED = 3,
  SL_ERR_IO = 4,
  SL_ERR_CONTRACT = 5,
  SL_ERR_CHECKPOINT = 6,
  SL_ERR_SUBPROCESS = 7,
  SL_ERR_DEGENERATE = 8,
  SL_ERR_RESOLUTION = 9,
  SL_ERR_NUMERIC = 10,
  SL_ERR_INTERNAL = 11
} sl_status;

/* Message of the most recent failure on the calling thread; "" after success. */
SL_API const char* sl_last_error(void);
SL_API const char* sl_status_name(sl_status status);
SL_API const char* sl_version(void);

/* Opaque handles. Strings returned through a handle stay valid until the
 * handle is freed. Every *_free accepts NULL. */
typedef struct sl_scenario sl_scenario;
typedef struct sl_train_config sl_train_config;
typedef struct sl_model sl_model;
typedef struct sl_detection sl_detection;
typedef struct sl_report sl_report;
typedef struct sl_inspection sl_inspection;

/* ---- scenarios ---------------------------------------------------------- */

/* A preset name or a path to a key = value scenario file. */
SL_API sl_status sl_scenario_load(const char* name_or_path, sl_scenario** out);
/* Applies "key = value" lines on top of the scenario; paths resolve against
 * the working directory. */
SL_API sl_status sl_scenario_apply(sl_scenario* scenario, const char* kv_text);
SL_API const char* sl_scenario_name(const sl_scenario* scenario);
SL_API void sl_scenario_free(sl_scenario* scenario);
/* Help text listing every preset and scenario key. */
SL_API const char* sl_preset_help(void);

/* ---- generation --------------------------------------------------------- */

typedef struct sl_generate_options {
  const char* pool_dir;      /* one directory per speaker holding WAV files */
  const char* out_dir;       /* receives audio/ and manifest.jsonl */
  size_t count;
  uint64_t seed;
  unsigned threads;          /* 0: hardware concurrency */
  const char* codec_command; /* NULL: SPLICELOC_CODEC_CMD */
} sl_generate_options;

typedef struct sl_generate_result {
  size_t written;
  size_t skipped;
} sl_generate_result;

SL_API sl_status sl_generate(const sl_scenario* scenario, const sl_generate_options* options,
                             sl_generate_result* result);

/* ---- training ----------------------------------------------------------- */

/* path may be NULL for defaults. */
SL_API sl_status sl_train_config_load(const char* path, sl_train_config** out);
SL_API sl_status sl_train_config_apply(sl_train_config* config, const char* kv_text);
SL_API void sl_train_config_free(sl_train_config* config);

typedef struct sl_epoch_info {
  size_t epoch;
  double train_loss;
  double val_loss;
  double wall_seconds;
  int improved;
  int new_best;
} sl_epoch_info;

typedef void (*sl_epoch_callback)(const sl_epoch_info* info, void* user);

typedef struct sl_train_summary {
  size_t epochs;
  size_t best_epoch;
  double best_val_loss;
  int early_stopped;
} sl_train_summary;

/* Writes best.ckpt, last.ckpt and train_report.jsonl under out_dir.
 * callback and summary may be NULL. */
SL_API sl_status sl_train(const sl_train_config* config, const char* train_manifest, const char* val_manifest,
                          const char* out_dir, sl_epoch_callback callback, void* user, sl_train_summary* summary);
SL_API sl_status sl_finetune(const sl_train_config* config, const char* checkpoint, const char* train_manifest,
                             const char* val_manifest, const char* out_dir, sl_epoch_callback callback, void* user,
                             sl_train_summary* summary);

/* ---- models and detection ----------------------------------------------- */

typedef struct sl_model_info {
  size_t d_model;
  size_t n_heads;
  size_t n_encoder_layers;
  size_t n_decoder_layers;
  size_t d_ff;
  size_t input_width;
  size_t vocab;
  size_t max_tgt_len;
  size_t parameters;
} sl_model_info;

SL_API sl_status sl_model_load(const char* checkpoint, sl_model** out);
SL_API sl_status sl_model_info_get(const sl_model* model, sl_model_info* info);
SL_API void sl_model_free(sl_model* model);

/* Ranked hypotheses for one audio file. beam 0 means max(5, topn). */
SL_API sl_status sl_detect(const sl_model* model, const char* audio_path, size_t topn, size_t beam,
                           sl_detection** out);
SL_API size_t sl_detection_count(const sl_detection* detection);
SL_API double sl_detection_duration(const sl_detection* detection);

typedef struct sl_hypothesis {
  double score;
  double log_prob;
  int truncated;
  size_t n_positions; /* 0: no splice */
  const double* positions;
  const char* text;   /* token symbols joined by spaces */
} sl_hypothesis;

SL_API sl_status sl_detection_get(const sl_detection* detection, size_t index, sl_hypothesis* out);
SL_API void sl_detection_free(sl_detection* detection);

/* ---- evaluation and reports --------------------------------------------- */

typedef struct sl_eval_options {
  const double* windows; /* NULL: 0.5, 1, 2, 3 */
  size_t n_windows;
  size_t topn;           /* 0: 5 */
  size_t beam;           /* 0: max(5, topn) */
  unsigned threads;      /* 0: hardware concurrency */
  const char* cache_dir; /* NULL: no feature cache */
} sl_eval_options;

/* The feature set (combined or Mel only) follows the model's input width. */
SL_API sl_status sl_evaluate(const sl_model* model, const char* manifest, const sl_eval_options* options,
                             sl_report** out);
SL_API sl_status sl_report_load(const char* path, sl_report** out);
SL_API sl_status sl_report_write_json(const sl_report* report, const char* path);
SL_API sl_status sl_report_write_csv(const sl_report* report, const char* aggregate_path, const char* samples_path);
SL_API sl_status sl_report_write_svg(const sl_report* report, const char* path);
/* Human-readable aggregate table. */
SL_API const char* sl_report_summary(const sl_report* report);
SL_API size_t sl_report_sample_count(const sl_report* report);
/* n is 1-based. */
SL_API sl_status sl_report_topn(const sl_report* report, size_t n, double* accuracy);
SL_API size_t sl_report_window_count(const sl_report* report);
SL_API sl_status sl_report_window(const sl_report* report, size_t index, double* w, double* jaccard, double* recall);
SL_API void sl_report_free(sl_report* report);

/* ---- inspection --------------------------------------------------------- */

/* A manifest (*.jsonl) is checked record by record against its audio; any
 * other path is read as audio and its feature stack summarized. */
SL_API sl_status sl_inspect(const char* path, sl_inspection** out);
SL_API const char* sl_inspection_text(const sl_inspection* inspection);
SL_API size_t sl_inspection_items(const sl_inspection* inspection);
SL_API size_t sl_inspection_problems(const sl_inspection* inspection);
SL_API void sl_inspection_free(sl_inspection* inspection);

#ifdef __cplusplus
}
#endif

#endif
