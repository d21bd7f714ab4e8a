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
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spliceloc/audio.hpp"
#include "spliceloc/scenario.hpp"

namespace spliceloc {

// ---------------------------------------------------------------------------
// Silence detection

struct TimeInterval {
  double start = 0.0;  // seconds
  double end = 0.0;
  double midpoint() const noexcept { return 0.5 * (start + end); }
  double length() const noexcept { return end - start; }
};

struct VadParams {
  double frame_s = 0.025;
  double hop_s = 0.010;
  double floor_percentile = 0.10;
  double floor_factor = 4.0;
  double min_threshold_dbfs = -45.0;
  double max_threshold_dbfs = -30.0;  // caps the relative threshold on stationary loud input
  double min_silence_s = 0.100;
};

/// Maximal non-voice-active intervals under a frame-energy detector. Frame i
/// owns [i*hop, (i+1)*hop) and the final frame extends to the end of the
/// signal. Requires at least 0.1 s of audio.
std::vector<TimeInterval> detect_silence(const AudioSignal& sig, const VadParams& params = {});

// ---------------------------------------------------------------------------
// Noise and room responses

struct NoiseMix {
  AudioSignal audio;
  double gain = 1.0;   // applied to the noise before mixing
  double scale = 1.0;  // post-mix normalization factor (1 unless clipping)
};

/// sig + gain * noise with gain chosen so that 10 log10(P_sig / P_noise') equals
/// snr_db. Noise is tiled or cropped to the signal length. Throws Degenerate
/// for a silent signal or noise.
NoiseMix add_noise(const AudioSignal& sig, const AudioSignal& noise, double snr_db);

AudioSignal white_noise(std::size_t samples, std::uint64_t seed, int sample_rate = kWorkingRate);

/// Seven exponentially decaying Gaussian-noise responses, RT60 0.1 .. 0.7 s.
std::vector<ImpulseResponse> synthetic_rirs();

/// Every *.wav in `dir`, resampled to the working rate, ids "measured/<file>".
std::vector<ImpulseResponse> load_measured_rirs(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Speaker pools and assets

enum class Split { Train, Validation, Test };
const char* to_string(Split split) noexcept;

struct SpeakerPool {
  Split split = Split::Train;
  std::filesystem::path root;
  /// speaker id -> sample ids ("<speaker>/<file>.wav", relative to root)
  std::map<std::string, std::vector<std::string>> entries;

  std::size_t sample_count() const;

  /// Layout: <dir>/<speaker>/*.wav
  static SpeakerPool load(const std::filesystem::path& dir, Split split = Split::Train);
};

/// Throws Contract if any speaker occurs in more than one pool.
void check_disjoint(const std::vector<SpeakerPool>& pools);

/// Lazily loaded, thread-safe cache of everything a spec can reference.
class AssetStore {
 public:
  AssetStore(SpeakerPool pool, const ScenarioConfig& scenario);

  const SpeakerPool& pool() const noexcept { return pool_; }
  const std::vector<std::string>& rir_ids() const noexcept { return rir_ids_; }

  const AudioSignal& source(const std::string& id);
  const ImpulseResponse& rir(const std::string& id) const;
  /// Source convolved with the given response; the dry source for an empty id.
  const AudioSignal& reverberant(const std::string& source_id, const std::string& rir_id);
  const std::vector<TimeInterval>& silences(const std::string& source_id, const std::string& rir_id);
  const AudioSignal& noise_file(const std::filesystem::path& path);

 private:
  SpeakerPool pool_;
  std::map<std::string, ImpulseResponse> rirs_;
  std::vector<std::string> rir_ids_;
  std::mutex mutex_;
  std::map<std::string, std::unique_ptr<AudioSignal>> sources_;
  std::map<std::pair<std::string, std::string>, std::unique_ptr<AudioSignal>> reverberant_;
  std::map<std::pair<std::string, std::string>, std::unique_ptr<std::vector<TimeInterval>>> silences_;
  std::map<std::string, std::unique_ptr<AudioSignal>> noises_;
};

// ---------------------------------------------------------------------------
// Specs, records and rendering

struct NoiseSpec {
  NoiseMode kind = NoiseMode::White;
  double snr_db = 0.0;
  std::string noise_id;  // file path for file-backed noise
};

struct CompressionSpec {
  Codec codec = Codec::Mp3Sim;
  double bitrate_kbps = 128.0;
};

struct ForgerySpec {
  int n_sources = 1;
  std::vector<std::string> source_ids;
  std::vector<std::string> rir_ids;  // empty: no room simulation
  std::vector<std::pair<double, double>> cut_points;  // seconds, per source
  std::optional<NoiseSpec> noise;
  std::vector<CompressionSpec> compressions;
  std::uint64_t seed = 0;

  int splice_count() const noexcept { return n_sources - 1; }
  /// Throws Contract when an invariant does not hold.
  void validate() const;
};

struct ForgeryRecord {
  std::string id;
  ForgerySpec spec;
  std::filesystem::path audio_path;  // absolute once loaded
  std::vector<double> splice_times;
  std::vector<double> grid_labels;
  double duration = 0.0;
};

/// Round to the nearest 0.5 s, deduplicate, keep ascending order.
std::vector<double> grid_labels_for(const std::vector<double>& splice_times);

struct SpecDraw {
  std::optional<ForgerySpec> spec;
  int attempts = 0;
  std::string failure;  // set when no valid spec was found
};

inline constexpr int kMaxSpecAttempts = 100;

/// Draws the spec for record `index` of a dataset seeded with `master_seed`.
/// Deterministic in (pool, scenario, master_seed, index).
SpecDraw sample_spec(AssetStore& assets, const ScenarioConfig& scenario, std::uint64_t master_seed,
                     std::uint64_t index);

/// Number of splices for record `index`, following the scenario's mode.
int draw_splice_count(const ScenarioConfig& scenario, std::uint64_t master_seed, std::uint64_t index);

struct RenderedForgery {
  AudioSignal audio;
  std::vector<double> splice_times;
  std::vector<double> grid_labels;
  double duration = 0.0;
};

struct DurationBounds {
  double min_s = 3.0;
  double max_s = 45.0;
};

/// Room simulation, cutting, concatenation, noise and compression, in that
/// order. Returns nullopt when the result violates the duration bounds.
std::optional<RenderedForgery> render(const ForgerySpec& spec, AssetStore& assets, const DurationBounds& bounds = {},
                                      const std::string& codec_command = {});

// ---------------------------------------------------------------------------
// Datasets

struct GenerationReport {
  std::filesystem::path manifest;
  std::size_t written = 0;
  std::vector<std::pair<std::uint64_t, std::string>> skipped;  // index, reason
};

struct GenerateOptions {
  std::size_t count = 0;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
  unsigned threads = 1;
  std::string codec_command;  // empty: use SPLICELOC_CODEC_CMD
};

/// Writes `count` WAV files under out_dir/audio plus out_dir/manifest.jsonl.
GenerationReport generate_dataset(AssetStore& assets, const ScenarioConfig& scenario, const GenerateOptions& options);

}  // namespace spliceloc
