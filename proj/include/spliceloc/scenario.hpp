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

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace spliceloc {

class KeyValueConfig;

/// Splice counts span [0,5], so a record concatenates up to six sources.
inline constexpr int kMaxSplices = 5;

/// How the number of splices per record is chosen.
///  - fixed:    always `splices`
///  - uniform:  i.i.d. uniform over [min_splices, max_splices]
///  - balanced: equal counts per value; each block of consecutive record
///              indices holds a seeded permutation of the range
enum class SpliceCountMode { Fixed, Uniform, Balanced };

enum class NoiseMode { None, White, File };

enum class Codec { Mp3Sim, AmrNbSim, External };

const char* to_string(SpliceCountMode mode) noexcept;
const char* to_string(NoiseMode mode) noexcept;
const char* to_string(Codec codec) noexcept;
Codec parse_codec(std::string_view name);

struct ScenarioConfig {
  std::string name = "custom";

  SpliceCountMode splice_mode = SpliceCountMode::Fixed;
  int splices = 1;
  int min_splices = 0;
  int max_splices = 5;

  bool rir = true;
  bool synthetic_rirs = true;
  std::filesystem::path rir_dir;  // measured responses (*.wav), optional

  NoiseMode noise = NoiseMode::None;
  std::filesystem::path noise_file;
  double snr_min_db = -10.0;
  double snr_max_db = 50.0;

  int compression_runs = 0;
  std::vector<Codec> codecs{Codec::Mp3Sim, Codec::AmrNbSim};
  double mp3_min_kbps = 10.0;
  double mp3_max_kbps = 128.0;

  double min_duration_s = 3.0;
  double max_duration_s = 45.0;
  double min_segment_s = 0.5;

  /// Every source is the same recording (intersplicing).
  bool same_recording = false;

  /// Throws Contract when a field falls outside the ForgerySpec invariants.
  void validate() const;
};

/// Named presets: single-clean, single-degraded, multisplice-train,
/// multisplice-uniform, multicompression-0..5, intersplicing, realnoise-<name>.
ScenarioConfig scenario_preset(std::string_view name);
bool is_preset_name(std::string_view name);
std::vector<std::string> preset_names();
std::string preset_help();

/// Applies keys from a scenario file on top of `base` (or the file's own
/// `preset = ...` entry). Relative paths resolve against `base_dir`.
ScenarioConfig parse_scenario(const KeyValueConfig& cfg, const std::filesystem::path& base_dir);

/// Applies scenario-file keys (except `preset`) on top of `s` and validates.
ScenarioConfig apply_scenario_overrides(ScenarioConfig s, const KeyValueConfig& cfg,
                                        const std::filesystem::path& base_dir);

/// Accepts either a preset name or a path to a scenario file.
ScenarioConfig load_scenario(const std::string& name_or_path);

}  // namespace spliceloc
