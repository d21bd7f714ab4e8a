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

#include "spliceloc/scenario.hpp"

#include <sstream>

#include "spliceloc/config_file.hpp"
#include "spliceloc/error.hpp"

namespace spliceloc {

const char* to_string(SpliceCountMode mode) noexcept {
  switch (mode) {
    case SpliceCountMode::Fixed: return "fixed";
    case SpliceCountMode::Uniform: return "uniform";
    case SpliceCountMode::Balanced: return "balanced";
  }
  return "?";
}

const char* to_string(NoiseMode mode) noexcept {
  switch (mode) {
    case NoiseMode::None: return "none";
    case NoiseMode::White: return "white";
    case NoiseMode::File: return "file";
  }
  return "?";
}

const char* to_string(Codec codec) noexcept {
  switch (codec) {
    case Codec::Mp3Sim: return "mp3-sim";
    case Codec::AmrNbSim: return "amr-nb-sim";
    case Codec::External: return "external";
  }
  return "?";
}

Codec parse_codec(std::string_view name) {
  if (name == "mp3-sim" || name == "mp3") return Codec::Mp3Sim;
  if (name == "amr-nb-sim" || name == "amr-nb" || name == "amr") return Codec::AmrNbSim;
  if (name == "external") return Codec::External;
  fail(ErrorKind::Format, "unknown codec '" + std::string(name) + "' (expected mp3-sim, amr-nb-sim or external)");
}

void ScenarioConfig::validate() const {
  const std::string where = "scenario '" + name + "': ";
  require(splices >= 0 && splices <= kMaxSplices, where + "fixed splice count must be in [0,5]");
  require(min_splices >= 0 && max_splices <= kMaxSplices && min_splices <= max_splices,
          where + "splice range must lie in [0,5]");
  require(snr_min_db >= -10.0 && snr_max_db <= 50.0 && snr_min_db <= snr_max_db,
          where + "SNR range must lie in [-10,50] dB");
  require(compression_runs >= 0 && compression_runs <= 5, where + "compression runs must be in [0,5]");
  require(!codecs.empty() || compression_runs == 0, where + "compression requested but no codec allowed");
  require(mp3_min_kbps >= 10.0 && mp3_max_kbps <= 128.0 && mp3_min_kbps <= mp3_max_kbps,
          where + "mp3 bitrate range must lie in [10,128] kbps");
  require(min_duration_s >= 3.0 && max_duration_s <= 45.0 && min_duration_s <= max_duration_s,
          where + "duration bounds must lie in [3,45] s");
  require(min_segment_s >= 0.5, where + "segments shorter than 0.5 s would produce labels off the grid");
  require(noise != NoiseMode::File || !noise_file.empty(), where + "file-backed noise needs noise_file");
}

namespace {

ScenarioConfig balanced_multi(std::string name) {
  ScenarioConfig s;
  s.name = std::move(name);
  s.splice_mode = SpliceCountMode::Balanced;
  s.min_splices = 0;
  s.max_splices = 5;
  return s;
}

}  // namespace

bool is_preset_name(std::string_view name) {
  if (name == "single-clean" || name == "single-degraded" || name == "multisplice-train" ||
      name == "multisplice-uniform" || name == "intersplicing")
    return true;
  if (name.rfind("multicompression-", 0) == 0) {
    const auto k = name.substr(17);
    return k.size() == 1 && k[0] >= '0' && k[0] <= '5';
  }
  return name.rfind("realnoise-", 0) == 0 && name.size() > 10;
}

ScenarioConfig scenario_preset(std::string_view name) {
  if (!is_preset_name(name)) fail(ErrorKind::InvalidArgument, "unknown scenario preset '" + std::string(name) + "'");
  ScenarioConfig s;
  s.name = std::string(name);
  if (name == "single-clean") {
    s.splice_mode = SpliceCountMode::Fixed;
    s.splices = 1;
  } else if (name == "single-degraded") {
    s.splice_mode = SpliceCountMode::Fixed;
    s.splices = 1;
    s.noise = NoiseMode::White;
    s.compression_runs = 1;
  } else if (name == "multisplice-train") {
    s = balanced_multi(s.name);
    s.noise = NoiseMode::White;
    s.compression_runs = 1;
  } else if (name == "multisplice-uniform") {
    s = balanced_multi(s.name);
    s.splice_mode = SpliceCountMode::Uniform;
  } else if (name.rfind("multicompression-", 0) == 0) {
    s = balanced_multi(s.name);
    s.noise = NoiseMode::White;
    s.compression_runs = name.back() - '0';
  } else if (name == "intersplicing") {
    s = balanced_multi(s.name);
    s.rir = false;
    s.same_recording = true;
  } else {  // realnoise-<name>
    s = balanced_multi(s.name);
    s.noise = NoiseMode::File;
    s.compression_runs = 1;
  }
  return s;
}

std::vector<std::string> preset_names() {
  return {"single-clean",      "single-degraded",   "multisplice-train", "multisplice-uniform",
          "multicompression-0", "multicompression-1", "multicompression-2", "multicompression-3",
          "multicompression-4", "multicompression-5", "intersplicing",     "realnoise-<name>"};
}

std::string preset_help() {
  return "Scenario presets:\n"
         "  single-clean          one splice, RIRs, no post-processing\n"
         "  single-degraded       one splice, RIRs, white noise SNR in [-10,50] dB, one mp3/amr-nb pass\n"
         "  multisplice-train     0..5 splices in equal numbers, RIRs, white noise, one compression pass\n"
         "  multisplice-uniform   0..5 splices drawn i.i.d. uniform, RIRs, no post-processing\n"
         "  multicompression-K    as multisplice-train with K (0..5) compression passes\n"
         "  intersplicing         0..5 splices from one recording, no RIRs, no post-processing\n"
         "  realnoise-<name>      as multisplice-train with file-backed noise (set noise_file)\n"
         "Scenario files are 'key = value' text; 'preset = <name>' selects the base and\n"
         "the remaining keys override it: splice_mode, splices, min_splices, max_splices,\n"
         "rir, synthetic_rirs, rir_dir, noise, noise_file, snr_min_db, snr_max_db,\n"
         "compression_runs, codecs, mp3_min_kbps, mp3_max_kbps, min_duration_s,\n"
         "max_duration_s, min_segment_s, same_recording.\n"
         "The external codec command template is read from SPLICELOC_CODEC_CMD\n"
         "(placeholders {in}, {out}, {bitrate}).\n";
}

ScenarioConfig parse_scenario(const KeyValueConfig& cfg, const std::filesystem::path& base_dir) {
  ScenarioConfig s;
  if (const auto preset = cfg.get("preset")) s = scenario_preset(*preset);
  return apply_scenario_overrides(s, cfg, base_dir);
}

ScenarioConfig apply_scenario_overrides(ScenarioConfig s, const KeyValueConfig& cfg,
                                        const std::filesystem::path& base_dir) {
  s.name = cfg.get_string("name", s.name);

  if (const auto mode = cfg.get("splice_mode")) {
    if (*mode == "fixed")
      s.splice_mode = SpliceCountMode::Fixed;
    else if (*mode == "uniform")
      s.splice_mode = SpliceCountMode::Uniform;
    else if (*mode == "balanced")
      s.splice_mode = SpliceCountMode::Balanced;
    else
      fail(ErrorKind::Format, cfg.origin() + ": splice_mode must be fixed, uniform or balanced");
  }
  s.splices = static_cast<int>(cfg.get_int("splices", s.splices));
  s.min_splices = static_cast<int>(cfg.get_int("min_splices", s.min_splices));
  s.max_splices = static_cast<int>(cfg.get_int("max_splices", s.max_splices));

  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };

  s.rir = cfg.get_bool("rir", s.rir);
  s.synthetic_rirs = cfg.get_bool("synthetic_rirs", s.synthetic_rirs);
  if (const auto dir = cfg.get("rir_dir")) s.rir_dir = resolve(*dir);

  if (const auto noise = cfg.get("noise")) {
    if (*noise == "none")
      s.noise = NoiseMode::None;
    else if (*noise == "white")
      s.noise = NoiseMode::White;
    else if (*noise == "file")
      s.noise = NoiseMode::File;
    else
      fail(ErrorKind::Format, cfg.origin() + ": noise must be none, white or file");
  }
  if (const auto file = cfg.get("noise_file")) s.noise_file = resolve(*file);
  s.snr_min_db = cfg.get_double("snr_min_db", s.snr_min_db);
  s.snr_max_db = cfg.get_double("snr_max_db", s.snr_max_db);

  s.compression_runs = static_cast<int>(cfg.get_int("compression_runs", s.compression_runs));
  if (const auto codecs = cfg.get("codecs")) {
    s.codecs.clear();
    for (const auto& c : split_list(*codecs)) s.codecs.push_back(parse_codec(c));
  }
  s.mp3_min_kbps = cfg.get_double("mp3_min_kbps", s.mp3_min_kbps);
  s.mp3_max_kbps = cfg.get_double("mp3_max_kbps", s.mp3_max_kbps);

  s.min_duration_s = cfg.get_double("min_duration_s", s.min_duration_s);
  s.max_duration_s = cfg.get_double("max_duration_s", s.max_duration_s);
  s.min_segment_s = cfg.get_double("min_segment_s", s.min_segment_s);
  s.same_recording = cfg.get_bool("same_recording", s.same_recording);

  cfg.check_all_used();
  s.validate();
  return s;
}

ScenarioConfig load_scenario(const std::string& name_or_path) {
  if (is_preset_name(name_or_path) && !std::filesystem::exists(name_or_path)) {
    ScenarioConfig s = scenario_preset(name_or_path);
    s.validate();
    return s;
  }
  const std::filesystem::path path(name_or_path);
  const auto cfg = KeyValueConfig::load(path);
  return parse_scenario(cfg, path.parent_path());
}

}  // namespace spliceloc
