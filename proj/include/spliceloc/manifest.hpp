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
#include <vector>

#include "spliceloc/forgery.hpp"

namespace spliceloc {

/// One JSON object (no trailing newline). audio_path is written relative to
/// `manifest_dir` when it lies below it.
std::string manifest_line(const ForgeryRecord& record, const std::filesystem::path& manifest_dir);

/// Parses a JSON-lines manifest; blank lines are skipped and audio paths are
/// resolved against the manifest's directory. Throws Format on malformed lines.
std::vector<ForgeryRecord> read_manifest(const std::filesystem::path& path);

ForgeryRecord parse_manifest_line(const std::string& line, const std::filesystem::path& manifest_dir);

/// Violated record invariants, empty when the record is valid. Checks the
/// spec, splice-time ordering and range, splice count, grid labels and
/// duration bounds.
std::vector<std::string> record_problems(const ForgeryRecord& record, double min_duration_s = 3.0,
                                         double max_duration_s = 45.0);

struct RecordInspection {
  std::string id;
  double manifest_duration = 0.0;
  double audio_duration = 0.0;
  std::size_t frames = 0;           // re-derived from the audio
  std::size_t expected_frames = 0;  // from the manifest duration
  std::vector<double> grid_labels;  // re-derived from the splice times
  std::vector<std::string> problems;
};

/// Loads each record's audio and re-derives frame count and label grid.
std::vector<RecordInspection> inspect_manifest(const std::filesystem::path& manifest, std::size_t threads = 0);

}  // namespace spliceloc
