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

#include "spliceloc/manifest.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <thread>

#include "json.hpp"
#include "spliceloc/error.hpp"
#include "spliceloc/features.hpp"

namespace spliceloc {
namespace {

using nlohmann::json;

NoiseMode parse_noise_mode(const std::string& s) {
  if (s == "none") return NoiseMode::None;
  if (s == "white") return NoiseMode::White;
  if (s == "file") return NoiseMode::File;
  fail(ErrorKind::Format, "unknown noise kind '" + s + "'");
}

json spec_to_json(const ForgerySpec& spec) {
  json j;
  j["n_sources"] = spec.n_sources;
  j["source_ids"] = spec.source_ids;
  j["rir_ids"] = spec.rir_ids;
  json cuts = json::array();
  for (const auto& [a, b] : spec.cut_points) cuts.push_back({a, b});
  j["cut_points_s"] = cuts;
  if (spec.noise) {
    j["noise"] = {{"kind", to_string(spec.noise->kind)}, {"snr_db", spec.noise->snr_db}};
    if (!spec.noise->noise_id.empty()) j["noise"]["noise_id"] = spec.noise->noise_id;
  } else {
    j["noise"] = nullptr;
  }
  json comps = json::array();
  for (const auto& c : spec.compressions) comps.push_back({{"codec", to_string(c.codec)}, {"bitrate_kbps", c.bitrate_kbps}});
  j["compressions"] = comps;
  j["seed"] = spec.seed;
  return j;
}

ForgerySpec spec_from_json(const json& j) {
  ForgerySpec spec;
  spec.n_sources = j.at("n_sources").get<int>();
  spec.source_ids = j.at("source_ids").get<std::vector<std::string>>();
  spec.rir_ids = j.value("rir_ids", std::vector<std::string>{});
  for (const auto& cut : j.at("cut_points_s")) spec.cut_points.emplace_back(cut.at(0).get<double>(), cut.at(1).get<double>());
  if (j.contains("noise") && !j["noise"].is_null()) {
    const auto& n = j["noise"];
    NoiseSpec noise;
    noise.kind = parse_noise_mode(n.at("kind").get<std::string>());
    noise.snr_db = n.at("snr_db").get<double>();
    noise.noise_id = n.value("noise_id", std::string{});
    spec.noise = noise;
  }
  for (const auto& c : j.value("compressions", json::array()))
    spec.compressions.push_back({parse_codec(c.at("codec").get<std::string>()), c.at("bitrate_kbps").get<double>()});
  spec.seed = j.value("seed", std::uint64_t{0});
  return spec;
}

}  // namespace

std::string manifest_line(const ForgeryRecord& record, const std::filesystem::path& manifest_dir) {
  std::filesystem::path audio = record.audio_path;
  if (!manifest_dir.empty()) {
    const auto rel = audio.lexically_relative(manifest_dir);
    if (!rel.empty() && rel.native().rfind("..", 0) != 0) audio = rel;
  }
  json j;
  j["id"] = record.id;
  j["audio_path"] = audio.generic_string();
  j["duration_s"] = record.duration;
  j["splice_times_s"] = record.splice_times;
  j["grid_labels"] = record.grid_labels;
  j["spec"] = spec_to_json(record.spec);
  return j.dump();
}

ForgeryRecord parse_manifest_line(const std::string& line, const std::filesystem::path& manifest_dir) {
  ForgeryRecord r;
  try {
    const json j = json::parse(line);
    r.id = j.at("id").get<std::string>();
    std::filesystem::path audio(j.at("audio_path").get<std::string>());
    r.audio_path = audio.is_absolute() ? audio : manifest_dir / audio;
    r.duration = j.value("duration_s", 0.0);
    r.splice_times = j.value("splice_times_s", std::vector<double>{});
    r.grid_labels = j.at("grid_labels").get<std::vector<double>>();
    if (j.contains("spec")) r.spec = spec_from_json(j["spec"]);
  } catch (const json::exception& e) {
    fail(ErrorKind::Format, std::string("malformed manifest record: ") + e.what());
  }
  return r;
}

std::vector<ForgeryRecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open manifest " + path.string());
  const auto dir = std::filesystem::absolute(path).parent_path();
  std::vector<ForgeryRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_manifest_line(line, dir));
    } catch (const Error& e) {
      fail(e.kind(), path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<std::string> record_problems(const ForgeryRecord& r, double min_duration_s, double max_duration_s) {
  std::vector<std::string> out;
  try {
    r.spec.validate();
  } catch (const Error& e) {
    out.push_back(std::string("spec: ") + e.what());
  }
  if (!(r.duration >= min_duration_s - 1e-9 && r.duration <= max_duration_s + 1e-9))
    out.push_back("duration " + std::to_string(r.duration) + " s outside [" + std::to_string(min_duration_s) + ", " +
                  std::to_string(max_duration_s) + "]");
  if (r.splice_times.size() != static_cast<std::size_t>(std::max(0, r.spec.n_sources - 1)))
    out.push_back(std::to_string(r.splice_times.size()) + " splice times for " + std::to_string(r.spec.n_sources) +
                  " sources");
  for (std::size_t i = 0; i < r.splice_times.size(); ++i) {
    const double t = r.splice_times[i];
    if (!(t > 0.0 && t < r.duration)) out.push_back("splice time " + std::to_string(t) + " not inside (0, duration)");
    if (i > 0 && !(t > r.splice_times[i - 1])) out.push_back("splice times not strictly ascending");
  }
  if (r.grid_labels != grid_labels_for(r.splice_times)) out.push_back("grid labels do not match the splice times");
  for (double g : r.grid_labels)
    if (g < 0.5 || g > 44.5) out.push_back("grid label " + std::to_string(g) + " outside [0.5, 44.5]");
  if (r.spec.cut_points.size() == static_cast<std::size_t>(r.spec.n_sources)) {
    double total = 0.0;
    for (std::size_t k = 0; k < r.splice_times.size(); ++k) {
      total += r.spec.cut_points[k].second - r.spec.cut_points[k].first;
      if (std::abs(total - r.splice_times[k]) > 2.0 / kWorkingRate)
        out.push_back("splice time " + std::to_string(k) + " disagrees with the cut points");
    }
  }
  return out;
}

std::vector<RecordInspection> inspect_manifest(const std::filesystem::path& manifest, std::size_t threads) {
  const auto records = read_manifest(manifest);
  std::vector<RecordInspection> out(records.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) {
      const auto& r = records[i];
      auto& row = out[i];
      row.id = r.id;
      row.manifest_duration = r.duration;
      row.expected_frames = frame_count(static_cast<std::size_t>(std::llround(r.duration * kWorkingRate)));
      row.grid_labels = grid_labels_for(r.splice_times);
      row.problems = record_problems(r);
      try {
        const auto working = load_wav_working_rate(r.audio_path);
        row.audio_duration = working.duration();
        row.frames = frame_count(working.samples.size());
        if (std::abs(row.audio_duration - r.duration) > 1.0 / kWorkingRate)
          row.problems.push_back("audio lasts " + std::to_string(row.audio_duration) + " s, manifest says " +
                                 std::to_string(r.duration) + " s");
        if (row.frames != row.expected_frames)
          row.problems.push_back("audio yields " + std::to_string(row.frames) + " frames, expected " +
                                 std::to_string(row.expected_frames));
      } catch (const Error& e) {
        row.problems.push_back(std::string("audio: ") + e.what());
      }
      if (row.grid_labels != r.grid_labels) row.problems.push_back("re-derived label grid differs from the manifest");
    }
  };
  std::size_t n = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  n = std::max<std::size_t>(1, std::min(n, records.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace spliceloc
