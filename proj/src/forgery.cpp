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

#include "spliceloc/forgery.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>

#include "spliceloc/codec.hpp"
#include "spliceloc/error.hpp"
#include "spliceloc/manifest.hpp"
#include "spliceloc/rng.hpp"

namespace spliceloc {
namespace {

constexpr std::uint64_t kRirSeed = 0x5EED0F12A7ULL;
constexpr std::uint64_t kNoiseStream = 0x401;
constexpr std::uint64_t kCountStream = 0xC0C0;
constexpr std::uint64_t kBalanceStream = 0xBA1A;

long to_samples(double seconds) { return std::lround(seconds * kWorkingRate); }

bool is_wav(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".wav";
}

std::vector<std::filesystem::path> sorted_wavs(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && is_wav(entry.path())) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<TimeInterval> detect_silence(const AudioSignal& sig, const VadParams& params) {
  require(sig.sample_rate > 0, "detect_silence: invalid sample rate");
  require(sig.duration() >= 0.1 - 1e-9, "detect_silence: signal shorter than 0.1 s");

  const auto n = sig.size();
  const auto win = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(params.frame_s * sig.sample_rate)));
  const auto hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(params.hop_s * sig.sample_rate)));
  const std::size_t frames = n <= win ? 1 : 1 + (n - win) / hop;

  std::vector<double> energy(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    const std::size_t begin = f * hop;
    const std::size_t end = std::min(n, begin + win);
    double acc = 0.0;
    for (std::size_t i = begin; i < end; ++i) acc += static_cast<double>(sig.samples[i]) * sig.samples[i];
    energy[f] = acc / static_cast<double>(end - begin);
  }

  std::vector<double> sorted = energy;
  const auto rank = static_cast<std::size_t>(params.floor_percentile * static_cast<double>(frames - 1));
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(rank), sorted.end());
  const double noise_floor = sorted[rank];
  const double relative = std::min(noise_floor * params.floor_factor, std::pow(10.0, params.max_threshold_dbfs / 10.0));
  const double threshold = std::max(relative, std::pow(10.0, params.min_threshold_dbfs / 10.0));

  std::vector<TimeInterval> out;
  const double rate = sig.sample_rate;
  std::size_t f = 0;
  while (f < frames) {
    if (energy[f] >= threshold) {
      ++f;
      continue;
    }
    const std::size_t first = f;
    while (f < frames && energy[f] < threshold) ++f;
    const double start = static_cast<double>(first * hop) / rate;
    const double end = f == frames ? static_cast<double>(n) / rate : static_cast<double>(f * hop) / rate;
    if (end - start >= params.min_silence_s - 1e-9) out.push_back({start, end});
  }
  return out;
}

// ---------------------------------------------------------------------------

NoiseMix add_noise(const AudioSignal& sig, const AudioSignal& noise, double snr_db) {
  require(std::isfinite(snr_db), "add_noise: SNR must be finite");
  require(!noise.empty(), "add_noise: empty noise source");
  const double p_sig = mean_power(sig.samples);
  if (p_sig <= 0.0) fail(ErrorKind::Degenerate, "add_noise: signal is silent, SNR undefined");

  std::vector<double> tiled(sig.size());
  for (std::size_t i = 0; i < sig.size(); ++i) tiled[i] = noise.samples[i % noise.size()];
  double p_noise = 0.0;
  for (double v : tiled) p_noise += v * v;
  p_noise /= static_cast<double>(std::max<std::size_t>(1, tiled.size()));
  if (p_noise <= 0.0) fail(ErrorKind::Degenerate, "add_noise: noise source is silent");

  NoiseMix mix;
  mix.gain = std::sqrt(p_sig / (p_noise * std::pow(10.0, snr_db / 10.0)));
  std::vector<double> out(sig.size());
  double pk = 0.0;
  for (std::size_t i = 0; i < sig.size(); ++i) {
    out[i] = sig.samples[i] + mix.gain * tiled[i];
    pk = std::max(pk, std::abs(out[i]));
  }
  if (pk > 1.0) mix.scale = 1.0 / pk;
  mix.audio.sample_rate = sig.sample_rate;
  mix.audio.samples.resize(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) mix.audio.samples[i] = static_cast<float>(out[i] * mix.scale);
  return mix;
}

AudioSignal white_noise(std::size_t samples, std::uint64_t seed, int sample_rate) {
  Rng rng(seed);
  AudioSignal out;
  out.sample_rate = sample_rate;
  out.samples.resize(samples);
  for (auto& s : out.samples) s = static_cast<float>(rng.normal());
  return out;
}

std::vector<ImpulseResponse> synthetic_rirs() {
  std::vector<ImpulseResponse> out;
  for (int k = 1; k <= 7; ++k) {
    const double rt60 = 0.1 * k;
    Rng rng(derive_seed(kRirSeed, static_cast<std::uint64_t>(k)));
    ImpulseResponse ir;
    char id[32];
    std::snprintf(id, sizeof id, "synthetic/rt60-%.1f", rt60);
    ir.id = id;
    ir.kind = RirKind::Synthetic;
    ir.rt60 = rt60;
    ir.sample_rate = kWorkingRate;
    const auto len = static_cast<std::size_t>(std::ceil(rt60 * kWorkingRate));
    ir.taps.resize(len);
    ir.taps[0] = 1.0f;  // direct path
    // 60 dB energy decay over rt60: amplitude envelope exp(-3 ln(10) t / rt60)
    const double decay = 3.0 * std::log(10.0) / (rt60 * kWorkingRate);
    for (std::size_t i = 1; i < len; ++i)
      ir.taps[i] = static_cast<float>(0.3 * rng.normal() * std::exp(-decay * static_cast<double>(i)));
    out.push_back(std::move(ir));
  }
  return out;
}

std::vector<ImpulseResponse> load_measured_rirs(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) fail(ErrorKind::Resolution, "RIR directory not found: " + dir.string());
  std::vector<ImpulseResponse> out;
  for (const auto& file : sorted_wavs(dir)) {
    const AudioSignal sig = load_wav_working_rate(file);
    if (sig.empty()) fail(ErrorKind::Format, "empty impulse response: " + file.string());
    ImpulseResponse ir;
    ir.id = "measured/" + file.filename().string();
    ir.kind = RirKind::Measured;
    ir.sample_rate = sig.sample_rate;
    ir.taps = sig.samples;
    out.push_back(std::move(ir));
  }
  return out;
}

// ---------------------------------------------------------------------------

const char* to_string(Split split) noexcept {
  switch (split) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
  }
  return "?";
}

std::size_t SpeakerPool::sample_count() const {
  std::size_t n = 0;
  for (const auto& [speaker, samples] : entries) n += samples.size();
  return n;
}

SpeakerPool SpeakerPool::load(const std::filesystem::path& dir, Split split) {
  if (!std::filesystem::is_directory(dir)) fail(ErrorKind::Io, "speaker pool directory not found: " + dir.string());
  SpeakerPool pool;
  pool.split = split;
  pool.root = std::filesystem::absolute(dir);
  std::vector<std::filesystem::path> speakers;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_directory()) speakers.push_back(entry.path());
  std::sort(speakers.begin(), speakers.end());
  for (const auto& speaker_dir : speakers) {
    const std::string speaker = speaker_dir.filename().string();
    std::vector<std::string> samples;
    for (const auto& file : sorted_wavs(speaker_dir)) samples.push_back(speaker + "/" + file.filename().string());
    if (!samples.empty()) pool.entries[speaker] = std::move(samples);
  }
  if (pool.entries.empty()) fail(ErrorKind::Contract, "speaker pool is empty: " + dir.string());
  return pool;
}

void check_disjoint(const std::vector<SpeakerPool>& pools) {
  std::map<std::string, Split> owner;
  for (const auto& pool : pools) {
    for (const auto& [speaker, samples] : pool.entries) {
      const auto [it, inserted] = owner.emplace(speaker, pool.split);
      if (!inserted)
        fail(ErrorKind::Contract, "speaker '" + speaker + "' appears in both " + to_string(it->second) + " and " +
                                      to_string(pool.split) + " pools");
    }
  }
}

AssetStore::AssetStore(SpeakerPool pool, const ScenarioConfig& scenario) : pool_(std::move(pool)) {
  std::vector<ImpulseResponse> all;
  if (scenario.rir) {
    if (scenario.synthetic_rirs)
      for (auto& ir : synthetic_rirs()) all.push_back(std::move(ir));
    if (!scenario.rir_dir.empty())
      for (auto& ir : load_measured_rirs(scenario.rir_dir)) all.push_back(std::move(ir));
    require(!all.empty(), "scenario '" + scenario.name + "' enables RIRs but none are available");
  }
  for (auto& ir : all) {
    rir_ids_.push_back(ir.id);
    rirs_.emplace(ir.id, std::move(ir));
  }
}

const AudioSignal& AssetStore::source(const std::string& id) {
  std::lock_guard lock(mutex_);
  if (auto it = sources_.find(id); it != sources_.end()) return *it->second;
  const auto path = pool_.root / id;
  if (!std::filesystem::exists(path)) fail(ErrorKind::Resolution, "source sample not found: " + path.string());
  auto sig = std::make_unique<AudioSignal>(load_wav_working_rate(path));
  return *sources_.emplace(id, std::move(sig)).first->second;
}

const ImpulseResponse& AssetStore::rir(const std::string& id) const {
  const auto it = rirs_.find(id);
  if (it == rirs_.end()) fail(ErrorKind::Resolution, "unknown RIR id '" + id + "'");
  return it->second;
}

const AudioSignal& AssetStore::reverberant(const std::string& source_id, const std::string& rir_id) {
  if (rir_id.empty()) return source(source_id);
  const auto key = std::make_pair(source_id, rir_id);
  {
    std::lock_guard lock(mutex_);
    if (auto it = reverberant_.find(key); it != reverberant_.end()) return *it->second;
  }
  auto sig = std::make_unique<AudioSignal>(convolve(source(source_id), rir(rir_id)));
  std::lock_guard lock(mutex_);
  return *reverberant_.try_emplace(key, std::move(sig)).first->second;
}

const std::vector<TimeInterval>& AssetStore::silences(const std::string& source_id, const std::string& rir_id) {
  const auto key = std::make_pair(source_id, rir_id);
  {
    std::lock_guard lock(mutex_);
    if (auto it = silences_.find(key); it != silences_.end()) return *it->second;
  }
  auto intervals = std::make_unique<std::vector<TimeInterval>>(detect_silence(reverberant(source_id, rir_id)));
  std::lock_guard lock(mutex_);
  return *silences_.try_emplace(key, std::move(intervals)).first->second;
}

const AudioSignal& AssetStore::noise_file(const std::filesystem::path& path) {
  std::lock_guard lock(mutex_);
  const std::string key = path.string();
  if (auto it = noises_.find(key); it != noises_.end()) return *it->second;
  if (!std::filesystem::exists(path)) fail(ErrorKind::Resolution, "noise file not found: " + key);
  auto sig = std::make_unique<AudioSignal>(load_wav_working_rate(path));
  return *noises_.emplace(key, std::move(sig)).first->second;
}

// ---------------------------------------------------------------------------

void ForgerySpec::validate() const {
  require(n_sources >= 1 && n_sources <= kMaxSplices + 1, "spec: n_sources must be in [1,6]");
  require(source_ids.size() == static_cast<std::size_t>(n_sources), "spec: one source id per source");
  require(cut_points.size() == static_cast<std::size_t>(n_sources), "spec: one cut pair per source");
  require(rir_ids.empty() || rir_ids.size() == static_cast<std::size_t>(n_sources), "spec: one RIR id per source");
  for (const auto& [a, b] : cut_points) require(a >= 0.0 && a < b, "spec: cut points must be ordered");
  if (noise) require(noise->snr_db >= -10.0 && noise->snr_db <= 50.0, "spec: SNR must lie in [-10,50] dB");
  require(compressions.size() <= 5, "spec: at most 5 compression runs");
  for (const auto& c : compressions)
    require(valid_bitrate(c.codec, c.bitrate_kbps), std::string("spec: invalid bitrate for ") + to_string(c.codec));
}

std::vector<double> grid_labels_for(const std::vector<double>& splice_times) {
  std::vector<double> labels;
  for (double t : splice_times) labels.push_back(std::round(t / 0.5) * 0.5);
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  return labels;
}

int draw_splice_count(const ScenarioConfig& scenario, std::uint64_t master_seed, std::uint64_t index) {
  const int span = scenario.max_splices - scenario.min_splices + 1;
  switch (scenario.splice_mode) {
    case SpliceCountMode::Fixed: return scenario.splices;
    case SpliceCountMode::Uniform: {
      Rng rng(derive_seed(derive_seed(master_seed, kCountStream), index));
      return scenario.min_splices + static_cast<int>(rng.index(static_cast<std::size_t>(span)));
    }
    case SpliceCountMode::Balanced: {
      const std::uint64_t block = index / static_cast<std::uint64_t>(span);
      std::vector<int> perm(static_cast<std::size_t>(span));
      for (int i = 0; i < span; ++i) perm[static_cast<std::size_t>(i)] = scenario.min_splices + i;
      Rng rng(derive_seed(derive_seed(master_seed, kBalanceStream), block));
      rng.shuffle(perm);
      return perm[index % static_cast<std::uint64_t>(span)];
    }
  }
  return scenario.splices;
}

SpecDraw sample_spec(AssetStore& assets, const ScenarioConfig& scenario, std::uint64_t master_seed,
                     std::uint64_t index) {
  const std::uint64_t record_seed = derive_seed(master_seed, index);
  Rng rng(record_seed);
  const int n_sources = draw_splice_count(scenario, master_seed, index) + 1;

  std::vector<const std::string*> speakers;
  for (const auto& [speaker, samples] : assets.pool().entries) speakers.push_back(&speaker);
  require(!speakers.empty(), "sample_spec: empty speaker pool");

  const long min_segment = to_samples(scenario.min_segment_s);
  const long min_total = to_samples(scenario.min_duration_s);
  const long max_total = to_samples(scenario.max_duration_s);

  SpecDraw draw;
  for (draw.attempts = 1; draw.attempts <= kMaxSpecAttempts; ++draw.attempts) {
    const auto& samples = assets.pool().entries.at(*speakers[rng.index(speakers.size())]);

    ForgerySpec spec;
    spec.n_sources = n_sources;
    spec.seed = record_seed;
    const std::string shared = samples[rng.index(samples.size())];
    for (int i = 0; i < n_sources; ++i)
      spec.source_ids.push_back(scenario.same_recording ? shared : samples[rng.index(samples.size())]);
    if (scenario.rir)
      for (int i = 0; i < n_sources; ++i) spec.rir_ids.push_back(assets.rir_ids()[rng.index(assets.rir_ids().size())]);

    long used = 0;
    bool ok = true;
    for (int i = 0; i < n_sources && ok; ++i) {
      const auto& silences = assets.silences(spec.source_ids[i], spec.rir_ids.empty() ? "" : spec.rir_ids[i]);
      if (silences.size() < 2) {
        draw.failure = "source '" + spec.source_ids[i] + "' has fewer than two silent intervals";
        ok = false;
        break;
      }
      std::vector<long> mids;
      for (const auto& s : silences) mids.push_back(to_samples(s.midpoint()));

      const long remaining = n_sources - 1 - i;
      const long max_len = max_total - used - remaining * min_segment;
      const long min_len = std::max(min_segment, i == n_sources - 1 ? min_total - used : 0L);
      std::vector<std::pair<std::size_t, std::size_t>> pairs;
      for (std::size_t a = 0; a < mids.size(); ++a)
        for (std::size_t b = a + 1; b < mids.size(); ++b) {
          const long len = mids[b] - mids[a];
          if (len >= min_len && len <= max_len) pairs.emplace_back(a, b);
        }
      if (pairs.empty()) {
        draw.failure = "no pair of silent positions fits the duration bounds";
        ok = false;
        break;
      }
      const auto [a, b] = pairs[rng.index(pairs.size())];
      spec.cut_points.emplace_back(static_cast<double>(mids[a]) / kWorkingRate,
                                   static_cast<double>(mids[b]) / kWorkingRate);
      used += mids[b] - mids[a];
    }
    if (!ok) continue;

    if (scenario.noise != NoiseMode::None) {
      NoiseSpec noise;
      noise.kind = scenario.noise;
      noise.snr_db = rng.uniform(scenario.snr_min_db, scenario.snr_max_db);
      if (scenario.noise == NoiseMode::File) noise.noise_id = scenario.noise_file.string();
      spec.noise = noise;
    }
    for (int c = 0; c < scenario.compression_runs; ++c) {
      CompressionSpec comp;
      comp.codec = scenario.codecs[rng.index(scenario.codecs.size())];
      if (comp.codec == Codec::AmrNbSim) {
        comp.bitrate_kbps = kAmrNbBitrates[rng.index(kAmrNbBitrates.size())];
      } else {
        const double kbps = rng.uniform(scenario.mp3_min_kbps, scenario.mp3_max_kbps);
        comp.bitrate_kbps = std::clamp(std::round(kbps * 100.0) / 100.0, scenario.mp3_min_kbps, scenario.mp3_max_kbps);
      }
      spec.compressions.push_back(comp);
    }
    spec.validate();
    draw.spec = std::move(spec);
    draw.failure.clear();
    return draw;
  }
  draw.attempts = kMaxSpecAttempts;
  return draw;
}

std::optional<RenderedForgery> render(const ForgerySpec& spec, AssetStore& assets, const DurationBounds& bounds,
                                      const std::string& codec_command) {
  spec.validate();
  RenderedForgery out;
  out.audio.sample_rate = kWorkingRate;

  long total = 0;
  for (int i = 0; i < spec.n_sources; ++i) {
    const auto& sig = assets.reverberant(spec.source_ids[i], spec.rir_ids.empty() ? "" : spec.rir_ids[i]);
    const long start = to_samples(spec.cut_points[i].first);
    const long end = to_samples(spec.cut_points[i].second);
    if (end > static_cast<long>(sig.size()))
      fail(ErrorKind::Contract, "cut point beyond the end of '" + spec.source_ids[i] + "'");
    out.audio.samples.insert(out.audio.samples.end(), sig.samples.begin() + start, sig.samples.begin() + end);
    total += end - start;
    if (i + 1 < spec.n_sources) out.splice_times.push_back(static_cast<double>(total) / kWorkingRate);
  }
  out.duration = out.audio.duration();
  if (out.duration < bounds.min_s - 1e-9 || out.duration > bounds.max_s + 1e-9) return std::nullopt;

  if (spec.noise) {
    const AudioSignal noise = spec.noise->kind == NoiseMode::File
                                  ? assets.noise_file(spec.noise->noise_id)
                                  : white_noise(out.audio.size(), derive_seed(spec.seed, kNoiseStream));
    out.audio = add_noise(out.audio, noise, spec.noise->snr_db).audio;
  }
  CodecOptions codec_options;
  codec_options.external_command = codec_command;
  for (const auto& c : spec.compressions) out.audio = compress(out.audio, c.codec, c.bitrate_kbps, codec_options);
  normalize_if_clipping(out.audio);

  out.grid_labels = grid_labels_for(out.splice_times);
  return out;
}

// ---------------------------------------------------------------------------

GenerationReport generate_dataset(AssetStore& assets, const ScenarioConfig& scenario, const GenerateOptions& options) {
  scenario.validate();
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(options.out_dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create output directory " + options.out_dir.string() + ": " + ec.message());
  if (options.count > 0) {
    fs::create_directories(options.out_dir / "audio", ec);
    if (ec) fail(ErrorKind::Io, "cannot create " + (options.out_dir / "audio").string() + ": " + ec.message());
  }

  const DurationBounds bounds{scenario.min_duration_s, scenario.max_duration_s};
  std::vector<std::string> lines(options.count);
  std::vector<std::string> failures(options.count);

  auto work = [&](std::size_t index) {
    const SpecDraw draw = sample_spec(assets, scenario, options.seed, index);
    if (!draw.spec) {
      failures[index] = draw.failure.empty() ? "no valid spec" : draw.failure;
      return;
    }
    auto rendered = render(*draw.spec, assets, bounds, options.codec_command);
    if (!rendered) {
      failures[index] = "rendered duration outside bounds";
      return;
    }
    char id[32];
    std::snprintf(id, sizeof id, "rec-%06zu", index);
    ForgeryRecord record;
    record.id = id;
    record.spec = *draw.spec;
    record.audio_path = options.out_dir / "audio" / (record.id + ".wav");
    record.splice_times = rendered->splice_times;
    record.grid_labels = rendered->grid_labels;
    record.duration = rendered->duration;
    write_wav(record.audio_path, rendered->audio);
    lines[index] = manifest_line(record, options.out_dir);
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(options.count)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < options.count; ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = t; i < options.count; i += threads) work(i);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  GenerationReport report;
  report.manifest = options.out_dir / "manifest.jsonl";
  std::ofstream out(report.manifest, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write manifest " + report.manifest.string());
  for (std::size_t i = 0; i < options.count; ++i) {
    if (lines[i].empty()) {
      report.skipped.emplace_back(i, failures[i]);
      continue;
    }
    out << lines[i] << '\n';
    ++report.written;
  }
  if (!out) fail(ErrorKind::Io, "failed writing manifest " + report.manifest.string());
  return report;
}

}  // namespace spliceloc
