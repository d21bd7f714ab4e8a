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

#include "spliceloc/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "spliceloc/error.hpp"
#include "spliceloc/fft.hpp"

namespace spliceloc {
namespace {

constexpr double kEpsilon = 1e-10;
constexpr std::size_t kBins = kFrameSamples / 2 + 1;
constexpr std::uint16_t kCacheVersion = 1;

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> mel_edges() {
  const double top = hz_to_mel(kWorkingRate / 2.0);
  std::vector<double> edges(kMelBins + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(top * static_cast<double>(i) / static_cast<double>(kMelBins + 1));
  return edges;
}

struct Filterbank {
  std::vector<std::size_t> first;        // first bin with non-zero weight
  std::vector<std::vector<double>> weights;
};

const Filterbank& filterbank() {
  static const Filterbank fb = [] {
    Filterbank f;
    const auto edges = mel_edges();
    const double bin_hz = static_cast<double>(kWorkingRate) / kFrameSamples;
    for (std::size_t m = 0; m < kMelBins; ++m) {
      const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
      std::size_t start = kBins;
      std::vector<double> w;
      for (std::size_t k = 0; k < kBins; ++k) {
        const double hz = bin_hz * static_cast<double>(k);
        double v = 0.0;
        if (hz > lo && hz <= mid) v = (hz - lo) / (mid - lo);
        else if (hz > mid && hz < hi) v = (hi - hz) / (hi - mid);
        if (v > 0.0) {
          if (start == kBins) start = k;
          w.resize(k - start + 1, 0.0);
          w[k - start] = v;
        }
      }
      f.first.push_back(start == kBins ? 0 : start);
      f.weights.push_back(std::move(w));
    }
    return f;
  }();
  return fb;
}

const std::vector<double>& hann() {
  static const std::vector<double> w = [] {
    std::vector<double> v(kFrameSamples);
    for (std::size_t i = 0; i < kFrameSamples; ++i)
      v[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) / kFrameSamples);
    return v;
  }();
  return w;
}

/// One-sided spectra of the mean-removed, Hann-windowed frames.
std::vector<std::vector<fft::Complex>> frame_spectra(const AudioSignal& sig) {
  require(sig.sample_rate == kWorkingRate, "features require 16 kHz audio");
  require(!sig.empty(), "features: empty signal");
  double mean = 0.0;
  for (float s : sig.samples) mean += s;
  mean /= static_cast<double>(sig.size());

  const std::size_t frames = frame_count(sig.size());
  const auto& window = hann();
  std::vector<std::vector<fft::Complex>> out(frames);
  std::vector<double> frame(kFrameSamples);
  for (std::size_t f = 0; f < frames; ++f) {
    std::fill(frame.begin(), frame.end(), 0.0);
    const std::size_t begin = f * kFrameSamples;
    const std::size_t end = std::min(sig.size(), begin + kFrameSamples);
    for (std::size_t i = begin; i < end; ++i) frame[i - begin] = (sig.samples[i] - mean) * window[i - begin];
    out[f] = fft::rfft(frame, kFrameSamples);
  }
  return out;
}

Matrix log_mel(const std::vector<std::vector<fft::Complex>>& spectra) {
  const auto& fb = filterbank();
  Matrix mel(spectra.size(), kMelBins);
  for (std::size_t f = 0; f < spectra.size(); ++f) {
    for (std::size_t m = 0; m < kMelBins; ++m) {
      double p = 0.0;
      const auto& w = fb.weights[m];
      for (std::size_t j = 0; j < w.size(); ++j) p += w[j] * std::norm(spectra[f][fb.first[m] + j]);
      mel.at(f, m) = std::log1p(p / kEpsilon);
    }
  }
  return mel;
}

Matrix centroid(const std::vector<std::vector<fft::Complex>>& spectra) {
  const double bin_hz = static_cast<double>(kWorkingRate) / kFrameSamples;
  Matrix out(spectra.size(), 1);
  for (std::size_t f = 0; f < spectra.size(); ++f) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < spectra[f].size(); ++k) {
      const double mag = std::abs(spectra[f][k]);
      num += bin_hz * static_cast<double>(k) * mag;
      den += mag;
    }
    out.at(f, 0) = den < 1e-12 ? 0.0 : num / den;
  }
  return out;
}

const std::vector<double>& dct_basis() {
  static const std::vector<double> basis = [] {
    const std::size_t n = kMelBins;
    std::vector<double> b(n * n);
    for (std::size_t k = 0; k < n; ++k) {
      const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
      for (std::size_t i = 0; i < n; ++i)
        b[k * n + i] = scale * std::cos(M_PI * static_cast<double>(k) * (2.0 * static_cast<double>(i) + 1.0) / (2.0 * n));
    }
    return b;
  }();
  return basis;
}

double basis_at(std::size_t n, std::size_t k, std::size_t i) {
  if (n == kMelBins) return dct_basis()[k * n + i];
  const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
  return scale * std::cos(M_PI * static_cast<double>(k) * (2.0 * static_cast<double>(i) + 1.0) / (2.0 * n));
}

/// Writes the min-max normalized block into columns [offset, offset + m.cols).
void normalize_into(const Matrix& m, std::size_t offset, FeatureStack& out) {
  const auto [lo_it, hi_it] = std::minmax_element(m.data.begin(), m.data.end());
  const double lo = *lo_it, hi = *hi_it;
  const double range = hi - lo;
  const bool constant = !(range > 1e-9 * std::max(1.0, std::abs(hi)));
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) {
      const double v = constant ? 0.0 : std::clamp(2.0 * (m.at(r, c) - lo) / range - 1.0, -1.0, 1.0);
      out.data[r * out.width + offset + c] = static_cast<float>(v);
    }
}

void put_u16(std::ostream& out, std::uint16_t v) {
  const unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
  out.write(reinterpret_cast<const char*>(b), 2);
}
void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}
std::uint32_t get_u32(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

}  // namespace

std::size_t frame_count(std::size_t samples) { return samples == 0 ? 0 : (samples + kFrameSamples - 1) / kFrameSamples; }

std::vector<double> mel_center_frequencies() {
  const auto edges = mel_edges();
  return {edges.begin() + 1, edges.end() - 1};
}

Matrix mel_spectrogram(const AudioSignal& sig) { return log_mel(frame_spectra(sig)); }

Matrix spectral_centroid(const AudioSignal& sig) { return centroid(frame_spectra(sig)); }

std::vector<double> dct_ii(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) out[k] += basis_at(n, k, i) * x[i];
  return out;
}

std::vector<double> dct_iii(std::span<const double> c) {
  const std::size_t n = c.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) out[i] += basis_at(n, k, i) * c[k];
  return out;
}

Matrix mfcc(const Matrix& log_mel_frames, std::size_t n) {
  require(n <= log_mel_frames.cols, "mfcc: more coefficients than Mel bins");
  Matrix out(log_mel_frames.rows, n);
  const std::size_t bins = log_mel_frames.cols;
  for (std::size_t r = 0; r < log_mel_frames.rows; ++r)
    for (std::size_t k = 0; k < n; ++k) {
      double acc = 0.0;
      for (std::size_t i = 0; i < bins; ++i) acc += basis_at(bins, k, i) * log_mel_frames.at(r, i);
      out.at(r, k) = acc;
    }
  return out;
}

std::size_t feature_width(FeatureSet set) noexcept { return set == FeatureSet::MelOnly ? kMelBins : kFeatureWidth; }

FeatureStack assemble(const AudioSignal& sig, FeatureSet set) {
  require(sig.duration() <= kMaxFeatureDuration + 1e-9, "features: audio longer than 45 s");
  const auto spectra = frame_spectra(sig);
  FeatureStack out;
  out.frames = spectra.size();
  out.width = feature_width(set);
  out.source_duration = sig.duration();
  out.data.assign(out.frames * out.width, 0.0f);

  const Matrix mel = log_mel(spectra);
  normalize_into(mel, 0, out);
  if (set == FeatureSet::Combined) {
    normalize_into(mfcc(mel), kMelBins, out);
    normalize_into(centroid(spectra), kMelBins + kMfccCoefficients, out);
  }
  return out;
}

void write_feature_cache(const std::filesystem::path& path, const FeatureStack& stack) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write feature cache " + path.string());
  out.write("SFFT", 4);
  put_u16(out, kCacheVersion);
  put_u32(out, static_cast<std::uint32_t>(stack.frames));
  put_u32(out, static_cast<std::uint32_t>(stack.width));
  for (float v : stack.data) {
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    put_u32(out, u);
  }
  if (!out) fail(ErrorKind::Io, "failed writing feature cache " + path.string());
}

FeatureStack read_feature_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open feature cache " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 14 || std::memcmp(bytes.data(), "SFFT", 4) != 0)
    fail(ErrorKind::Format, "not a feature cache: " + path.string());
  const std::uint16_t version = static_cast<std::uint16_t>(bytes[4] | bytes[5] << 8);
  if (version != kCacheVersion) fail(ErrorKind::Unsupported, "feature cache version " + std::to_string(version));
  FeatureStack stack;
  stack.frames = get_u32(&bytes[6]);
  stack.width = get_u32(&bytes[10]);
  if (bytes.size() != 14 + 4 * stack.frames * stack.width)
    fail(ErrorKind::Format, "feature cache size mismatch: " + path.string());
  stack.data.resize(stack.frames * stack.width);
  for (std::size_t i = 0; i < stack.data.size(); ++i) {
    const std::uint32_t u = get_u32(&bytes[14 + 4 * i]);
    std::memcpy(&stack.data[i], &u, 4);
  }
  stack.source_duration = static_cast<double>(stack.frames) * kFrameSeconds;
  return stack;
}

FeatureStack load_features(const std::filesystem::path& audio_path, const std::filesystem::path& cache_path,
                           FeatureSet set) {
  if (!cache_path.empty() && std::filesystem::exists(cache_path)) {
    auto stack = read_feature_cache(cache_path);
    if (stack.width == feature_width(set)) return stack;
  }
  const auto sig = load_wav_working_rate(audio_path);
  auto stack = assemble(sig, set);
  if (!cache_path.empty()) {
    if (cache_path.has_parent_path()) std::filesystem::create_directories(cache_path.parent_path());
    // write then rename so concurrent readers never see a partial file
    auto tmp = cache_path;
    tmp += ".tmp" + std::to_string(reinterpret_cast<std::uintptr_t>(&stack));
    write_feature_cache(tmp, stack);
    std::filesystem::rename(tmp, cache_path);
  }
  return stack;
}

}  // namespace spliceloc
