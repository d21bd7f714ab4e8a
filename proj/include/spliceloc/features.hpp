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

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "spliceloc/audio.hpp"

namespace spliceloc {

inline constexpr std::size_t kFrameSamples = 8000;  // 0.5 s at the working rate
inline constexpr double kFrameSeconds = 0.5;
inline constexpr std::size_t kMelBins = 256;
inline constexpr std::size_t kMfccCoefficients = 20;
inline constexpr std::size_t kFeatureWidth = kMelBins + kMfccCoefficients + 1;
inline constexpr std::size_t kMaxFrames = 90;
inline constexpr double kMaxFeatureDuration = 45.0;

/// Row-major frames x columns matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

/// ceil(samples / 8000), at least one frame for non-empty input.
std::size_t frame_count(std::size_t samples);

/// HTK-scale centre frequencies (Hz) of the 256 triangular filters over 0..8 kHz.
std::vector<double> mel_center_frequencies();

/// Hann-windowed, non-overlapping 0.5 s STFT; log(1 + P / 1e-10) of the Mel
/// filterbank power. The signal mean is removed first.
Matrix mel_spectrogram(const AudioSignal& sig);

/// Orthonormal DCT-II along each row, first `n` coefficients.
Matrix mfcc(const Matrix& log_mel, std::size_t n = kMfccCoefficients);

/// Magnitude-weighted mean frequency per frame (Hz); 0 for near-silent frames.
Matrix spectral_centroid(const AudioSignal& sig);

std::vector<double> dct_ii(std::span<const double> x);
/// Inverse of the orthonormal dct_ii.
std::vector<double> dct_iii(std::span<const double> c);

enum class FeatureSet { Combined, MelOnly };

std::size_t feature_width(FeatureSet set) noexcept;

struct FeatureStack {
  std::size_t frames = 0;
  std::size_t width = kFeatureWidth;
  std::vector<float> data;  // frames x width, row-major
  double source_duration = 0.0;

  const float* row(std::size_t i) const { return data.data() + i * width; }
};

/// Min-max normalizes each representation to [-1, 1] (constant slices become 0)
/// and concatenates [mel | mfcc | centroid] per frame. Throws Contract above 45 s.
FeatureStack assemble(const AudioSignal& sig, FeatureSet set = FeatureSet::Combined);

/// Binary cache: "SFFT", u16 version, u32 frames, u32 width, float32 LE row-major.
void write_feature_cache(const std::filesystem::path& path, const FeatureStack& stack);
FeatureStack read_feature_cache(const std::filesystem::path& path);

/// Reads `cache_path` when it exists, otherwise extracts from `audio_path` and
/// writes the cache. An empty cache path disables caching.
FeatureStack load_features(const std::filesystem::path& audio_path, const std::filesystem::path& cache_path,
                           FeatureSet set = FeatureSet::Combined);

}  // namespace spliceloc
