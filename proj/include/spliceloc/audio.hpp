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
#include <string>
#include <vector>

namespace spliceloc {

/// Rate every pipeline stage runs at after ingest.
inline constexpr int kWorkingRate = 16000;

/// Mono PCM audio with samples nominally in [-1, 1].
struct AudioSignal {
  std::vector<float> samples;
  int sample_rate = kWorkingRate;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
  double duration() const noexcept {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

enum class RirKind { Synthetic, Measured };

struct ImpulseResponse {
  std::string id;
  std::vector<float> taps;
  int sample_rate = kWorkingRate;
  RirKind kind = RirKind::Measured;
  double rt60 = 0.0;  // seconds; synthetic responses only
};

/// Reads a RIFF/WAVE file (PCM16 or float32, any channel count) and mixes it
/// down to mono by averaging channels. Throws Format / Unsupported / Io.
AudioSignal load_wav(const std::filesystem::path& path);

/// Reads a WAV file and resamples it to the working rate.
AudioSignal load_wav_working_rate(const std::filesystem::path& path);

/// Writes mono PCM16. Samples are clamped to [-1, 1] before quantization.
void write_wav(const std::filesystem::path& path, const AudioSignal& sig);

/// Serializes mono PCM16 WAV bytes without touching the filesystem.
std::vector<unsigned char> encode_wav_pcm16(const AudioSignal& sig);

/// Windowed-sinc polyphase resampling (Kaiser beta 8, 64 taps per phase).
/// Output length is round(len * target / source).
std::vector<double> resample_samples(std::span<const double> input, int source_rate, int target_rate);
AudioSignal resample(const AudioSignal& sig, int target_rate);

/// Full linear convolution via FFT overlap-add; length a + b - 1.
std::vector<double> fft_convolve(std::span<const double> signal, std::span<const double> kernel);

/// Convolves with a room response, truncates to the input length and rescales
/// the peak to min(1, input peak).
AudioSignal convolve(const AudioSignal& sig, const ImpulseResponse& ir);

double peak(std::span<const float> samples) noexcept;
double mean_power(std::span<const float> samples) noexcept;

/// Scales in place so that max |sample| equals `target_peak`; no-op on silence.
void scale_to_peak(AudioSignal& sig, double target_peak);

/// Scales down only if the signal would clip.
void normalize_if_clipping(AudioSignal& sig);

std::vector<double> to_double(std::span<const float> samples);
std::vector<float> to_float(std::span<const double> samples);

}  // namespace spliceloc
