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
#include <string>

#include "spliceloc/audio.hpp"

namespace spliceloc::synth {

/// Voiced syllables separated by pauses over a recording-specific background
/// (noise level, spectral tilt, hum) and channel colouring.
AudioSignal speech_like(double duration_s, std::uint64_t seed, double f0_hz);

AudioSignal tone(double hz, double duration_s, double amplitude = 0.5, int sample_rate = kWorkingRate);

struct PoolOptions {
  int speakers = 3;
  int recordings = 3;
  double min_duration_s = 12.0;
  double max_duration_s = 18.0;
  std::uint64_t seed = 1;
  std::string prefix = "spk";
};

/// Writes <dir>/<prefix>NN/recMM.wav.
void write_pool(const std::filesystem::path& dir, const PoolOptions& options);

/// Coloured noise suitable as a file-backed noise source.
AudioSignal noise_bed(double duration_s, std::uint64_t seed);

}  // namespace spliceloc::synth
