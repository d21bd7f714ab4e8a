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

#include <array>
#include <string>

#include "spliceloc/audio.hpp"
#include "spliceloc/scenario.hpp"

namespace spliceloc {

/// AMR-NB operating modes in kbit/s.
inline constexpr std::array<double, 8> kAmrNbBitrates{4.75, 5.15, 5.9, 6.7, 7.4, 7.95, 10.2, 12.2};

/// Environment variable holding the external encoder command template. The
/// command must read the WAV at {in} and leave a decoded WAV at {out};
/// {bitrate} expands to the requested kbit/s.
inline constexpr const char* kCodecCommandEnv = "SPLICELOC_CODEC_CMD";

struct CodecOptions {
  bool quantize = true;            // false disables magnitude quantization (calibration runs)
  std::string external_command;    // overrides the environment template when non-empty
};

bool valid_bitrate(Codec codec, double kbps) noexcept;

/// Low-pass cutoff (Hz) the simulated codec applies at a given bitrate.
double codec_cutoff_hz(Codec codec, double kbps);

/// Quantizer resolution in bits per band; strictly increasing in bitrate.
double codec_quantizer_bits(Codec codec, double kbps);

/// Lossy encode/decode round trip. Simulated codecs run an STFT, quantize
/// per-band magnitudes, apply a brickwall low-pass and resynthesize; the
/// output has the input's length. Throws Contract on invalid bitrates and
/// Subprocess when the external encoder fails.
AudioSignal compress(const AudioSignal& sig, Codec codec, double bitrate_kbps, const CodecOptions& options = {});

}  // namespace spliceloc
