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

#include "spliceloc/codec.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>

#include "spliceloc/error.hpp"
#include "spliceloc/fft.hpp"

namespace spliceloc {
namespace {

constexpr std::size_t kFrame = 512;
constexpr std::size_t kHop = kFrame / 2;
constexpr std::size_t kBands = 32;

std::string bitrate_text(double kbps) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", kbps);
  return buf;
}

AudioSignal simulate(const AudioSignal& sig, Codec codec, double kbps, const CodecOptions& options) {
  const std::size_t n = sig.size();
  if (n == 0) return sig;

  // sqrt-Hann analysis and synthesis windows at 50% overlap sum to one.
  std::array<double, kFrame> window{};
  for (std::size_t i = 0; i < kFrame; ++i)
    window[i] = std::sqrt(0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) / kFrame));

  const std::size_t pad = kFrame / 2;
  std::vector<double> padded(pad + n + kFrame, 0.0);
  for (std::size_t i = 0; i < n; ++i) padded[pad + i] = sig.samples[i];
  std::vector<double> out(padded.size(), 0.0);

  const double nyquist = sig.sample_rate / 2.0;
  const double cutoff = codec_cutoff_hz(codec, kbps);
  const std::size_t bins = kFrame / 2 + 1;
  const auto cutoff_bin = static_cast<std::size_t>(std::floor(cutoff / nyquist * (kFrame / 2)));
  const double levels = std::exp2(codec_quantizer_bits(codec, kbps));
  const std::size_t band_width = (bins + kBands - 1) / kBands;

  std::vector<double> frame(kFrame);
  for (std::size_t start = 0; start + kFrame <= padded.size(); start += kHop) {
    for (std::size_t i = 0; i < kFrame; ++i) frame[i] = padded[start + i] * window[i];
    auto spec = fft::rfft(frame, kFrame);

    for (std::size_t k = cutoff_bin + 1; k < bins; ++k) spec[k] = 0.0;

    if (options.quantize) {
      for (std::size_t b0 = 0; b0 < bins; b0 += band_width) {
        const std::size_t b1 = std::min(bins, b0 + band_width);
        double band_max = 0.0;
        for (std::size_t k = b0; k < b1; ++k) band_max = std::max(band_max, std::abs(spec[k]));
        if (band_max <= 0.0) continue;
        const double step = band_max / levels;
        for (std::size_t k = b0; k < b1; ++k) {
          const double mag = std::abs(spec[k]);
          if (mag <= 0.0) continue;
          const double q = std::round(mag / step) * step;
          spec[k] *= q / mag;
        }
      }
    }

    const auto rec = fft::irfft(spec, kFrame);
    for (std::size_t i = 0; i < kFrame; ++i) out[start + i] += rec[i] * window[i];
  }

  AudioSignal result;
  result.sample_rate = sig.sample_rate;
  result.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) result.samples[i] = static_cast<float>(out[pad + i]);
  normalize_if_clipping(result);
  return result;
}

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
  for (std::size_t pos = 0; (pos = text.find(from, pos)) != std::string::npos; pos += to.size())
    text.replace(pos, from.size(), to);
  return text;
}

std::string shell_quote(const std::string& s) { return "'" + replace_all(s, "'", "'\\''") + "'"; }

AudioSignal run_external(const AudioSignal& sig, double kbps, const CodecOptions& options) {
  std::string tmpl = options.external_command;
  if (tmpl.empty()) {
    const char* env = std::getenv(kCodecCommandEnv);
    if (env == nullptr || *env == '\0')
      fail(ErrorKind::Subprocess, std::string("external codec selected but ") + kCodecCommandEnv + " is not set");
    tmpl = env;
  }

  static std::atomic<unsigned long> counter{0};
  const auto dir = std::filesystem::temp_directory_path();
  const std::string stem = "spliceloc-codec-" + std::to_string(::getpid()) + "-" + std::to_string(counter++);
  const auto in_path = dir / (stem + "-in.wav");
  const auto out_path = dir / (stem + "-out.wav");
  write_wav(in_path, sig);

  std::string cmd = replace_all(tmpl, "{in}", shell_quote(in_path.string()));
  cmd = replace_all(cmd, "{out}", shell_quote(out_path.string()));
  cmd = replace_all(cmd, "{bitrate}", bitrate_text(kbps));

  std::string captured;
  FILE* pipe = ::popen(("{ " + cmd + "\n} 2>&1").c_str(), "r");
  if (pipe == nullptr) {
    std::filesystem::remove(in_path);
    fail(ErrorKind::Subprocess, "cannot launch external codec: " + cmd);
  }
  std::array<char, 512> buf{};
  while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe) != nullptr) captured += buf.data();
  const int status = ::pclose(pipe);
  std::error_code ec;
  std::filesystem::remove(in_path, ec);

  const int code = (status != -1 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  if (code != 0) {
    std::filesystem::remove(out_path, ec);
    fail(ErrorKind::Subprocess, "external codec exited with status " + std::to_string(code) + ": " + cmd +
                                    (captured.empty() ? "" : "\n" + captured));
  }

  AudioSignal decoded;
  try {
    decoded = load_wav_working_rate(out_path);
  } catch (const Error& e) {
    std::filesystem::remove(out_path, ec);
    fail(ErrorKind::Subprocess, std::string("external codec output unreadable: ") + e.what());
  }
  std::filesystem::remove(out_path, ec);
  if (decoded.sample_rate != sig.sample_rate) decoded = resample(decoded, sig.sample_rate);
  decoded.samples.resize(sig.size(), 0.0f);  // encoders may pad; keep the input length
  normalize_if_clipping(decoded);
  return decoded;
}

}  // namespace

bool valid_bitrate(Codec codec, double kbps) noexcept {
  switch (codec) {
    case Codec::Mp3Sim: return kbps >= 10.0 && kbps <= 128.0;
    case Codec::AmrNbSim:
      return std::any_of(kAmrNbBitrates.begin(), kAmrNbBitrates.end(),
                         [kbps](double b) { return std::abs(b - kbps) < 1e-9; });
    case Codec::External: return kbps > 0.0;
  }
  return false;
}

double codec_cutoff_hz(Codec codec, double kbps) {
  switch (codec) {
    case Codec::Mp3Sim: {
      // 4 kHz at 10 kbps rising linearly in log-bitrate to 8 kHz at 64 kbps
      const double t = std::clamp(std::log(kbps / 10.0) / std::log(6.4), 0.0, 1.0);
      return 4000.0 + 4000.0 * t;
    }
    case Codec::AmrNbSim: return 3400.0;
    case Codec::External: return 8000.0;
  }
  return 8000.0;
}

double codec_quantizer_bits(Codec codec, double kbps) {
  switch (codec) {
    case Codec::Mp3Sim: return 2.0 + 6.0 * std::clamp(std::log(kbps / 10.0) / std::log(12.8), 0.0, 1.0);
    case Codec::AmrNbSim: return 1.0 + 2.0 * std::clamp(std::log(kbps / 4.75) / std::log(12.2 / 4.75), 0.0, 1.0);
    case Codec::External: return 16.0;
  }
  return 16.0;
}

AudioSignal compress(const AudioSignal& sig, Codec codec, double bitrate_kbps, const CodecOptions& options) {
  if (!valid_bitrate(codec, bitrate_kbps))
    fail(ErrorKind::Contract, std::string("invalid bitrate ") + bitrate_text(bitrate_kbps) + " kbps for " + to_string(codec));
  if (codec == Codec::External) return run_external(sig, bitrate_kbps, options);
  return simulate(sig, codec, bitrate_kbps, options);
}

}  // namespace spliceloc
