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

#include "spliceloc/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>

#include "spliceloc/error.hpp"
#include "spliceloc/fft.hpp"

namespace spliceloc {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

double bessel_i0(double x) {
  double sum = 1.0, term = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 64; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

constexpr int kResampleTaps = 64;
constexpr double kKaiserBeta = 8.0;

}  // namespace

AudioSignal load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open WAV file: " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = " in " + path.string();

  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    fail(ErrorKind::Format, "not a RIFF/WAVE file" + where);

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = read_u32(chunk + 4);
    if (pos + 8 + static_cast<std::size_t>(size) > bytes.size())
      fail(ErrorKind::Format, "truncated '" + std::string(reinterpret_cast<const char*>(chunk), 4) + "' chunk" + where);
    const unsigned char* body = chunk + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) fail(ErrorKind::Format, "fmt chunk too short" + where);
      format = read_u16(body);
      channels = read_u16(body + 2);
      rate = read_u32(body + 4);
      bits = read_u16(body + 14);
      if (format == kFormatExtensible) {
        if (size < 40) fail(ErrorKind::Format, "extensible fmt chunk too short" + where);
        format = read_u16(body + 24);  // first two bytes of the sub-format GUID
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = body;
      data_size = size;
    }
    pos += 8 + size + (size & 1u);
  }
  if (!have_fmt) fail(ErrorKind::Format, "missing fmt chunk" + where);
  if (data == nullptr) fail(ErrorKind::Format, "missing data chunk" + where);
  if (channels == 0 || rate == 0) fail(ErrorKind::Format, "invalid channel count or sample rate" + where);

  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool float32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !float32)
    fail(ErrorKind::Unsupported,
         "unsupported WAV encoding (format " + std::to_string(format) + ", " + std::to_string(bits) + " bits)" + where);

  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * channels;
  const std::size_t frames = data_size / frame_bytes;

  AudioSignal sig;
  sig.sample_rate = static_cast<int>(rate);
  sig.samples.resize(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const unsigned char* p = data + f * frame_bytes + c * bytes_per_sample;
      if (pcm16) {
        acc += static_cast<std::int16_t>(read_u16(p)) / 32768.0;
      } else {
        float v;
        const std::uint32_t raw = read_u32(p);
        std::memcpy(&v, &raw, sizeof v);
        acc += v;
      }
    }
    sig.samples[f] = static_cast<float>(acc / channels);
  }
  return sig;
}

AudioSignal load_wav_working_rate(const std::filesystem::path& path) {
  AudioSignal sig = load_wav(path);
  if (sig.sample_rate != kWorkingRate) sig = resample(sig, kWorkingRate);
  return sig;
}

std::vector<unsigned char> encode_wav_pcm16(const AudioSignal& sig) {
  require(sig.sample_rate > 0, "write_wav: sample rate must be positive");
  const auto data_bytes = static_cast<std::uint32_t>(sig.samples.size() * 2);
  std::vector<unsigned char> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(sig.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(sig.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, data_bytes);
  for (float s : sig.samples) {
    const double clamped = std::clamp(static_cast<double>(s), -1.0, 1.0);
    const long q = std::clamp(std::lround(clamped * 32768.0), -32768L, 32767L);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  return out;
}

void write_wav(const std::filesystem::path& path, const AudioSignal& sig) {
  const auto bytes = encode_wav_pcm16(sig);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

std::vector<double> resample_samples(std::span<const double> input, int source_rate, int target_rate) {
  require(source_rate > 0 && target_rate > 0, "resample: rates must be positive");
  if (source_rate == target_rate) return {input.begin(), input.end()};

  const long g = std::gcd(source_rate, target_rate);
  const long up = target_rate / g;    // output steps per `down` input steps
  const long down = source_rate / g;
  const double cutoff = std::min(1.0, static_cast<double>(target_rate) / source_rate);
  constexpr int half = kResampleTaps / 2;
  const double i0_beta = bessel_i0(kKaiserBeta);

  // One normalized filter per fractional phase p/up.
  std::vector<double> bank(static_cast<std::size_t>(up) * kResampleTaps);
  for (long p = 0; p < up; ++p) {
    const double frac = static_cast<double>(p) / up;
    double* taps = &bank[static_cast<std::size_t>(p) * kResampleTaps];
    double sum = 0.0;
    for (int j = 0; j < kResampleTaps; ++j) {
      // tap j reads x[base - half + 1 + j]; distance from the output instant
      const double d = frac + half - 1 - j;
      const double r = d / half;
      const double window = std::abs(r) >= 1.0 ? 0.0 : bessel_i0(kKaiserBeta * std::sqrt(1.0 - r * r)) / i0_beta;
      const double x = cutoff * d;
      const double sinc = std::abs(x) < 1e-12 ? 1.0 : std::sin(M_PI * x) / (M_PI * x);
      taps[j] = cutoff * sinc * window;
      sum += taps[j];
    }
    for (int j = 0; j < kResampleTaps; ++j) taps[j] /= sum;
  }

  const auto n_in = static_cast<long>(input.size());
  const auto n_out = static_cast<long>(std::llround(static_cast<double>(n_in) * target_rate / source_rate));
  std::vector<double> out(static_cast<std::size_t>(std::max(0L, n_out)));
  for (long n = 0; n < n_out; ++n) {
    const long num = n * down;
    const long base = num / up;
    const long phase = num % up;
    const double* taps = &bank[static_cast<std::size_t>(phase) * kResampleTaps];
    double acc = 0.0;
    for (int j = 0; j < kResampleTaps; ++j) {
      const long k = base - half + 1 + j;
      if (k >= 0 && k < n_in) acc += taps[j] * input[static_cast<std::size_t>(k)];
    }
    out[static_cast<std::size_t>(n)] = acc;
  }
  return out;
}

AudioSignal resample(const AudioSignal& sig, int target_rate) {
  require(target_rate > 0, "resample: target rate must be positive");
  if (sig.sample_rate == target_rate) return sig;
  const auto in = to_double(sig.samples);
  AudioSignal out;
  out.sample_rate = target_rate;
  out.samples = to_float(resample_samples(in, sig.sample_rate, target_rate));
  return out;
}

std::vector<double> fft_convolve(std::span<const double> signal, std::span<const double> kernel) {
  if (signal.empty() || kernel.empty()) return {};
  const std::size_t m = kernel.size();
  const std::size_t n_fft = std::max<std::size_t>(fft::next_pow2(2 * m), 4096);
  const std::size_t block = n_fft - m + 1;

  std::vector<fft::Complex> kernel_fft(n_fft);
  for (std::size_t i = 0; i < m; ++i) kernel_fft[i] = kernel[i];
  fft::forward(kernel_fft);

  std::vector<double> out(signal.size() + m - 1, 0.0);
  std::vector<fft::Complex> buf(n_fft);
  for (std::size_t start = 0; start < signal.size(); start += block) {
    const std::size_t len = std::min(block, signal.size() - start);
    std::fill(buf.begin(), buf.end(), fft::Complex{});
    for (std::size_t i = 0; i < len; ++i) buf[i] = signal[start + i];
    fft::forward(buf);
    for (std::size_t i = 0; i < n_fft; ++i) buf[i] *= kernel_fft[i];
    fft::inverse(buf);
    const std::size_t valid = std::min(len + m - 1, out.size() - start);
    for (std::size_t i = 0; i < valid; ++i) out[start + i] += buf[i].real();
  }
  return out;
}

AudioSignal convolve(const AudioSignal& sig, const ImpulseResponse& ir) {
  if (sig.sample_rate != ir.sample_rate)
    fail(ErrorKind::Contract, "convolve: sample rate mismatch (signal " + std::to_string(sig.sample_rate) + " Hz, IR '" +
                                  ir.id + "' " + std::to_string(ir.sample_rate) + " Hz)");
  require(!ir.taps.empty(), "convolve: empty impulse response '" + ir.id + "'");
  const auto x = to_double(sig.samples);
  const auto h = to_double(ir.taps);
  auto y = fft_convolve(x, h);
  y.resize(x.size());

  AudioSignal out;
  out.sample_rate = sig.sample_rate;
  out.samples = to_float(y);
  scale_to_peak(out, std::min(1.0, peak(sig.samples)));
  return out;
}

double peak(std::span<const float> samples) noexcept {
  double p = 0.0;
  for (float s : samples) p = std::max(p, static_cast<double>(std::abs(s)));
  return p;
}

double mean_power(std::span<const float> samples) noexcept {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (float s : samples) acc += static_cast<double>(s) * s;
  return acc / static_cast<double>(samples.size());
}

void scale_to_peak(AudioSignal& sig, double target_peak) {
  const double p = peak(sig.samples);
  if (p <= 0.0) return;
  const double g = target_peak / p;
  for (float& s : sig.samples) s = static_cast<float>(s * g);
}

void normalize_if_clipping(AudioSignal& sig) {
  if (peak(sig.samples) > 1.0) scale_to_peak(sig, 1.0);
}

std::vector<double> to_double(std::span<const float> samples) { return {samples.begin(), samples.end()}; }

std::vector<float> to_float(std::span<const double> samples) {
  std::vector<float> out(samples.size());
  std::transform(samples.begin(), samples.end(), out.begin(), [](double v) { return static_cast<float>(v); });
  return out;
}

}  // namespace spliceloc
