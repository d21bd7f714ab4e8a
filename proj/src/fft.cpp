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

#include "spliceloc/fft.hpp"

#include <cmath>
#include <map>
#include <memory>

namespace spliceloc::fft {
namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void radix2(std::vector<Complex>& a, bool invert) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = 2.0 * M_PI / static_cast<double>(len) * (invert ? 1.0 : -1.0);
    const std::size_t half = len / 2;
    // Twiddles are evaluated directly rather than by repeated multiplication
    // so rounding error does not grow with the transform length.
    std::vector<Complex> w(half);
    for (std::size_t k = 0; k < half; ++k)
      w[k] = Complex(std::cos(angle * static_cast<double>(k)), std::sin(angle * static_cast<double>(k)));
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const Complex u = a[i + k];
        const Complex v = a[i + k + half] * w[k];
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

struct BluesteinPlan {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<Complex> chirp;       // exp(-i*pi*k^2/n)
  std::vector<Complex> kernel_fft;  // FFT of conj(chirp), wrapped
};

std::shared_ptr<const BluesteinPlan> bluestein_plan(std::size_t n) {
  thread_local std::map<std::size_t, std::shared_ptr<const BluesteinPlan>> cache;
  if (auto it = cache.find(n); it != cache.end()) return it->second;

  auto plan = std::make_shared<BluesteinPlan>();
  plan->n = n;
  plan->m = next_pow2(2 * n - 1);
  plan->chirp.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the angle argument small for large k.
    const std::size_t k2 = (k * k) % (2 * n);
    const double angle = -M_PI * static_cast<double>(k2) / static_cast<double>(n);
    plan->chirp[k] = Complex(std::cos(angle), std::sin(angle));
  }
  plan->kernel_fft.assign(plan->m, Complex{});
  plan->kernel_fft[0] = std::conj(plan->chirp[0]);
  for (std::size_t k = 1; k < n; ++k) {
    plan->kernel_fft[k] = std::conj(plan->chirp[k]);
    plan->kernel_fft[plan->m - k] = std::conj(plan->chirp[k]);
  }
  radix2(plan->kernel_fft, false);
  cache.emplace(n, plan);
  return plan;
}

void bluestein(std::vector<Complex>& a) {
  const auto plan = bluestein_plan(a.size());
  const std::size_t n = plan->n;
  std::vector<Complex> buf(plan->m, Complex{});
  for (std::size_t k = 0; k < n; ++k) buf[k] = a[k] * plan->chirp[k];
  radix2(buf, false);
  for (std::size_t i = 0; i < plan->m; ++i) buf[i] *= plan->kernel_fft[i];
  radix2(buf, true);
  const double scale = 1.0 / static_cast<double>(plan->m);
  for (std::size_t k = 0; k < n; ++k) a[k] = buf[k] * scale * plan->chirp[k];
}

}  // namespace

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void forward(std::vector<Complex>& data) {
  if (data.size() <= 1) return;
  if (is_pow2(data.size()))
    radix2(data, false);
  else
    bluestein(data);
}

void inverse(std::vector<Complex>& data) {
  if (data.empty()) return;
  // conj(FFT(conj(x))) / n
  for (auto& c : data) c = std::conj(c);
  forward(data);
  const double scale = 1.0 / static_cast<double>(data.size());
  for (auto& c : data) c = std::conj(c) * scale;
}

std::vector<Complex> rfft(std::span<const double> frame, std::size_t n_fft) {
  std::vector<Complex> buf(n_fft, Complex{});
  const std::size_t n = std::min(frame.size(), n_fft);
  for (std::size_t i = 0; i < n; ++i) buf[i] = Complex(frame[i], 0.0);
  forward(buf);
  buf.resize(n_fft / 2 + 1);
  return buf;
}

std::vector<double> irfft(std::span<const Complex> spectrum, std::size_t n_fft) {
  std::vector<Complex> buf(n_fft, Complex{});
  const std::size_t bins = n_fft / 2 + 1;
  for (std::size_t k = 0; k < bins && k < spectrum.size(); ++k) buf[k] = spectrum[k];
  for (std::size_t k = 1; k < n_fft - k; ++k) buf[n_fft - k] = std::conj(buf[k]);
  inverse(buf);
  std::vector<double> out(n_fft);
  for (std::size_t i = 0; i < n_fft; ++i) out[i] = buf[i].real();
  return out;
}

}  // namespace spliceloc::fft
