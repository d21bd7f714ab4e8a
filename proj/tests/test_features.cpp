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

#include <cmath>
#include <fstream>
#include <random>

#include "doctest.h"
#include "spliceloc/error.hpp"
#include "spliceloc/features.hpp"
#include "spliceloc/forgery.hpp"
#include "support/synth.hpp"
#include "support/temp_dir.hpp"

using namespace spliceloc;
using spliceloc::testing::TempDir;

namespace {

AudioSignal zeros(double seconds) {
  AudioSignal s;
  s.samples.assign(static_cast<std::size_t>(std::lround(seconds * kWorkingRate)), 0.0f);
  return s;
}

// Independent HTK Mel centres: invert equally spaced points on the Mel axis.
std::vector<double> oracle_centres() {
  const double top = 1127.0 * std::log(1.0 + 8000.0 / 700.0);
  std::vector<double> c;
  for (int i = 1; i <= 256; ++i) c.push_back(700.0 * (std::exp(top * i / 257.0 / 1127.0) - 1.0));
  return c;
}

}  // namespace

TEST_CASE("frame geometry") {
  CHECK(mel_spectrogram(zeros(45.0)).rows == 90);
  CHECK(assemble(zeros(3.0)).frames == 6);
  const auto s = assemble(synth::speech_like(7.3, 1, 130.0));
  CHECK(s.frames == 15);
  CHECK(s.width == 277);
  CHECK(s.data.size() == 15 * 277);
  for (double d : {3.0, 3.01, 4.49, 4.5, 17.26, 44.99, 45.0}) {
    const auto n = static_cast<std::size_t>(std::lround(d * kWorkingRate));
    CHECK(frame_count(n) == static_cast<std::size_t>(std::ceil(static_cast<double>(n) / 8000.0)));
  }
  CHECK_THROWS_AS(assemble(zeros(45.5)), Error);
  CHECK_THROWS_AS(mel_spectrogram(AudioSignal{}), Error);
}

TEST_CASE("mel spectrogram of silence and a tone") {
  const auto mel = mel_spectrogram(zeros(2.0));
  for (double v : mel.data) CHECK(v == 0.0);

  const auto centres = mel_center_frequencies();
  const auto oracle = oracle_centres();
  REQUIRE(centres.size() == 256);
  for (std::size_t i = 0; i < 256; ++i) CHECK(centres[i] == doctest::Approx(oracle[i]).epsilon(1e-9));

  std::size_t nearest = 0;
  for (std::size_t i = 0; i < oracle.size(); ++i)
    if (std::abs(oracle[i] - 1000.0) < std::abs(oracle[nearest] - 1000.0)) nearest = i;
  const auto tone = mel_spectrogram(synth::tone(1000.0, 4.0, 0.5));
  for (std::size_t f = 0; f < tone.rows; ++f) {
    const auto row = tone.row(f);
    CHECK(static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin()) == nearest);
  }
}

TEST_CASE("DCT and MFCC") {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> d(-5.0, 5.0);
  std::vector<double> frame(256);
  for (auto& v : frame) v = d(gen);
  const auto back = dct_iii(dct_ii(frame));
  for (std::size_t i = 0; i < 256; ++i) CHECK(std::abs(back[i] - frame[i]) < 1e-9);

  // independent naive DCT-II with explicit orthonormal scaling
  for (std::size_t k : {0u, 1u, 7u, 19u}) {
    double acc = 0.0;
    for (std::size_t i = 0; i < 256; ++i) acc += frame[i] * std::cos(M_PI * k * (i + 0.5) / 256.0);
    acc *= k == 0 ? std::sqrt(1.0 / 256.0) : std::sqrt(2.0 / 256.0);
    CHECK(dct_ii(frame)[k] == doctest::Approx(acc).epsilon(1e-12));
  }

  Matrix constant(2, 256, 3.0);
  const auto c = mfcc(constant);
  CHECK(c.cols == 20);
  CHECK(c.at(0, 0) == doctest::Approx(3.0 * 16.0));
  for (std::size_t k = 1; k < 20; ++k) CHECK(std::abs(c.at(1, k)) < 1e-12);

  Matrix pair(2, 256);
  for (std::size_t i = 0; i < 256; ++i) {
    pair.at(0, i) = frame[i];
    pair.at(1, i) = frame[i] + 2.5;
  }
  const auto m = mfcc(pair);
  for (std::size_t k = 1; k < 20; ++k) CHECK(std::abs(m.at(0, k) - m.at(1, k)) < 1e-9);
}

TEST_CASE("spectral centroid") {
  const auto c = spectral_centroid(synth::tone(2000.0, 3.0, 0.5));
  for (std::size_t f = 0; f < c.rows; ++f) CHECK(std::abs(c.at(f, 0) - 2000.0) < 20.0);
  const auto z = spectral_centroid(zeros(1.0));
  for (double v : z.data) CHECK(v == 0.0);

  double mean = 0.0;
  int n = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto w = spectral_centroid(white_noise(3 * 8000, seed));
    for (double v : w.data) {
      mean += v;
      ++n;
    }
  }
  CHECK(std::abs(mean / n - 4000.0) < 200.0);
}

TEST_CASE("assemble normalization") {
  const auto s = assemble(synth::speech_like(6.2, 3, 180.0));
  const std::size_t blocks[3][2] = {{0, 256}, {256, 276}, {276, 277}};
  for (const auto& b : blocks) {
    float lo = 2.0f, hi = -2.0f;
    for (std::size_t r = 0; r < s.frames; ++r)
      for (std::size_t col = b[0]; col < b[1]; ++col) {
        lo = std::min(lo, s.row(r)[col]);
        hi = std::max(hi, s.row(r)[col]);
      }
    CHECK(lo == -1.0f);
    CHECK(hi == 1.0f);
  }
  for (float v : s.data) CHECK(std::isfinite(v));

  AudioSignal dc = zeros(4.0);
  for (auto& v : dc.samples) v = 0.3f;
  for (float v : assemble(dc).data) CHECK(v == 0.0f);
  for (float v : assemble(zeros(3.0)).data) CHECK(v == 0.0f);

  const auto mel_only = assemble(synth::speech_like(4.0, 3, 180.0), FeatureSet::MelOnly);
  CHECK(mel_only.width == 256);
}

TEST_CASE("feature cache round trip") {
  TempDir dir;
  const auto sig = synth::speech_like(5.0, 8, 120.0);
  write_wav(dir / "a.wav", sig);
  const auto fresh = load_features(dir / "a.wav", dir / "cache" / "a.sfft");
  CHECK(std::filesystem::exists(dir / "cache" / "a.sfft"));
  const auto cached = load_features(dir / "a.wav", dir / "cache" / "a.sfft");
  CHECK(cached.frames == fresh.frames);
  CHECK(cached.width == fresh.width);
  CHECK(cached.data == fresh.data);

  std::ofstream(dir / "bad.sfft") << "JUNKJUNKJUNKJUNK";
  CHECK_THROWS_AS(read_feature_cache(dir / "bad.sfft"), Error);
}
