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

#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "spliceloc/audio.hpp"
#include "spliceloc/error.hpp"
#include "support/synth.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write a synthetic speech-like speaker pool for demos and tests"};
  std::string out, noise;
  spliceloc::synth::PoolOptions o;
  double noise_s = 60.0;
  app.add_option("out", out, "Pool directory (<out>/<speaker>/<recording>.wav)")->required();
  app.add_option("--speakers", o.speakers, "Number of speakers")->capture_default_str();
  app.add_option("--recordings", o.recordings, "Recordings per speaker")->capture_default_str();
  app.add_option("--min-duration", o.min_duration_s, "Shortest recording in seconds")->capture_default_str();
  app.add_option("--max-duration", o.max_duration_s, "Longest recording in seconds")->capture_default_str();
  app.add_option("--seed", o.seed, "Seed")->capture_default_str();
  app.add_option("--prefix", o.prefix, "Speaker directory prefix")->capture_default_str();
  app.add_option("--noise", noise, "Also write a coloured-noise WAV to this path");
  app.add_option("--noise-duration", noise_s, "Noise length in seconds")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  try {
    spliceloc::synth::write_pool(out, o);
    if (!noise.empty()) spliceloc::write_wav(noise, spliceloc::synth::noise_bed(noise_s, o.seed + 1));
    std::printf("wrote %d speakers x %d recordings to %s\n", o.speakers, o.recordings, out.c_str());
  } catch (const spliceloc::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
