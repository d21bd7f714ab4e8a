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

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace spliceloc::fft {

using Complex = std::complex<double>;

/// In-place forward DFT of any length. Powers of two use an iterative
/// radix-2 kernel, other lengths go through Bluestein's chirp-z transform.
void forward(std::vector<Complex>& data);

/// In-place inverse DFT, scaled by 1/n.
void inverse(std::vector<Complex>& data);

/// One-sided spectrum (n/2 + 1 bins) of a real frame, zero-padded to n_fft.
std::vector<Complex> rfft(std::span<const double> frame, std::size_t n_fft);

/// Inverse of rfft for an even n_fft; returns n_fft real samples.
std::vector<double> irfft(std::span<const Complex> spectrum, std::size_t n_fft);

std::size_t next_pow2(std::size_t n);

}  // namespace spliceloc::fft
