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

#include <string>
#include <vector>

namespace spliceloc {

/// 0 <pad>, 1 <bos>, 2 <eos>, 3 no splice, 4..92 positions 0.5 .. 44.5 s.
struct SpliceVocab {
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kNone = 3;
  static constexpr int kFirstPosition = 4;
  static constexpr int kPositions = 89;
  static constexpr int kSize = kFirstPosition + kPositions;
  static constexpr double kStep = 0.5;

  static bool is_position(int token) noexcept { return token >= kFirstPosition && token < kSize; }
  /// Seconds for a position token; throws Contract otherwise.
  static double position(int token);
  /// Token for a grid time; throws Resolution when off the grid or out of range.
  static int token_for(double seconds);
  static std::string symbol(int token);
  static std::vector<std::string> symbols();
};

struct TokenSeq {
  std::vector<int> indices;
  bool operator==(const TokenSeq&) const = default;
};

/// <bos> positions-ascending <eos>, or <bos> ∘ <eos> for an empty label set.
TokenSeq target_sequence(const std::vector<double>& grid_labels);

/// Drops everything after the first <eos>, keeps position tokens sorted and
/// unique; an output without positions becomes <bos> ∘ <eos>.
TokenSeq canonicalize(const std::vector<int>& raw);

/// Positions (seconds) of a sequence; empty for ∘.
std::vector<double> positions_of(const TokenSeq& seq);

std::string to_string(const TokenSeq& seq);

}  // namespace spliceloc
