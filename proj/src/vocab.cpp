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

#include "spliceloc/vocab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "spliceloc/error.hpp"

namespace spliceloc {

double SpliceVocab::position(int token) {
  require(is_position(token), "token " + std::to_string(token) + " is not a position");
  return (token - kNone) * kStep;
}

int SpliceVocab::token_for(double seconds) {
  const double steps = seconds / kStep;
  const long k = std::lround(steps);
  if (std::abs(steps - static_cast<double>(k)) > 1e-6 || k < 1 || k > kPositions)
    fail(ErrorKind::Resolution, "time " + std::to_string(seconds) + " s is not a vocabulary position");
  return static_cast<int>(k) + kNone;
}

std::string SpliceVocab::symbol(int token) {
  switch (token) {
    case kPad: return "<pad>";
    case kBos: return "<bos>";
    case kEos: return "<eos>";
    case kNone: return "\xE2\x88\x98";  // ∘
    default: break;
  }
  require(is_position(token), "token " + std::to_string(token) + " outside the vocabulary");
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.1f", position(token));
  return buf;
}

std::vector<std::string> SpliceVocab::symbols() {
  std::vector<std::string> out;
  for (int t = 0; t < kSize; ++t) out.push_back(symbol(t));
  return out;
}

TokenSeq target_sequence(const std::vector<double>& grid_labels) {
  TokenSeq seq;
  seq.indices.push_back(SpliceVocab::kBos);
  std::vector<int> tokens;
  for (double t : grid_labels) tokens.push_back(SpliceVocab::token_for(t));
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  if (tokens.empty()) tokens.push_back(SpliceVocab::kNone);
  seq.indices.insert(seq.indices.end(), tokens.begin(), tokens.end());
  seq.indices.push_back(SpliceVocab::kEos);
  return seq;
}

TokenSeq canonicalize(const std::vector<int>& raw) {
  std::vector<int> positions;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] == SpliceVocab::kEos) break;
    if (SpliceVocab::is_position(raw[i])) positions.push_back(raw[i]);
  }
  std::sort(positions.begin(), positions.end());
  positions.erase(std::unique(positions.begin(), positions.end()), positions.end());
  TokenSeq seq;
  seq.indices.push_back(SpliceVocab::kBos);
  if (positions.empty()) seq.indices.push_back(SpliceVocab::kNone);
  seq.indices.insert(seq.indices.end(), positions.begin(), positions.end());
  seq.indices.push_back(SpliceVocab::kEos);
  return seq;
}

std::vector<double> positions_of(const TokenSeq& seq) {
  std::vector<double> out;
  for (int t : seq.indices)
    if (SpliceVocab::is_position(t)) out.push_back(SpliceVocab::position(t));
  return out;
}

std::string to_string(const TokenSeq& seq) {
  std::string out;
  for (std::size_t i = 0; i < seq.indices.size(); ++i) out += (i ? " " : "") + SpliceVocab::symbol(seq.indices[i]);
  return out;
}

}  // namespace spliceloc
