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

#include <cstddef>
#include <functional>
#include <vector>

#include "spliceloc/model.hpp"
#include "spliceloc/vocab.hpp"

namespace spliceloc {

struct Hypothesis {
  TokenSeq tokens;        // canonical
  std::vector<int> raw;   // as generated, starting with <bos>
  double log_prob = 0.0;  // sum over generated tokens
  double score = 0.0;     // log_prob / generated length
  bool truncated = false; // hit the length limit without <eos>
};

/// Log-probabilities of the next token given a prefix.
using StepFn = std::function<std::vector<double>(const std::vector<int>& prefix)>;

/// Argmax decoding from {bos} until `eos` or a total length of `max_len`.
/// Tokens in `banned` are never produced.
Hypothesis greedy_search(const StepFn& step, int bos, int eos, std::size_t max_len, const std::vector<int>& banned = {});

/// Beam search over length-normalized log-probabilities. Hypotheses that
/// reach `max_len` without `eos` are kept and flagged. Results are
/// canonicalized, deduplicated (best score wins) and sorted by descending score.
std::vector<Hypothesis> beam_search(const StepFn& step, int bos, int eos, std::size_t max_len, std::size_t beam,
                                    const std::vector<int>& banned = {});

template <typename T>
Hypothesis decode_greedy(const Transformer<T>& model, const FeatureStack& features);

/// Beam width defaults to max(5, n); it is widened when canonical
/// deduplication leaves fewer than n distinct hypotheses.
template <typename T>
std::vector<Hypothesis> decode_topn(const Transformer<T>& model, const FeatureStack& features, std::size_t n,
                                    std::size_t beam = 0);

}  // namespace spliceloc
