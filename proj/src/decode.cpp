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

#include "spliceloc/decode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "spliceloc/error.hpp"

namespace spliceloc {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxBeam = 4096;

std::vector<double> step_checked(const StepFn& step, const std::vector<int>& prefix, const std::vector<int>& banned) {
  auto lp = step(prefix);
  for (int b : banned)
    if (b >= 0 && static_cast<std::size_t>(b) < lp.size()) lp[static_cast<std::size_t>(b)] = kNegInf;
  return lp;
}

Hypothesis finish(std::vector<int> raw, double log_prob, bool truncated) {
  Hypothesis h;
  h.tokens = canonicalize(raw);
  const std::size_t generated = raw.size() - 1;
  h.raw = std::move(raw);
  h.log_prob = log_prob;
  h.score = log_prob / static_cast<double>(std::max<std::size_t>(1, generated));
  h.truncated = truncated;
  return h;
}

std::vector<int> special_tokens() { return {SpliceVocab::kPad, SpliceVocab::kBos}; }

}  // namespace

Hypothesis greedy_search(const StepFn& step, int bos, int eos, std::size_t max_len, const std::vector<int>& banned) {
  require(max_len >= 2, "greedy_search: max_len must be at least 2");
  std::vector<int> seq{bos};
  double total = 0.0;
  while (seq.size() < max_len) {
    const auto lp = step_checked(step, seq, banned);
    const auto best = static_cast<int>(std::max_element(lp.begin(), lp.end()) - lp.begin());
    total += lp[static_cast<std::size_t>(best)];
    seq.push_back(best);
    if (best == eos) return finish(std::move(seq), total, false);
  }
  return finish(std::move(seq), total, true);
}

std::vector<Hypothesis> beam_search(const StepFn& step, int bos, int eos, std::size_t max_len, std::size_t beam,
                                    const std::vector<int>& banned) {
  require(max_len >= 2, "beam_search: max_len must be at least 2");
  require(beam >= 1, "beam_search: beam width must be positive");
  struct Live {
    std::vector<int> seq;
    double log_prob;
  };
  std::vector<Live> live{{{bos}, 0.0}};
  std::vector<Hypothesis> done;

  while (!live.empty()) {
    struct Candidate {
      std::size_t parent;
      int token;
      double log_prob;
    };
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < live.size(); ++i) {
      const auto lp = step_checked(step, live[i].seq, banned);
      for (std::size_t t = 0; t < lp.size(); ++t)
        if (lp[t] > kNegInf) candidates.push_back({i, static_cast<int>(t), live[i].log_prob + lp[t]});
    }
    const std::size_t keep = std::min(beam, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<long>(keep), candidates.end(),
                      [](const Candidate& a, const Candidate& b) {
                        if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
                        if (a.parent != b.parent) return a.parent < b.parent;
                        return a.token < b.token;
                      });
    std::vector<Live> next;
    for (std::size_t c = 0; c < keep; ++c) {
      auto seq = live[candidates[c].parent].seq;
      seq.push_back(candidates[c].token);
      if (candidates[c].token == eos)
        done.push_back(finish(std::move(seq), candidates[c].log_prob, false));
      else if (seq.size() >= max_len)
        done.push_back(finish(std::move(seq), candidates[c].log_prob, true));
      else
        next.push_back({std::move(seq), candidates[c].log_prob});
    }
    live = std::move(next);
  }

  std::stable_sort(done.begin(), done.end(), [](const Hypothesis& a, const Hypothesis& b) { return a.score > b.score; });
  std::vector<Hypothesis> unique;
  for (auto& h : done) {
    const bool seen = std::any_of(unique.begin(), unique.end(), [&](const Hypothesis& u) { return u.tokens == h.tokens; });
    if (!seen) unique.push_back(std::move(h));
  }
  return unique;
}

template <typename T>
Hypothesis decode_greedy(const Transformer<T>& model, const FeatureStack& features) {
  const auto memory = model.encode(features);
  const StepFn step = [&](const std::vector<int>& prefix) { return model.next_log_probs(memory, prefix); };
  return greedy_search(step, SpliceVocab::kBos, SpliceVocab::kEos, model.config().max_tgt_len, special_tokens());
}

template <typename T>
std::vector<Hypothesis> decode_topn(const Transformer<T>& model, const FeatureStack& features, std::size_t n,
                                    std::size_t beam) {
  require(n >= 1, "decode_topn: n must be positive");
  if (beam == 0) beam = std::max<std::size_t>(5, n);
  require(n <= beam, "decode_topn: n exceeds the beam width");
  const auto memory = model.encode(features);
  std::map<std::vector<int>, std::vector<double>> cache;
  const StepFn step = [&](const std::vector<int>& prefix) {
    auto it = cache.find(prefix);
    if (it == cache.end()) it = cache.emplace(prefix, model.next_log_probs(memory, prefix)).first;
    return it->second;
  };
  auto result = beam_search(step, SpliceVocab::kBos, SpliceVocab::kEos, model.config().max_tgt_len, beam, special_tokens());
  // canonical duplicates can leave fewer than n distinct hypotheses
  while (result.size() < n && beam < kMaxBeam) {
    beam = std::min(kMaxBeam, beam * 2);
    result = beam_search(step, SpliceVocab::kBos, SpliceVocab::kEos, model.config().max_tgt_len, beam, special_tokens());
  }
  return result;
}

template Hypothesis decode_greedy(const Transformer<float>&, const FeatureStack&);
template Hypothesis decode_greedy(const Transformer<double>&, const FeatureStack&);
template std::vector<Hypothesis> decode_topn(const Transformer<float>&, const FeatureStack&, std::size_t, std::size_t);
template std::vector<Hypothesis> decode_topn(const Transformer<double>&, const FeatureStack&, std::size_t, std::size_t);

}  // namespace spliceloc
