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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spliceloc/decode.hpp"
#include "spliceloc/training.hpp"
#include "spliceloc/vocab.hpp"

namespace spliceloc {

struct MatchedPair {
  double truth = 0.0;
  double pred = 0.0;
};

/// One-to-one matching of ascending point lists with |truth - pred| <= w:
/// the largest number of pairs, and among those the smallest total distance.
std::vector<MatchedPair> match_points(const std::vector<double>& truth, const std::vector<double>& pred, double w);

/// Jaccard index over splice points with a tolerance window. An empty list
/// stands for the no-splice symbol, which only matches itself.
double jaccard(const std::vector<double>& truth, const std::vector<double>& pred, double w);

/// Share of ground-truth points found within the window; same convention
/// for the no-splice symbol.
double recall(const std::vector<double>& truth, const std::vector<double>& pred, double w);

/// 1-based rank of the first hypothesis equal to `truth`, 0 if none.
std::size_t hit_rank(const TokenSeq& truth, const std::vector<TokenSeq>& ranked);

/// 1 iff one of the first n hypotheses equals the truth exactly.
int topn_accuracy(const TokenSeq& truth, const std::vector<TokenSeq>& ranked, std::size_t n);

/// Distance from the single true splice to the nearest predicted position.
/// Throws Contract unless truth holds exactly one point and pred at least one.
double splice_distance(const std::vector<double>& truth, const std::vector<double>& pred);

struct RankedPrediction {
  TokenSeq tokens;
  double score = 0.0;
  bool truncated = false;
};

struct WindowScore {
  double w = 0.0;
  double jaccard = 0.0;
  double recall = 0.0;
  std::vector<MatchedPair> pairs;
};

struct SampleEval {
  std::string id;
  TokenSeq truth;
  std::vector<RankedPrediction> ranked;
  std::size_t hit_rank = 0;
  std::vector<WindowScore> windows;  // scored on the top-ranked prediction
  std::optional<double> d_sp;        // single-splice samples with a positional top prediction
  bool d_sp_excluded = false;        // single-splice sample whose top prediction is no-splice
};

struct EvalAggregates {
  std::size_t samples = 0;
  std::vector<double> topn;  // topn[k] = accuracy within the first k + 1 hypotheses
  std::vector<double> windows;
  std::vector<double> jaccard;
  std::vector<double> recall;
  std::optional<double> mean_d_sp;
  std::size_t d_sp_count = 0;
  std::size_t d_sp_excluded = 0;
  std::size_t truncated = 0;  // samples whose top prediction hit the length limit
};

struct EvalResult {
  std::vector<SampleEval> samples;
  EvalAggregates aggregates;
};

struct EvalOptions {
  std::vector<double> windows{0.5, 1.0, 2.0, 3.0};
  std::size_t topn = 5;
  std::size_t beam = 0;  // 0: max(5, topn)
  std::size_t threads = 0;
};

SampleEval score_sample(const std::string& id, const TokenSeq& truth, std::vector<RankedPrediction> ranked,
                        const std::vector<double>& windows);

EvalAggregates aggregate(const std::vector<SampleEval>& samples, const std::vector<double>& windows, std::size_t topn);

/// Decodes every sample of `data` and scores it.
EvalResult evaluate(const Transformer<float>& model, const Dataset& data, const EvalOptions& options);

std::string report_json(const EvalResult& result, int indent = 2);
EvalResult parse_report(const std::string& json);
EvalResult read_report(const std::filesystem::path& path);
void write_report(const EvalResult& result, const std::filesystem::path& path);

/// Aggregate table: metric,parameter,value.
void write_aggregate_csv(const EvalResult& result, const std::filesystem::path& path);
/// Per-sample table with truth, top prediction, hit rank, d_sp and J/R per window.
void write_samples_csv(const EvalResult& result, const std::filesystem::path& path);
/// Two line charts (accuracy vs n, J_w and R_w vs w) as one SVG document.
std::string render_svg(const EvalAggregates& aggregates);

}  // namespace spliceloc
