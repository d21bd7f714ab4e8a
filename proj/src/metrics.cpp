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

#include "spliceloc/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "spliceloc/error.hpp"

namespace spliceloc {
namespace {

using nlohmann::json;

constexpr double kWindowSlack = 1e-9;
constexpr double kCostTie = 1e-12;

struct Cell {
  std::size_t count = 0;
  double cost = 0.0;
  int move = 0;  // 0 start, 1 match, 2 skip truth, 3 skip pred
};

bool better(std::size_t count, double cost, const Cell& than) {
  return count > than.count || (count == than.count && cost < than.cost - kCostTie);
}

std::vector<double> sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot create " + path.string());
  out << text;
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
}

}  // namespace

std::vector<MatchedPair> match_points(const std::vector<double>& truth_in, const std::vector<double>& pred_in,
                                      double w) {
  const auto truth = sorted(truth_in);
  const auto pred = sorted(pred_in);
  const std::size_t n = truth.size(), m = pred.size();
  std::vector<Cell> dp((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> Cell& { return dp[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i)
    for (std::size_t j = 0; j <= m; ++j) {
      if (i == 0 && j == 0) continue;
      Cell& c = at(i, j);
      bool set = false;
      auto offer = [&](std::size_t count, double cost, int move) {
        if (!set || better(count, cost, c)) {
          c = {count, cost, move};
          set = true;
        }
      };
      if (i > 0 && j > 0) {
        const double d = std::abs(truth[i - 1] - pred[j - 1]);
        if (d <= w + kWindowSlack) offer(at(i - 1, j - 1).count + 1, at(i - 1, j - 1).cost + d, 1);
      }
      if (i > 0) offer(at(i - 1, j).count, at(i - 1, j).cost, 2);
      if (j > 0) offer(at(i, j - 1).count, at(i, j - 1).cost, 3);
    }
  std::vector<MatchedPair> pairs;
  for (std::size_t i = n, j = m; i > 0 || j > 0;) {
    const int move = at(i, j).move;
    if (move == 1) {
      pairs.push_back({truth[i - 1], pred[j - 1]});
      --i;
      --j;
    } else if (move == 2) {
      --i;
    } else {
      --j;
    }
  }
  std::reverse(pairs.begin(), pairs.end());
  return pairs;
}

namespace {

// Element counts and matches with the no-splice symbol standing in for an
// empty position list.
struct Overlap {
  double truth = 0.0;
  double pred = 0.0;
  double matched = 0.0;
};

Overlap overlap(const std::vector<double>& truth, const std::vector<double>& pred, double w) {
  Overlap o;
  o.truth = truth.empty() ? 1.0 : static_cast<double>(truth.size());
  o.pred = pred.empty() ? 1.0 : static_cast<double>(pred.size());
  if (truth.empty() || pred.empty()) o.matched = truth.empty() && pred.empty() ? 1.0 : 0.0;
  else o.matched = static_cast<double>(match_points(truth, pred, w).size());
  return o;
}

}  // namespace

double jaccard(const std::vector<double>& truth, const std::vector<double>& pred, double w) {
  const auto o = overlap(truth, pred, w);
  return o.matched / (o.truth + o.pred - o.matched);
}

double recall(const std::vector<double>& truth, const std::vector<double>& pred, double w) {
  const auto o = overlap(truth, pred, w);
  return o.matched / o.truth;
}

std::size_t hit_rank(const TokenSeq& truth, const std::vector<TokenSeq>& ranked) {
  const auto want = canonicalize(truth.indices);
  for (std::size_t i = 0; i < ranked.size(); ++i)
    if (canonicalize(ranked[i].indices) == want) return i + 1;
  return 0;
}

int topn_accuracy(const TokenSeq& truth, const std::vector<TokenSeq>& ranked, std::size_t n) {
  const auto rank = hit_rank(truth, ranked);
  return rank > 0 && rank <= n ? 1 : 0;
}

double splice_distance(const std::vector<double>& truth, const std::vector<double>& pred) {
  require(truth.size() == 1, "splice distance needs a single-splice ground truth, got " +
                                 std::to_string(truth.size()) + " points");
  require(!pred.empty(), "splice distance needs a positional prediction");
  double best = std::abs(pred.front() - truth.front());
  for (double p : pred) best = std::min(best, std::abs(p - truth.front()));
  return best;
}

SampleEval score_sample(const std::string& id, const TokenSeq& truth, std::vector<RankedPrediction> ranked,
                        const std::vector<double>& windows) {
  require(!ranked.empty(), "sample " + id + " has no predictions");
  SampleEval s;
  s.id = id;
  s.truth = canonicalize(truth.indices);
  for (auto& r : ranked) r.tokens = canonicalize(r.tokens.indices);
  s.ranked = std::move(ranked);
  std::vector<TokenSeq> seqs;
  for (const auto& r : s.ranked) seqs.push_back(r.tokens);
  s.hit_rank = hit_rank(s.truth, seqs);
  const auto t = positions_of(s.truth);
  const auto p = positions_of(s.ranked.front().tokens);
  for (double w : windows) {
    WindowScore ws;
    ws.w = w;
    ws.jaccard = jaccard(t, p, w);
    ws.recall = recall(t, p, w);
    if (!t.empty() && !p.empty()) ws.pairs = match_points(t, p, w);
    s.windows.push_back(std::move(ws));
  }
  if (t.size() == 1) {
    if (p.empty()) s.d_sp_excluded = true;
    else s.d_sp = splice_distance(t, p);
  }
  return s;
}

EvalAggregates aggregate(const std::vector<SampleEval>& samples, const std::vector<double>& windows, std::size_t topn) {
  EvalAggregates a;
  a.samples = samples.size();
  a.windows = windows;
  a.topn.assign(topn, 0.0);
  a.jaccard.assign(windows.size(), 0.0);
  a.recall.assign(windows.size(), 0.0);
  double dsp_sum = 0.0;
  for (const auto& s : samples) {
    for (std::size_t k = 0; k < topn; ++k) a.topn[k] += s.hit_rank > 0 && s.hit_rank <= k + 1;
    require(s.windows.size() == windows.size(), "sample " + s.id + " was scored on different windows");
    for (std::size_t k = 0; k < windows.size(); ++k) {
      a.jaccard[k] += s.windows[k].jaccard;
      a.recall[k] += s.windows[k].recall;
    }
    if (s.d_sp) {
      dsp_sum += *s.d_sp;
      ++a.d_sp_count;
    }
    a.d_sp_excluded += s.d_sp_excluded;
    a.truncated += !s.ranked.empty() && s.ranked.front().truncated;
  }
  if (!samples.empty()) {
    const double n = static_cast<double>(samples.size());
    for (auto& v : a.topn) v /= n;
    for (auto& v : a.jaccard) v /= n;
    for (auto& v : a.recall) v /= n;
  }
  if (a.d_sp_count > 0) a.mean_d_sp = dsp_sum / static_cast<double>(a.d_sp_count);
  return a;
}

EvalResult evaluate(const Transformer<float>& model, const Dataset& data, const EvalOptions& options) {
  require(options.topn >= 1, "topn must be at least 1");
  require(!options.windows.empty(), "at least one tolerance window is required");
  EvalResult result;
  result.samples.resize(data.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < data.size(); i = next++) {
      try {
        const auto hyps = decode_topn(model, data.features[i], options.topn, options.beam);
        std::vector<RankedPrediction> ranked;
        for (const auto& h : hyps) ranked.push_back({h.tokens, h.score, h.truncated});
        result.samples[i] = score_sample(data.records[i].id, data.targets[i], std::move(ranked), options.windows);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::size_t workers = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::max<std::size_t>(1, std::min(workers, data.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  result.aggregates = aggregate(result.samples, options.windows, options.topn);
  return result;
}

namespace {

json seq_json(const TokenSeq& s) {
  json symbols = json::array();
  for (int t : s.indices) symbols.push_back(SpliceVocab::symbol(t));
  return {{"tokens", s.indices}, {"symbols", symbols}, {"positions_s", positions_of(s)}};
}

TokenSeq seq_from(const json& j) { return TokenSeq{j.at("tokens").get<std::vector<int>>()}; }

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string report_json(const EvalResult& r, int indent) {
  const auto& a = r.aggregates;
  json agg;
  agg["samples"] = a.samples;
  json topn = json::array();
  for (std::size_t k = 0; k < a.topn.size(); ++k) topn.push_back({{"n", k + 1}, {"accuracy", a.topn[k]}});
  agg["topn_accuracy"] = topn;
  json win = json::array();
  for (std::size_t k = 0; k < a.windows.size(); ++k)
    win.push_back({{"w", a.windows[k]}, {"jaccard", a.jaccard[k]}, {"recall", a.recall[k]}});
  agg["windows"] = win;
  agg["mean_d_sp"] = optional_number(a.mean_d_sp);
  agg["d_sp_count"] = a.d_sp_count;
  agg["d_sp_excluded"] = a.d_sp_excluded;
  agg["truncated"] = a.truncated;

  json samples = json::array();
  for (const auto& s : r.samples) {
    json js;
    js["id"] = s.id;
    js["truth"] = seq_json(s.truth);
    json ranked = json::array();
    for (const auto& p : s.ranked) {
      auto jp = seq_json(p.tokens);
      jp["score"] = p.score;
      jp["truncated"] = p.truncated;
      ranked.push_back(jp);
    }
    js["ranked"] = ranked;
    js["hit_rank"] = s.hit_rank;
    json ws = json::array();
    for (const auto& w : s.windows) {
      json pairs = json::array();
      for (const auto& p : w.pairs) pairs.push_back({p.truth, p.pred});
      ws.push_back({{"w", w.w}, {"jaccard", w.jaccard}, {"recall", w.recall}, {"pairs", pairs}});
    }
    js["windows"] = ws;
    js["d_sp"] = optional_number(s.d_sp);
    js["d_sp_excluded"] = s.d_sp_excluded;
    samples.push_back(js);
  }
  json out;
  out["aggregates"] = agg;
  out["samples"] = samples;
  return out.dump(indent);
}

EvalResult parse_report(const std::string& text) {
  EvalResult r;
  try {
    const auto j = json::parse(text);
    const auto& agg = j.at("aggregates");
    auto& a = r.aggregates;
    a.samples = agg.at("samples").get<std::size_t>();
    for (const auto& t : agg.at("topn_accuracy")) a.topn.push_back(t.at("accuracy").get<double>());
    for (const auto& w : agg.at("windows")) {
      a.windows.push_back(w.at("w").get<double>());
      a.jaccard.push_back(w.at("jaccard").get<double>());
      a.recall.push_back(w.at("recall").get<double>());
    }
    if (!agg.at("mean_d_sp").is_null()) a.mean_d_sp = agg["mean_d_sp"].get<double>();
    a.d_sp_count = agg.at("d_sp_count").get<std::size_t>();
    a.d_sp_excluded = agg.at("d_sp_excluded").get<std::size_t>();
    a.truncated = agg.value("truncated", std::size_t{0});
    for (const auto& js : j.at("samples")) {
      SampleEval s;
      s.id = js.at("id").get<std::string>();
      s.truth = seq_from(js.at("truth"));
      for (const auto& p : js.at("ranked"))
        s.ranked.push_back({seq_from(p), p.at("score").get<double>(), p.value("truncated", false)});
      s.hit_rank = js.at("hit_rank").get<std::size_t>();
      for (const auto& w : js.at("windows")) {
        WindowScore ws{w.at("w").get<double>(), w.at("jaccard").get<double>(), w.at("recall").get<double>(), {}};
        for (const auto& p : w.at("pairs")) ws.pairs.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        s.windows.push_back(std::move(ws));
      }
      if (!js.at("d_sp").is_null()) s.d_sp = js["d_sp"].get<double>();
      s.d_sp_excluded = js.value("d_sp_excluded", false);
      r.samples.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::Format, std::string("malformed evaluation report: ") + e.what());
  }
  return r;
}

EvalResult read_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open report " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_report(ss.str());
}

void write_report(const EvalResult& result, const std::filesystem::path& path) {
  write_text(path, report_json(result) + "\n");
}

void write_aggregate_csv(const EvalResult& result, const std::filesystem::path& path) {
  const auto& a = result.aggregates;
  std::ostringstream out;
  out << "metric,parameter,value\n";
  out << "samples,," << a.samples << '\n';
  for (std::size_t k = 0; k < a.topn.size(); ++k) out << "topn_accuracy," << k + 1 << ',' << fmt(a.topn[k]) << '\n';
  for (std::size_t k = 0; k < a.windows.size(); ++k) out << "jaccard," << fmt(a.windows[k]) << ',' << fmt(a.jaccard[k]) << '\n';
  for (std::size_t k = 0; k < a.windows.size(); ++k) out << "recall," << fmt(a.windows[k]) << ',' << fmt(a.recall[k]) << '\n';
  out << "mean_d_sp,," << (a.mean_d_sp ? fmt(*a.mean_d_sp) : "") << '\n';
  out << "d_sp_count,," << a.d_sp_count << '\n';
  out << "d_sp_excluded,," << a.d_sp_excluded << '\n';
  out << "truncated,," << a.truncated << '\n';
  write_text(path, out.str());
}

namespace {

std::string positions_field(const TokenSeq& s) {
  const auto p = positions_of(s);
  if (p.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < p.size(); ++i) out += (i ? " " : "") + fmt(p[i]);
  return out;
}

}  // namespace

void write_samples_csv(const EvalResult& result, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "id,truth_s,top1_s,hit_rank,d_sp";
  for (double w : result.aggregates.windows) out << ",jaccard_" << fmt(w) << ",recall_" << fmt(w);
  out << '\n';
  for (const auto& s : result.samples) {
    out << s.id << ',' << positions_field(s.truth) << ',' << (s.ranked.empty() ? "" : positions_field(s.ranked[0].tokens))
        << ',' << s.hit_rank << ',' << (s.d_sp ? fmt(*s.d_sp) : "");
    for (const auto& w : s.windows) out << ',' << fmt(w.jaccard) << ',' << fmt(w.recall);
    out << '\n';
  }
  write_text(path, out.str());
}

namespace {

struct Series {
  std::string label;
  std::string colour;
  std::vector<double> x, y;
};

void chart(std::ostringstream& svg, double left, const std::string& title, const std::string& x_label,
           const std::vector<Series>& series) {
  const double top = 40, width = 300, height = 220;
  double x_min = 1e300, x_max = -1e300;
  for (const auto& s : series)
    for (double x : s.x) {
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
    }
  if (!(x_max > x_min)) {
    x_min -= 0.5;
    x_max += 0.5;
  }
  auto px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * width; };
  auto py = [&](double y) { return top + (1.0 - y) * height; };
  svg << "<text x=\"" << left + width / 2 << "\" y=\"" << top - 16 << "\" text-anchor=\"middle\" font-size=\"14\">"
      << title << "</text>\n";
  svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double y = k / 4.0;
    svg << "<line x1=\"" << left << "\" y1=\"" << py(y) << "\" x2=\"" << left + width << "\" y2=\"" << py(y)
        << "\" stroke=\"#ddd\"/>\n";
    svg << "<text x=\"" << left - 6 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(y)
        << "</text>\n";
  }
  if (!series.empty())
    for (double x : series.front().x)
      svg << "<text x=\"" << px(x) << "\" y=\"" << top + height + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
          << fmt(x) << "</text>\n";
  svg << "<text x=\"" << left + width / 2 << "\" y=\"" << top + height + 36 << "\" text-anchor=\"middle\" font-size=\"12\">"
      << x_label << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    svg << "<polyline fill=\"none\" stroke=\"" << s.colour << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) svg << (i ? " " : "") << px(s.x[i]) << ',' << py(s.y[i]);
    svg << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      svg << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"3\" fill=\"" << s.colour << "\"/>\n";
    svg << "<text x=\"" << left + 8 << "\" y=\"" << top + 16 + 14 * static_cast<double>(k) << "\" font-size=\"11\" fill=\""
        << s.colour << "\">" << s.label << "</text>\n";
  }
}

}  // namespace

std::string render_svg(const EvalAggregates& a) {
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"760\" height=\"320\" font-family=\"sans-serif\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  Series acc{"top-n accuracy", "#1f77b4", {}, {}};
  for (std::size_t k = 0; k < a.topn.size(); ++k) {
    acc.x.push_back(static_cast<double>(k + 1));
    acc.y.push_back(a.topn[k]);
  }
  chart(svg, 50, "Accuracy vs n", "n", {acc});
  Series jac{"Jaccard", "#d62728", a.windows, a.jaccard};
  Series rec{"Recall", "#2ca02c", a.windows, a.recall};
  chart(svg, 430, "Jaccard and recall vs window", "w (s)", {jac, rec});
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace spliceloc
