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
#include <limits>

#include "op_cases.hpp"
#include "spliceloc/model.hpp"

namespace spliceloc::testing {

using namespace spliceloc::ad;

namespace {

AttentionWeights<double> random_weights(std::size_t d, Rng& rng) {
  auto lin = [&] { return Linear<double>{random_tensor({d, d}, rng, 0.5), random_tensor({d}, rng, 0.5)}; };
  return {lin(), lin(), lin(), lin()};
}

FeatureStack random_features(std::size_t frames, std::size_t width, Rng& rng) {
  FeatureStack f;
  f.frames = frames;
  f.width = width;
  for (std::size_t i = 0; i < frames * width; ++i) f.data.push_back(static_cast<float>(rng.uniform(-1.0, 1.0)));
  return f;
}

}  // namespace

ModelConfig tiny_gradcheck_config() {
  ModelConfig c;
  c.d_model = 16;
  c.n_heads = 2;
  c.n_encoder_layers = 1;
  c.n_decoder_layers = 1;
  c.d_ff = 24;
  c.input_width = 10;
  c.dropout = 0.0;
  return c;
}

GradCheck end_to_end_check(Rng& rng) {
  const auto config = tiny_gradcheck_config();
  Transformer<double> model(config, rng.next());
  const auto f1 = random_features(1 + rng.index(5), config.input_width, rng);
  const auto f2 = random_features(1 + rng.index(5), config.input_width, rng);
  auto target = [&] {
    std::vector<double> labels;
    for (std::size_t i = 0, n = rng.index(4); i < n; ++i) labels.push_back(0.5 * static_cast<double>(1 + rng.index(89)));
    return target_sequence(labels);
  };
  const Batch batch = make_batch({&f1, &f2}, {target(), target()});

  Tape<double> tape;
  for (auto& [name, p] : model.parameters()) p.zero_grad();
  {
    TapeScope<double> scope(tape);
    tape.backward(model.loss(batch));
  }
  auto& params = model.parameters();
  std::vector<std::pair<std::size_t, std::size_t>> picks;
  for (int i = 0; i < 20; ++i) {
    const std::size_t p = rng.index(params.size());
    picks.emplace_back(p, rng.index(params[p].second.size()));
  }
  const double h = 1e-6, tol = 1e-3;
  std::vector<double> analytic, numeric;
  for (const auto& [p, i] : picks) {
    auto& data = params[p].second.data();
    const double keep = data[i];
    data[i] = keep + h;
    const double up = model.loss(batch).item();
    data[i] = keep - h;
    const double down = model.loss(batch).item();
    data[i] = keep;
    numeric.push_back((up - down) / (2.0 * h));
    analytic.push_back(params[p].second.grad()[i]);
  }
  double scale = 0.0;
  for (double v : numeric) scale = std::max(scale, std::abs(v));
  GradCheck r;
  for (std::size_t k = 0; k < numeric.size(); ++k) {
    const double allowance = tol * std::max(std::abs(analytic[k]), std::abs(numeric[k])) + tol * scale + 1e-8;
    r.worst = std::max(r.worst, std::abs(analytic[k] - numeric[k]) / allowance);
    ++r.checked;
  }
  return r;
}

std::vector<OpCase> model_cases() {
  std::vector<OpCase> cases;
  cases.push_back({"attention_masked", [](Rng& rng) {
                     const std::size_t tq = 1 + rng.index(4), tk = 1 + rng.index(4), dk = 1 + rng.index(4);
                     std::vector<double> mask(tq * tk, 0.0);
                     for (std::size_t q = 0; q < tq; ++q)
                       for (std::size_t k = 1; k < tk; ++k)
                         if (rng.index(3) == 0) mask[q * tk + k] = -std::numeric_limits<double>::infinity();
                     const auto m = DTensor::from({1, tq, tk}, mask);
                     std::vector<double> w;
                     return gradcheck({random_tensor({1, tq, dk}, rng), random_tensor({1, tk, dk}, rng),
                                       random_tensor({1, tk, 3}, rng)},
                                      [&](auto& in) {
                                        auto out = attention(in[0], in[1], in[2], m);
                                        if (w.empty())
                                          for (std::size_t i = 0; i < out.size(); ++i) w.push_back(rng.uniform(-1, 1));
                                        return weighted_sum(out, w);
                                      });
                   }});
  cases.push_back({"multi_head", [](Rng& rng) {
                     const std::size_t heads = 1 + rng.index(2), d = heads * (1 + rng.index(3));
                     const std::size_t b = 1 + rng.index(2), tq = 1 + rng.index(3), tk = 1 + rng.index(3);
                     auto weights = random_weights(d, rng);
                     std::vector<double> w;
                     std::vector<DTensor> inputs{random_tensor({b, tq, d}, rng), random_tensor({b, tk, d}, rng),
                                                 weights.q.weight, weights.k.bias, weights.v.weight, weights.o.weight};
                     return gradcheck(inputs, [&](auto& in) {
                       auto out = multi_head(in[0], in[1], weights, heads);
                       if (w.empty())
                         for (std::size_t i = 0; i < out.size(); ++i) w.push_back(rng.uniform(-1, 1));
                       return weighted_sum(out, w);
                     });
                   }});
  cases.push_back({"end_to_end_tiny_model", end_to_end_check});
  return cases;
}

}  // namespace spliceloc::testing
