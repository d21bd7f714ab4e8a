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

#include "doctest.h"
#include "spliceloc/error.hpp"
#include "spliceloc/tensor.hpp"
#include "support/op_cases.hpp"

using namespace spliceloc;
using namespace spliceloc::ad;
using spliceloc::testing::DTensor;

TEST_CASE("matmul by hand") {
  const auto a = Tensor<float>::from({2, 2}, {1, 2, 3, 4});
  const auto b = Tensor<float>::from({2, 1}, {5, 6});
  const auto c = matmul(a, b);
  CHECK(c.shape() == Shape{2, 1});
  CHECK(c.data() == std::vector<float>{17, 39});

  const auto eye = Tensor<float>::from({2, 2}, {1, 0, 0, 1});
  CHECK(matmul(a, eye).data() == a.data());
  CHECK(matmul(a, a, true).data() == std::vector<float>{5, 11, 11, 25});

  try {
    matmul(a, Tensor<float>::zeros({3, 2}));
    FAIL("expected a contract error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Contract);
    CHECK(std::string(e.what()).find("[2,2]") != std::string::npos);
    CHECK(std::string(e.what()).find("[3,2]") != std::string::npos);
  }
}

TEST_CASE("softmax rows") {
  const auto u = softmax(Tensor<double>::full({1, 4}, 2.5));
  for (double v : u.data()) CHECK(v == doctest::Approx(0.25));
  const auto big = softmax(Tensor<double>::from({1, 2}, {1000.0, 0.0}));
  CHECK(big.data()[0] == doctest::Approx(1.0));
  CHECK(big.data()[1] == doctest::Approx(0.0));
  const double inf = std::numeric_limits<double>::infinity();
  const auto masked = softmax(Tensor<double>::from({2, 2}, {-inf, -inf, 0.0, -inf}));
  CHECK(masked.data() == std::vector<double>{0.0, 0.0, 1.0, 0.0});
}

TEST_CASE("layer_norm statistics") {
  Rng rng(1);
  const auto x = Tensor<double>::uniform({5, 16}, 4.0, rng, false);
  const auto y = layer_norm(x, Tensor<double>::full({16}, 1.0), Tensor<double>::zeros({16}));
  for (std::size_t r = 0; r < 5; ++r) {
    double mean = 0.0, var = 0.0;
    for (std::size_t j = 0; j < 16; ++j) mean += y.data()[r * 16 + j];
    mean /= 16;
    for (std::size_t j = 0; j < 16; ++j) var += std::pow(y.data()[r * 16 + j] - mean, 2);
    var /= 16;
    CHECK(std::abs(mean) < 1e-6);
    CHECK(std::abs(var - 1.0) < 1e-3);
  }
  const auto c = layer_norm(Tensor<double>::full({1, 8}, 3.0), Tensor<double>::full({8}, 1.0),
                            Tensor<double>::zeros({8}));
  for (double v : c.data()) CHECK(v == 0.0);
}

TEST_CASE("cross_entropy anchors") {
  std::vector<double> l(93, 0.0);
  CHECK(cross_entropy(Tensor<double>::from({1, 93}, l), {5}, 0).item() == doctest::Approx(std::log(93.0)).epsilon(1e-12));
  l[5] = 100.0;
  CHECK(cross_entropy(Tensor<double>::from({1, 93}, l), {5}, 0).item() < 1e-6);
  CHECK_THROWS_AS(cross_entropy(Tensor<double>::from({1, 93}, l), {0}, 0), Error);
}

TEST_CASE("tape visits every node once and leaves inference unrecorded") {
  Rng rng(2);
  auto w = Tensor<double>::uniform({3, 3}, 1.0, rng);
  auto x = Tensor<double>::uniform({2, 3}, 1.0, rng, false);
  {
    const auto y = relu(matmul(x, w));
    CHECK(!y.requires_grad());
  }
  Tape<double> tape;
  {
    TapeScope<double> scope(tape);
    auto h = matmul(x, w);     // 1
    auto r = relu(h);          // 2
    auto s = softmax(r);       // 3
    auto loss = sum(s);        // 4
    CHECK(tape.size() == 4);
    tape.backward(loss);
  }
  CHECK(tape.last_visits() == 4);
  CHECK(tape.size() == 0);
  CHECK(w.has_grad());
}

TEST_CASE("no NaN for bounded inputs") {
  Rng rng(3);
  Tape<double> tape;
  TapeScope<double> scope(tape);
  auto x = Tensor<double>::uniform({4, 8}, 10.0, rng);
  auto b = Tensor<double>::uniform({8}, 10.0, rng);
  auto y = softmax(layer_norm(matmul(x, x, true), Tensor<double>::full({4}, 1.0), Tensor<double>::zeros({4})));
  auto z = cross_entropy(add(matmul(y, x), b), {1, 2, 3, 4}, 0);
  tape.backward(z);
  for (double v : x.grad()) CHECK(std::isfinite(v));
}

TEST_CASE("finite-difference checks for every operation") {
  Rng rng(10);
  for (const auto& c : spliceloc::testing::tensor_op_cases()) {
    for (int i = 0; i < 10; ++i) {
      const auto r = c.run(rng);
      INFO(c.name, " instance ", i, " worst ratio ", r.worst);
      CHECK(r.ok());
    }
  }
}
