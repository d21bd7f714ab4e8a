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

#include "support/match_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace spliceloc::testing {

MatchSummary exhaustive_matching(const std::vector<double>& truth, const std::vector<double>& pred, double w) {
  MatchSummary best;
  std::vector<bool> used(pred.size(), false);
  std::function<void(std::size_t, std::size_t, double)> visit = [&](std::size_t i, std::size_t count, double cost) {
    if (i == truth.size()) {
      if (count > best.count || (count == best.count && cost < best.cost)) best = {count, cost};
      return;
    }
    visit(i + 1, count, cost);
    for (std::size_t j = 0; j < pred.size(); ++j) {
      const double d = std::abs(truth[i] - pred[j]);
      if (used[j] || d > w + 1e-9) continue;
      used[j] = true;
      visit(i + 1, count + 1, cost + d);
      used[j] = false;
    }
  };
  visit(0, 0, 0.0);
  return best;
}

std::vector<double> random_points(Rng& rng, std::size_t max_points, double span) {
  const std::size_t n = rng.index(max_points + 1);
  std::vector<double> out;
  while (out.size() < n) {
    const double x = rng.uniform() < 0.5 ? 0.5 * static_cast<double>(1 + rng.index(static_cast<std::size_t>(span / 0.5)))
                                         : rng.uniform(0.0, span);
    if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace spliceloc::testing
