// Copyright 2026 The vilcb Authors.
//
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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "test_util.h"
#include "vilcb/errors.h"
#include "vilcb/hard_instances.h"
#include "vilcb/io.h"
#include "vilcb/offline_data.h"
#include "vilcb/rng.h"

namespace vilcb {
namespace {

using testing::RandomGame;
using testing::UniformBehavior;

TEST_CASE("counter RNG is reproducible and roughly uniform") {
  CounterRng a(Hash64({1, 2})), b(Hash64({1, 2})), c(Hash64({2, 1}));
  CHECK(a.NextU64() == b.NextU64());
  CHECK(a.NextU64() != c.NextU64());
  CounterRng u(42);
  double total = 0.0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    const double x = u.NextUniform();
    REQUIRE(x >= 0.0);
    REQUIRE(x < 1.0);
    total += x;
  }
  // Mean of n uniforms has standard deviation 1/sqrt(12 n).
  CHECK(std::abs(total / n - 0.5) <= 4.0 / std::sqrt(12.0 * n));
}

TEST_CASE("categorical sampling by inverse CDF") {
  const std::vector<double> cdf{0.25, 0.25, 0.75, 1.0};
  CHECK(SampleCategorical(cdf, 0.0) == 0);
  CHECK(SampleCategorical(cdf, 0.2499) == 0);
  // Zero-mass entries are never returned.
  CHECK(SampleCategorical(cdf, 0.25) == 2);
  CHECK(SampleCategorical(cdf, 0.9) == 3);
  CHECK(SampleCategorical(cdf, 1.0) == 3);
}

TEST_CASE("sampling is deterministic in the seed") {
  std::mt19937_64 rng(1);
  const MarkovGame game = RandomGame(rng, 3, 2, 2, 0.9);
  const auto d_b = UniformBehavior(game);
  const Dataset x = SampleDataset(game, d_b, 500, 77);
  const Dataset y = SampleDataset(game, d_b, 500, 77);
  const Dataset z = SampleDataset(game, d_b, 500, 78);
  CHECK(DatasetToCsv(x) == DatasetToCsv(y));
  CHECK(x.transitions != z.transitions);
  // A longer draw extends a shorter one with the same seed.
  const Dataset longer = SampleDataset(game, d_b, 800, 77);
  CHECK(std::equal(x.transitions.begin(), x.transitions.end(),
                   longer.transitions.begin()));
}

TEST_CASE("point-mass behavior with deterministic transition") {
  MarkovGame game(2, 2, 2, 0.9);
  for (int s = 0; s < 2; ++s) {
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) game.MutableP(s, a, b)[1] = 1.0;
    }
  }
  BehaviorDistribution d_b{2, 2, 2, std::vector<double>(8, 0.0)};
  d_b.probs[game.TripleIndex(0, 1, 0)] = 1.0;
  const Dataset data = SampleDataset(game, d_b, 1000, 5);
  for (const Transition& t : data.transitions) {
    CHECK(t == Transition{0, 1, 0, 1});
  }
}

TEST_CASE("invalid sampling requests are rejected") {
  std::mt19937_64 rng(1);
  const MarkovGame game = RandomGame(rng, 2, 2, 2, 0.9);
  CHECK_THROWS_AS(SampleDataset(game, UniformBehavior(game), 0, 1),
                  ValidationError);
  BehaviorDistribution bad = UniformBehavior(game);
  bad.probs[0] += 0.1;
  CHECK_THROWS_AS(SampleDataset(game, bad, 10, 1), ValidationError);
}

TEST_CASE("empirical model from a hand-built dataset") {
  MarkovGame game(2, 1, 1, 0.9);
  game.MutableP(0, 0, 0)[0] = 0.5;
  game.MutableP(0, 0, 0)[1] = 0.5;
  game.MutableP(1, 0, 0)[1] = 1.0;
  game.MutableR(0, 0, 0) = 0.7;
  game.MutableR(1, 0, 0) = 0.4;
  Dataset data;
  data.num_states = 2;
  data.num_actions_max = 1;
  data.num_actions_min = 1;
  data.transitions = {{0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, 0, 1}};
  const EmpiricalModel model = BuildEmpiricalModel(data, game);
  CHECK(model.P(0, 0, 0)[0] == 0.5);
  CHECK(model.P(0, 0, 0)[1] == 0.5);
  CHECK(model.r(0, 0, 0) == 0.7);
  CHECK(model.count(0, 0, 0) == 4);
  // State 1 is never visited.
  CHECK(model.count(1, 0, 0) == 0);
  CHECK(model.P(1, 0, 0)[0] == 0.5);
  CHECK(model.P(1, 0, 0)[1] == 0.5);
  CHECK(model.r(1, 0, 0) == 0.0);
  CHECK(model.total == 4);
  CHECK_NOTHROW(ValidateGame(model.AsGame()));
}

TEST_CASE("counts match the transition list and rows are exact ratios") {
  std::mt19937_64 rng(2);
  const MarkovGame game = RandomGame(rng, 4, 3, 2, 0.9);
  const Dataset data = SampleDataset(game, UniformBehavior(game), 3000, 9);
  const EmpiricalModel model = BuildEmpiricalModel(data, game);
  std::vector<std::int64_t> counts(game.num_triples(), 0);
  std::vector<std::int64_t> next(game.num_triples() * 4, 0);
  for (const Transition& t : data.transitions) {
    ++counts[game.TripleIndex(t.s, t.a, t.b)];
    ++next[game.TripleIndex(t.s, t.a, t.b) * 4 + t.s_next];
  }
  CHECK(counts == model.counts);
  std::int64_t total = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    total += counts[k];
    for (int t = 0; t < 4; ++t) {
      const double expected =
          counts[k] > 0 ? static_cast<double>(next[k * 4 + t]) / counts[k]
                        : 0.25;
      CHECK(model.p_hat[k * 4 + t] == expected);
    }
  }
  CHECK(total == 3000);
}

TEST_CASE("hard-instance transitions concentrate on theta") {
  HardInstanceSpec spec;
  spec.num_actions_max = 4;
  const HardInstance hard = BuildHardInstance(spec);
  const std::int64_t n = 100000;
  const Dataset data = SampleDataset(hard.game, hard.d_b, n, 2024);
  const auto theta = spec.ResolvedTheta();
  for (int a = 0; a < 4; ++a) {
    std::int64_t visits = 0, stay = 0;
    for (const Transition& t : data.transitions) {
      if (t.s == 0 && t.a == a && t.b == 0) {
        ++visits;
        stay += t.s_next == 0;
      }
    }
    REQUIRE(visits > 0);
    const double p = theta[a] == ThetaLevel::kP ? spec.p() : spec.q();
    const double se = std::sqrt(p * (1 - p) / visits);
    CHECK(std::abs(static_cast<double>(stay) / visits - p) <= 3 * se);
  }
}

TEST_CASE("empirical transitions converge at the k^-1/2 rate") {
  std::mt19937_64 rng(3);
  const int S = 3;
  const MarkovGame game = RandomGame(rng, S, 2, 2, 0.9);
  // Each triple visited k times, next states drawn from the true kernel.
  auto worst_error = [&](int k, std::uint64_t seed) {
    CounterRng draw(seed);
    Dataset data;
    data.num_states = S;
    data.num_actions_max = 2;
    data.num_actions_min = 2;
    double max_sd = 0.0;
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          const auto row = game.P(s, a, b);
          std::vector<double> cdf(S);
          std::partial_sum(row.begin(), row.end(), cdf.begin());
          for (double x : row) max_sd = std::max(max_sd, std::sqrt(x * (1 - x)));
          for (int i = 0; i < k; ++i) {
            data.transitions.push_back(
                {s, a, b, SampleCategorical(cdf, draw.NextUniform())});
          }
        }
      }
    }
    const EmpiricalModel model = BuildEmpiricalModel(data, game);
    return std::pair{testing::SupNorm(model.p_hat, game.transition()),
                     max_sd / std::sqrt(static_cast<double>(k))};
  };
  for (int k : {100, 1000, 10000, 100000}) {
    const auto [err, sd] = worst_error(k, 1000 + k);
    // 36 entries; a 4-sigma band keeps the family-wise miss rate tiny.
    CHECK(err <= 4 * sd);
  }
}

TEST_CASE("dataset CSV round-trips") {
  std::mt19937_64 rng(4);
  const MarkovGame game = RandomGame(rng, 3, 2, 2, 0.9);
  const Dataset data = SampleDataset(game, UniformBehavior(game), 200, 3);
  const Dataset back = DatasetFromCsv(DatasetToCsv(data), DatasetSidecar(data));
  CHECK(back.transitions == data.transitions);
  CHECK(back.seed == 3);
  CHECK_THROWS_AS(DatasetFromCsv("s,a,b,s_next\n0,0,0,9\n", DatasetSidecar(data)),
                  ValidationError);
}

}  // namespace
}  // namespace vilcb
