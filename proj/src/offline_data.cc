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

#include "vilcb/offline_data.h"

#include <algorithm>
#include <string>

#include "vilcb/errors.h"
#include "vilcb/rng.h"

namespace vilcb {
namespace {

std::vector<double> CumulativeSums(std::span<const double> p) {
  std::vector<double> cdf(p.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    acc += p[k];
    cdf[k] = acc;
  }
  return cdf;
}

}  // namespace

void ValidateDataset(const Dataset& data) {
  if (data.transitions.empty()) throw ValidationError("dataset is empty");
  if (data.num_states < 1 || data.num_actions_max < 1 ||
      data.num_actions_min < 1) {
    throw ValidationError("dataset dimensions must be positive");
  }
  for (std::size_t i = 0; i < data.transitions.size(); ++i) {
    const Transition& t = data.transitions[i];
    if (t.s < 0 || t.s >= data.num_states || t.s_next < 0 ||
        t.s_next >= data.num_states || t.a < 0 ||
        t.a >= data.num_actions_max || t.b < 0 ||
        t.b >= data.num_actions_min) {
      throw ValidationError("transition " + std::to_string(i) +
                            " has an index out of range");
    }
  }
}

int SampleCategorical(std::span<const double> cdf, double u) {
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it != cdf.end()) return static_cast<int>(it - cdf.begin());
  // u >= total: fall back to the last entry that carries mass.
  for (int k = static_cast<int>(cdf.size()) - 1; k > 0; --k) {
    if (cdf[k] > cdf[k - 1]) return k;
  }
  return 0;
}

Dataset SampleDataset(const MarkovGame& game, const BehaviorDistribution& d_b,
                      std::int64_t num_samples, std::uint64_t seed) {
  if (num_samples < 1) throw ValidationError("N must be at least 1");
  ValidateGame(game);
  ValidateBehaviorDistribution(d_b, game);
  const int S = game.num_states();
  const int A = game.num_actions_max();
  const int B = game.num_actions_min();

  const std::vector<double> triple_cdf = CumulativeSums(d_b.probs);
  std::vector<double> next_cdf(game.transition().size());
  for (int k = 0; k < game.num_triples(); ++k) {
    const auto row = std::span<const double>(game.transition())
                         .subspan(static_cast<std::size_t>(k) * S, S);
    const auto cdf = CumulativeSums(row);
    std::copy(cdf.begin(), cdf.end(),
              next_cdf.begin() + static_cast<std::ptrdiff_t>(k) * S);
  }

  Dataset data;
  data.seed = seed;
  data.num_states = S;
  data.num_actions_max = A;
  data.num_actions_min = B;
  data.transitions.resize(static_cast<std::size_t>(num_samples));
  for (std::int64_t i = 0; i < num_samples; ++i) {
    CounterRng rng(Hash64({seed, static_cast<std::uint64_t>(i)}));
    const int k = SampleCategorical(triple_cdf, rng.NextUniform());
    const int s_next = SampleCategorical(
        std::span<const double>(next_cdf).subspan(
            static_cast<std::size_t>(k) * S, S),
        rng.NextUniform());
    Transition& t = data.transitions[static_cast<std::size_t>(i)];
    t.s = k / (A * B);
    t.a = (k / B) % A;
    t.b = k % B;
    t.s_next = s_next;
  }
  return data;
}

MarkovGame EmpiricalModel::AsGame() const {
  MarkovGame game(num_states, num_actions_max, num_actions_min, gamma);
  game.mutable_transition() = p_hat;
  game.mutable_reward() = r_hat;
  return game;
}

EmpiricalModel BuildEmpiricalModel(const Dataset& data,
                                   const MarkovGame& game_for_rewards) {
  ValidateDataset(data);
  const int S = game_for_rewards.num_states();
  const int A = game_for_rewards.num_actions_max();
  const int B = game_for_rewards.num_actions_min();
  if (data.num_states != S || data.num_actions_max != A ||
      data.num_actions_min != B) {
    throw ValidationError("dataset dimensions do not match the game");
  }

  EmpiricalModel model;
  model.num_states = S;
  model.num_actions_max = A;
  model.num_actions_min = B;
  model.gamma = game_for_rewards.gamma();
  model.total = data.size();
  const std::size_t triples = static_cast<std::size_t>(S) * A * B;
  model.counts.assign(triples, 0);
  std::vector<std::int64_t> next_counts(triples * S, 0);
  for (const Transition& t : data.transitions) {
    const std::size_t k = model.TripleIndex(t.s, t.a, t.b);
    ++model.counts[k];
    ++next_counts[k * S + t.s_next];
  }

  model.p_hat.assign(triples * S, 1.0 / S);
  model.r_hat.assign(triples, 0.0);
  for (std::size_t k = 0; k < triples; ++k) {
    const std::int64_t n = model.counts[k];
    if (n == 0) continue;
    for (int t = 0; t < S; ++t) {
      model.p_hat[k * S + t] =
          static_cast<double>(next_counts[k * S + t]) / static_cast<double>(n);
    }
    model.r_hat[k] = game_for_rewards.reward()[k];
  }
  return model;
}

}  // namespace vilcb
