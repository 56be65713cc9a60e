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

#ifndef VILCB_OFFLINE_DATA_H_
#define VILCB_OFFLINE_DATA_H_

#include <cstdint>
#include <span>
#include <vector>

#include "vilcb/game_model.h"

namespace vilcb {

struct Transition {
  int s = 0;
  int a = 0;
  int b = 0;
  int s_next = 0;

  friend bool operator==(const Transition&, const Transition&) = default;
};

struct Dataset {
  std::vector<Transition> transitions;
  std::uint64_t seed = 0;
  int num_states = 0;
  int num_actions_max = 0;
  int num_actions_min = 0;

  std::int64_t size() const {
    return static_cast<std::int64_t>(transitions.size());
  }
};

// Throws ValidationError if the dataset is empty or any index is out of
// range for its recorded dimensions.
void ValidateDataset(const Dataset& data);

// Index of the first entry whose cumulative sum exceeds `u`, i.e. the
// inverse CDF with ties going to the lower index. Zero-mass entries are
// never returned; if `u` lands past the accumulated total (round-off), the
// last entry with positive mass is returned.
int SampleCategorical(std::span<const double> cdf, double u);

// Draws N i.i.d. transitions: (s, a, b) from d_b by inverse CDF over the
// row-major flattened index, then s' from P(. | s, a, b). Sample i uses
// substream Hash64({seed, i}) (see rng.h), so the result is a pure function
// of (game, d_b, N, seed).
Dataset SampleDataset(const MarkovGame& game, const BehaviorDistribution& d_b,
                      std::int64_t num_samples, std::uint64_t seed);

// Empirical game: counts N(s,a,b), P_hat and r_hat.
struct EmpiricalModel {
  int num_states = 0;
  int num_actions_max = 0;
  int num_actions_min = 0;
  double gamma = 0.0;
  std::int64_t total = 0;
  std::vector<std::int64_t> counts;   // [s][a][b]
  std::vector<double> p_hat;          // [s][a][b][s']
  std::vector<double> r_hat;          // [s][a][b]

  std::size_t TripleIndex(int s, int a, int b) const {
    return (static_cast<std::size_t>(s) * num_actions_max + a) *
               num_actions_min +
           b;
  }
  std::int64_t count(int s, int a, int b) const {
    return counts[TripleIndex(s, a, b)];
  }
  std::span<const double> P(int s, int a, int b) const {
    return {p_hat.data() + TripleIndex(s, a, b) * num_states,
            static_cast<std::size_t>(num_states)};
  }
  double r(int s, int a, int b) const { return r_hat[TripleIndex(s, a, b)]; }
  double horizon() const { return 1.0 / (1.0 - gamma); }

  // The empirical game as a MarkovGame (same tables).
  MarkovGame AsGame() const;
};

// Rows with N(s,a,b) > 0 hold integer counts divided once by N(s,a,b);
// unvisited rows are uniform 1/S and get reward 0. Rewards at visited
// triples are copied from `game_for_rewards`.
EmpiricalModel BuildEmpiricalModel(const Dataset& data,
                                   const MarkovGame& game_for_rewards);

}  // namespace vilcb

#endif  // VILCB_OFFLINE_DATA_H_
