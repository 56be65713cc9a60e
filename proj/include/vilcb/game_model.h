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

#ifndef VILCB_GAME_MODEL_H_
#define VILCB_GAME_MODEL_H_

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace vilcb {

// Stand-in for an unbounded concentrability coefficient.
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Row sums and probability vectors are checked against this.
inline constexpr double kProbabilityTol = 1e-9;

enum class Side { kMax, kMin };

// Finite two-player zero-sum discounted Markov game. The max player picks
// a in [0, A), the min player picks b in [0, B). Tables are dense and
// row-major: reward is [s][a][b], transition is [s][a][b][s'].
class MarkovGame {
 public:
  MarkovGame() = default;
  // All transitions and rewards zero-initialized.
  MarkovGame(int num_states, int num_actions_max, int num_actions_min,
             double gamma);

  int num_states() const { return num_states_; }
  int num_actions_max() const { return num_actions_max_; }
  int num_actions_min() const { return num_actions_min_; }
  double gamma() const { return gamma_; }
  // 1 / (1 - gamma).
  double horizon() const { return 1.0 / (1.0 - gamma_); }
  int num_triples() const {
    return num_states_ * num_actions_max_ * num_actions_min_;
  }

  std::size_t TripleIndex(int s, int a, int b) const {
    return (static_cast<std::size_t>(s) * num_actions_max_ + a) *
               num_actions_min_ +
           b;
  }

  std::span<const double> P(int s, int a, int b) const {
    return {transition_.data() + TripleIndex(s, a, b) * num_states_,
            static_cast<std::size_t>(num_states_)};
  }
  std::span<double> MutableP(int s, int a, int b) {
    return {transition_.data() + TripleIndex(s, a, b) * num_states_,
            static_cast<std::size_t>(num_states_)};
  }
  double r(int s, int a, int b) const { return reward_[TripleIndex(s, a, b)]; }
  double& MutableR(int s, int a, int b) { return reward_[TripleIndex(s, a, b)]; }

  const std::vector<double>& transition() const { return transition_; }
  const std::vector<double>& reward() const { return reward_; }
  std::vector<double>& mutable_transition() { return transition_; }
  std::vector<double>& mutable_reward() { return reward_; }

 private:
  int num_states_ = 0;
  int num_actions_max_ = 0;
  int num_actions_min_ = 0;
  double gamma_ = 0.0;
  std::vector<double> transition_;
  std::vector<double> reward_;
};

// Throws ValidationError naming the first violated invariant: dimensions,
// gamma in (0,1), stochastic transition rows, rewards in [0,1].
void ValidateGame(const MarkovGame& game);

// Per-state action distribution for one player.
class StationaryPolicy {
 public:
  StationaryPolicy() = default;
  // Uniform over all actions.
  StationaryPolicy(Side side, int num_states, int num_actions);

  static StationaryPolicy Deterministic(Side side, int num_actions,
                                        const std::vector<int>& actions);

  Side side() const { return side_; }
  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }

  std::span<const double> At(int s) const {
    return {probs_.data() + static_cast<std::size_t>(s) * num_actions_,
            static_cast<std::size_t>(num_actions_)};
  }
  std::span<double> MutableAt(int s) {
    return {probs_.data() + static_cast<std::size_t>(s) * num_actions_,
            static_cast<std::size_t>(num_actions_)};
  }
  double operator()(int s, int action) const {
    return probs_[static_cast<std::size_t>(s) * num_actions_ + action];
  }
  const std::vector<double>& probs() const { return probs_; }

 private:
  Side side_ = Side::kMax;
  int num_states_ = 0;
  int num_actions_ = 0;
  std::vector<double> probs_;
};

// Checks that every row is a distribution and that the action count matches
// the player's side in `game`.
void ValidatePolicy(const StationaryPolicy& policy, const MarkovGame& game);

struct StateDistribution {
  std::vector<double> probs;

  static StateDistribution PointMass(int num_states, int s);
  double operator[](int s) const { return probs[s]; }
};

void ValidateStateDistribution(const StateDistribution& rho,
                               const MarkovGame& game);

// Data-generating distribution over (s, a, b), laid out like the reward.
struct BehaviorDistribution {
  int num_states = 0;
  int num_actions_max = 0;
  int num_actions_min = 0;
  std::vector<double> probs;

  double operator()(int s, int a, int b) const {
    return probs[(static_cast<std::size_t>(s) * num_actions_max + a) *
                     num_actions_min +
                 b];
  }
};

void ValidateBehaviorDistribution(const BehaviorDistribution& d_b,
                                  const MarkovGame& game);

using ValueVector = std::vector<double>;

// Q-function over (s, a, b). The slice Q(s, ., .) is a contiguous A x B
// row-major block so it can be handed to the matrix solver directly.
struct QTensor {
  int num_states = 0;
  int num_actions_max = 0;
  int num_actions_min = 0;
  std::vector<double> values;

  static QTensor Filled(int num_states, int num_actions_max,
                        int num_actions_min, double value);
  static QTensor LikeGame(const MarkovGame& game, double value) {
    return Filled(game.num_states(), game.num_actions_max(),
                  game.num_actions_min(), value);
  }

  std::size_t Index(int s, int a, int b) const {
    return (static_cast<std::size_t>(s) * num_actions_max + a) *
               num_actions_min +
           b;
  }
  double operator()(int s, int a, int b) const { return values[Index(s, a, b)]; }
  double& operator()(int s, int a, int b) { return values[Index(s, a, b)]; }
  std::span<const double> StateSlice(int s) const {
    const std::size_t block =
        static_cast<std::size_t>(num_actions_max) * num_actions_min;
    return {values.data() + s * block, block};
  }
};

// Discounted visitation d(s, a, b; rho) and its state marginal d(s; rho).
struct OccupancyMeasure {
  int num_states = 0;
  int num_actions_max = 0;
  int num_actions_min = 0;
  std::vector<double> state_action;
  std::vector<double> state_marginal;

  double operator()(int s, int a, int b) const {
    return state_action[(static_cast<std::size_t>(s) * num_actions_max + a) *
                            num_actions_min +
                        b];
  }
};

// Single-agent MDP obtained by freezing one player's policy. `actions` is the
// free player's action count; reward is [s][k], transition is [s][k][s'].
struct InducedMdp {
  int num_states = 0;
  int num_actions = 0;
  double gamma = 0.0;
  std::vector<double> reward;
  std::vector<double> transition;
};

// Marginalizes `frozen` out of the game. A frozen max-player policy yields
// the min player's MDP and vice versa.
InducedMdp InduceMdp(const MarkovGame& game, const StationaryPolicy& frozen);

struct MdpSolution {
  ValueVector values;
  // Greedy action per state, lowest index on ties.
  std::vector<int> greedy;
  int iterations = 0;
};

// Value iteration on `mdp` with the given per-(s,k) reward (overriding
// mdp.reward when non-empty). Stops once successive iterates differ by at
// most tol * (1 - gamma) / (2 * gamma) in sup norm.
MdpSolution SolveMdp(const InducedMdp& mdp, bool maximize, double tol,
                     std::span<const double> reward_override = {});

struct PolicyValue {
  ValueVector values;
  double at_rho = 0.0;
};

// Evaluates the product pair (mu, nu) by iterating V = r + gamma P V to
// sup-norm accuracy tol.
PolicyValue PolicyEvaluateProduct(const MarkovGame& game,
                                  const StationaryPolicy& mu,
                                  const StationaryPolicy& nu,
                                  const StateDistribution& rho, double tol);

struct BestResponseResult {
  StationaryPolicy policy;  // Deterministic.
  ValueVector values;       // V^{mu,*} or V^{*,nu}, accurate to tol.
};

// Best response to a frozen policy: minimizing for a frozen max-player
// policy, maximizing for a frozen min-player policy.
BestResponseResult BestResponse(const MarkovGame& game,
                                const StationaryPolicy& fixed, double tol);

// V^{*,nu_hat}(rho) - V^{mu_hat,*}(rho). At least -2 tol by weak duality.
double DualityGap(const MarkovGame& game, const StationaryPolicy& mu_hat,
                  const StationaryPolicy& nu_hat, const StateDistribution& rho,
                  double tol);

struct NashSolution {
  StationaryPolicy mu_star;
  StationaryPolicy nu_star;
  ValueVector v_star;
  int iterations = 0;
};

// Shapley value iteration with exact matrix-game solves per state. The
// returned values are within tol of V* in sup norm, and the extracted policy
// pair has duality gap at most a small multiple of tol.
NashSolution SolveNashExact(const MarkovGame& game, double tol);

// Dense linear solve for S <= kDenseOccupancyLimit, truncated power series
// otherwise.
inline constexpr int kDenseOccupancyLimit = 512;
OccupancyMeasure ComputeOccupancyMeasure(const MarkovGame& game,
                                         const StationaryPolicy& mu,
                                         const StationaryPolicy& nu,
                                         const StateDistribution& rho,
                                         double tol);

// Unilateral concentrability of d_b relative to the supplied equilibrium.
// With `clipped`, occupancies are capped at 1 / (S (A + B)) before dividing.
// 0/0 is 0; a positive numerator over zero mass yields kInfinity. Throws
// ValidationError if (mu_star, nu_star) has duality gap above 10 tol.
double Concentrability(const MarkovGame& game, const StateDistribution& rho,
                       const BehaviorDistribution& d_b,
                       const StationaryPolicy& mu_star,
                       const StationaryPolicy& nu_star, bool clipped,
                       double tol);

}  // namespace vilcb

#endif  // VILCB_GAME_MODEL_H_
