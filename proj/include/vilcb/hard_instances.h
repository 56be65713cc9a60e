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

#ifndef VILCB_HARD_INSTANCES_H_
#define VILCB_HARD_INSTANCES_H_

#include <vector>

#include "vilcb/game_model.h"

namespace vilcb {

// Which of the two continuation probabilities an action of the max player
// gets in state 0 when the min player picks b = 0.
enum class ThetaLevel { kP, kQ };

// Parameters of the two-level lower-bound family. State 0 pays reward 1 and
// is left for the absorbing zero-reward state 1 only when the min player
// plays b = 0, with stay probability p or q depending on the max player's
// action. States >= 2 are unreachable absorbing states.
struct HardInstanceSpec {
  int num_states = 2;
  int num_actions_max = 2;
  int num_actions_min = 2;
  double gamma = 0.8;
  double epsilon = 0.1;
  double c_clipped = 2.0;
  // Length A. Empty means the default split: the first ceil(A/2) actions
  // get p, the rest q.
  std::vector<ThetaLevel> theta;

  // gamma + 14 (1-gamma)^2 eps / gamma.
  double p() const;
  // gamma - 14 (1-gamma)^2 eps / gamma.
  double q() const;
  // theta with the default split applied.
  std::vector<ThetaLevel> ResolvedTheta() const;
};

// Throws ValidationError naming the violated bound.
void ValidateHardInstanceSpec(const HardInstanceSpec& spec);

struct HardInstance {
  MarkovGame game;
  StateDistribution rho;
  BehaviorDistribution d_b;
};

HardInstance BuildHardInstance(const HardInstanceSpec& spec);

// Closed-form V^{mu,nu}(0) given the max player's total mass on p-actions
// at state 0 and the min player's probability of b = 0 at state 0. Values
// at states >= 1 are zero.
double HardInstanceValue(const HardInstanceSpec& spec, double mu_p, double nu_0);

// 1 / (1 - gamma p).
double HardInstanceOptimalValue(const HardInstanceSpec& spec);

struct PolicyPair {
  StationaryPolicy mu;
  StationaryPolicy nu;
};

// mu* uniform over the p-actions in every state, nu* always b = 0.
PolicyPair HardInstanceNash(const HardInstanceSpec& spec);

// A policy pair with the given (mu_p, nu_0) at every state: mu_p spread
// evenly over p-actions and 1 - mu_p over q-actions; nu_0 on b = 0 and the
// remainder spread evenly over b >= 1.
PolicyPair HardInstancePolicies(const HardInstanceSpec& spec, double mu_p,
                                double nu_0);

}  // namespace vilcb

#endif  // VILCB_HARD_INSTANCES_H_
