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

#include "vilcb/hard_instances.h"

#include <algorithm>
#include <string>

#include "vilcb/errors.h"

namespace vilcb {

double HardInstanceSpec::p() const {
  return gamma + 14.0 * (1.0 - gamma) * (1.0 - gamma) * epsilon / gamma;
}

double HardInstanceSpec::q() const {
  return gamma - 14.0 * (1.0 - gamma) * (1.0 - gamma) * epsilon / gamma;
}

std::vector<ThetaLevel> HardInstanceSpec::ResolvedTheta() const {
  if (!theta.empty()) return theta;
  std::vector<ThetaLevel> out(num_actions_max, ThetaLevel::kQ);
  const int num_p = (num_actions_max + 1) / 2;
  std::fill(out.begin(), out.begin() + num_p, ThetaLevel::kP);
  return out;
}

void ValidateHardInstanceSpec(const HardInstanceSpec& spec) {
  const int S = spec.num_states;
  const int A = spec.num_actions_max;
  const int B = spec.num_actions_min;
  if (S < 2 || A < 2 || B < 2) {
    throw ValidationError("hard instance needs S >= 2, A >= 2, B >= 2");
  }
  if (!(spec.gamma >= 2.0 / 3.0 && spec.gamma < 1.0)) {
    throw ValidationError("hard instance needs gamma in [2/3, 1)");
  }
  const double eps_max = 1.0 / (42.0 * (1.0 - spec.gamma));
  if (!(spec.epsilon > 0.0 && spec.epsilon <= eps_max * (1.0 + 1e-12))) {
    throw ValidationError("epsilon must lie in (0, 1/(42(1-gamma))] = (0, " +
                          std::to_string(eps_max) + "]");
  }
  const double c_min = 2.0 * A * B / (static_cast<double>(S) * (A + B));
  if (!(spec.c_clipped >= c_min * (1.0 - 1e-12))) {
    throw ValidationError("c_clipped must be at least 2AB/(S(A+B)) = " +
                          std::to_string(c_min));
  }
  if (!spec.theta.empty() && static_cast<int>(spec.theta.size()) != A) {
    throw ValidationError("theta must have one entry per max-player action");
  }
  const auto theta = spec.ResolvedTheta();
  if (std::none_of(theta.begin(), theta.end(),
                   [](ThetaLevel t) { return t == ThetaLevel::kP; })) {
    throw ValidationError("theta needs at least one p-action");
  }
  // Rounding slack so the largest legal epsilon at gamma = 2/3 passes.
  if (!(spec.q() >= 0.5 - 1e-12 && spec.q() < spec.p() &&
        spec.p() <= 1.0 + 1e-12)) {
    throw ValidationError("p and q fall outside 1/2 <= q < p <= 1");
  }
}

HardInstance BuildHardInstance(const HardInstanceSpec& spec) {
  ValidateHardInstanceSpec(spec);
  const int S = spec.num_states;
  const int A = spec.num_actions_max;
  const int B = spec.num_actions_min;
  const auto theta = spec.ResolvedTheta();
  const double p = spec.p();
  const double q = spec.q();

  HardInstance inst{MarkovGame(S, A, B, spec.gamma),
                    StateDistribution::PointMass(S, 0),
                    BehaviorDistribution{S, A, B, {}}};
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      for (int b = 0; b < B; ++b) {
        auto row = inst.game.MutableP(s, a, b);
        if (s == 0 && b == 0) {
          const double stay = theta[a] == ThetaLevel::kP ? p : q;
          row[0] = stay;
          row[1] = 1.0 - stay;
        } else {
          row[s] = 1.0;
        }
        inst.game.MutableR(s, a, b) = s == 0 ? 1.0 : 0.0;
      }
    }
  }

  const double per_state0 =
      1.0 / (spec.c_clipped * S * static_cast<double>(A + B));
  const double per_state1 =
      (1.0 - A * B * per_state0) / static_cast<double>(A * B);
  inst.d_b.probs.assign(static_cast<std::size_t>(S) * A * B, 0.0);
  for (int a = 0; a < A; ++a) {
    for (int b = 0; b < B; ++b) {
      inst.d_b.probs[inst.game.TripleIndex(0, a, b)] = per_state0;
      inst.d_b.probs[inst.game.TripleIndex(1, a, b)] = per_state1;
    }
  }
  return inst;
}

double HardInstanceValue(const HardInstanceSpec& spec, double mu_p,
                         double nu_0) {
  ValidateHardInstanceSpec(spec);
  const double g = spec.gamma;
  return 1.0 / (1.0 - g + g * mu_p * nu_0 * (1.0 - spec.p()) +
                g * (1.0 - mu_p) * nu_0 * (1.0 - spec.q()));
}

double HardInstanceOptimalValue(const HardInstanceSpec& spec) {
  ValidateHardInstanceSpec(spec);
  return 1.0 / (1.0 - spec.gamma * spec.p());
}

PolicyPair HardInstancePolicies(const HardInstanceSpec& spec, double mu_p,
                                double nu_0) {
  ValidateHardInstanceSpec(spec);
  if (!(mu_p >= 0.0 && mu_p <= 1.0 && nu_0 >= 0.0 && nu_0 <= 1.0)) {
    throw ValidationError("mu_p and nu_0 must lie in [0,1]");
  }
  const int S = spec.num_states;
  const int A = spec.num_actions_max;
  const int B = spec.num_actions_min;
  const auto theta = spec.ResolvedTheta();
  const int num_p = static_cast<int>(
      std::count(theta.begin(), theta.end(), ThetaLevel::kP));
  const int num_q = A - num_p;
  if (num_q == 0 && mu_p < 1.0) {
    throw ValidationError("mu_p < 1 needs at least one q-action");
  }

  PolicyPair pair{StationaryPolicy(Side::kMax, S, A),
                  StationaryPolicy(Side::kMin, S, B)};
  for (int s = 0; s < S; ++s) {
    auto mu = pair.mu.MutableAt(s);
    for (int a = 0; a < A; ++a) {
      mu[a] = theta[a] == ThetaLevel::kP ? mu_p / num_p
                                         : (1.0 - mu_p) / num_q;
    }
    auto nu = pair.nu.MutableAt(s);
    nu[0] = nu_0;
    for (int b = 1; b < B; ++b) nu[b] = (1.0 - nu_0) / (B - 1);
  }
  return pair;
}

PolicyPair HardInstanceNash(const HardInstanceSpec& spec) {
  return HardInstancePolicies(spec, 1.0, 1.0);
}

}  // namespace vilcb
