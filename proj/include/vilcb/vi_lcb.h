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

#ifndef VILCB_VI_LCB_H_
#define VILCB_VI_LCB_H_

#include <cstdint>
#include <span>
#include <vector>

#include "vilcb/game_model.h"
#include "vilcb/offline_data.h"

namespace vilcb {

inline constexpr double kDefaultPenaltyConstant = 4.0;
inline constexpr double kDefaultDelta = 0.1;
inline constexpr double kDefaultInnerNashTol = 1e-8;

// Bernstein penalty parameters. `num_samples` is the dataset size N that
// enters both the log factor and the additive 4/N term.
struct PenaltyConfig {
  double c_b = kDefaultPenaltyConstant;
  double delta = kDefaultDelta;
  std::int64_t num_samples = 1;
};

void ValidatePenaltyConfig(const PenaltyConfig& cfg);

// log(N / ((1 - gamma) delta)).
double LogFactor(const PenaltyConfig& cfg, double gamma);

// Number of pessimistic value-iteration rounds:
// ceil(log(N / (1 - gamma)) / log(1 / gamma)).
int NumIterations(std::int64_t num_samples, double gamma);

// p.V^2 - (p.V)^2, floored at zero.
double EmpiricalVariance(std::span<const double> p_row,
                         std::span<const double> v);

// Bernstein-style penalty for one triple:
//   min{ max{ sqrt(c_b * iota / n * Var), 2 c_b iota / ((1-gamma) n) },
//        1/(1-gamma) } + 4/N
// where n = N(s,a,b) and iota = LogFactor(cfg, gamma). An unvisited triple
// takes the capped branch, giving 1/(1-gamma) + 4/N.
double PenaltyBeta(const EmpiricalModel& model, int s, int a, int b,
                   std::span<const double> v, const PenaltyConfig& cfg);

// Per-state equilibrium of Q(s, ., .).
struct StateEquilibria {
  ValueVector values;  // w' Q(s) z for the certified pair.
  StationaryPolicy mu;
  StationaryPolicy nu;
};

StateEquilibria ValueOfQ(const QTensor& q, double nash_tol);

enum class Pessimism { kLower, kUpper };

// One application of the lower (max-player) or upper (min-player)
// pessimistic Bellman operator. Outputs are clipped into [0, 1/(1-gamma)].
QTensor PessimisticOperator(Pessimism side, const EmpiricalModel& model,
                            const QTensor& q, const PenaltyConfig& cfg,
                            double nash_tol);

// Same operator given the already-computed state values V of the input Q.
QTensor PessimisticBackup(Pessimism side, const EmpiricalModel& model,
                          std::span<const double> v, const PenaltyConfig& cfg);

struct SolveResult {
  QTensor q_minus;
  QTensor q_plus;
  ValueVector v_minus;
  ValueVector v_plus;
  StationaryPolicy mu_hat;  // max-player policy of the lower recursion
  StationaryPolicy nu_hat;  // min-player policy of the upper recursion
  int iterations = 0;
  // Per round: max(|Q-_t - Q-_{t-1}|_inf, |Q+_t - Q+_{t-1}|_inf).
  std::vector<double> residuals;
};

// Runs both pessimistic recursions for NumIterations(N, gamma) rounds from
// Q- = 0 and Q+ = 1/(1-gamma). The recursions never read each other; the
// output pairs the max player's policy from the lower recursion with the
// min player's policy from the upper one.
SolveResult ViLcbGame(const EmpiricalModel& model, const PenaltyConfig& cfg,
                      double nash_tol = kDefaultInnerNashTol);

}  // namespace vilcb

#endif  // VILCB_VI_LCB_H_
