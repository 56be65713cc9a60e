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

#include "vilcb/vi_lcb.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "vilcb/errors.h"
#include "vilcb/matrix_nash.h"

namespace vilcb {

void ValidatePenaltyConfig(const PenaltyConfig& cfg) {
  if (!(cfg.c_b > 0.0)) throw ValidationError("C_b must be positive");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) {
    throw ValidationError("delta must lie in (0,1)");
  }
  if (cfg.num_samples < 1) throw ValidationError("N must be at least 1");
}

double LogFactor(const PenaltyConfig& cfg, double gamma) {
  return std::log(static_cast<double>(cfg.num_samples) /
                  ((1.0 - gamma) * cfg.delta));
}

int NumIterations(std::int64_t num_samples, double gamma) {
  if (num_samples < 1) throw ValidationError("N must be at least 1");
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw ValidationError("gamma must lie in (0,1)");
  }
  const double t = std::log(static_cast<double>(num_samples) / (1.0 - gamma)) /
                   std::log(1.0 / gamma);
  return std::max(1, static_cast<int>(std::ceil(t)));
}

double EmpiricalVariance(std::span<const double> p_row,
                         std::span<const double> v) {
  double mean = 0.0;
  double second = 0.0;
  for (std::size_t t = 0; t < p_row.size(); ++t) {
    mean += p_row[t] * v[t];
    second += p_row[t] * v[t] * v[t];
  }
  return std::max(0.0, second - mean * mean);
}

double PenaltyBeta(const EmpiricalModel& model, int s, int a, int b,
                   std::span<const double> v, const PenaltyConfig& cfg) {
  const double horizon = model.horizon();
  const double tail = 4.0 / static_cast<double>(cfg.num_samples);
  const std::int64_t n = model.count(s, a, b);
  if (n == 0) return horizon + tail;
  const double iota = LogFactor(cfg, model.gamma);
  const double scaled = cfg.c_b * iota / static_cast<double>(n);
  const double variance_term =
      std::sqrt(scaled * EmpiricalVariance(model.P(s, a, b), v));
  const double count_term = 2.0 * scaled * horizon;
  return std::min(std::max(variance_term, count_term), horizon) + tail;
}

StateEquilibria ValueOfQ(const QTensor& q, double nash_tol) {
  const int S = q.num_states;
  const int A = q.num_actions_max;
  const int B = q.num_actions_min;
  StateEquilibria eq{ValueVector(S, 0.0), StationaryPolicy(Side::kMax, S, A),
                     StationaryPolicy(Side::kMin, S, B)};
  for (int s = 0; s < S; ++s) {
    const MatrixView m{q.StateSlice(s), A, B};
    const NashCertificate cert = SolveMatrixNash(m, nash_tol);
    std::copy(cert.row_strategy.begin(), cert.row_strategy.end(),
              eq.mu.MutableAt(s).begin());
    std::copy(cert.col_strategy.begin(), cert.col_strategy.end(),
              eq.nu.MutableAt(s).begin());
    eq.values[s] = ExpectedPayoff(m, cert.row_strategy, cert.col_strategy);
  }
  return eq;
}

QTensor PessimisticBackup(Pessimism side, const EmpiricalModel& model,
                          std::span<const double> v, const PenaltyConfig& cfg) {
  const int S = model.num_states;
  const double gamma = model.gamma;
  const double horizon = model.horizon();
  QTensor out = QTensor::Filled(S, model.num_actions_max, model.num_actions_min,
                                0.0);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < model.num_actions_max; ++a) {
      for (int b = 0; b < model.num_actions_min; ++b) {
        const auto row = model.P(s, a, b);
        double next = 0.0;
        for (int t = 0; t < S; ++t) next += row[t] * v[t];
        const double target = model.r(s, a, b) + gamma * next;
        const double beta = PenaltyBeta(model, s, a, b, v, cfg);
        const double x = side == Pessimism::kLower ? target - beta
                                                   : target + beta;
        out(s, a, b) = std::clamp(x, 0.0, horizon);
      }
    }
  }
  return out;
}

QTensor PessimisticOperator(Pessimism side, const EmpiricalModel& model,
                            const QTensor& q, const PenaltyConfig& cfg,
                            double nash_tol) {
  ValidatePenaltyConfig(cfg);
  const ValueVector v = ValueOfQ(q, nash_tol).values;
  return PessimisticBackup(side, model, v, cfg);
}

namespace {

double SupDistance(const QTensor& x, const QTensor& y) {
  double d = 0.0;
  for (std::size_t k = 0; k < x.values.size(); ++k) {
    d = std::max(d, std::abs(x.values[k] - y.values[k]));
  }
  return d;
}

}  // namespace

SolveResult ViLcbGame(const EmpiricalModel& model, const PenaltyConfig& cfg,
                      double nash_tol) {
  ValidatePenaltyConfig(cfg);
  if (!(nash_tol > 0.0)) throw ValidationError("nash_tol must be positive");
  const int S = model.num_states;
  const int A = model.num_actions_max;
  const int B = model.num_actions_min;
  const double horizon = model.horizon();

  SolveResult result;
  result.iterations = NumIterations(cfg.num_samples, model.gamma);
  result.q_minus = QTensor::Filled(S, A, B, 0.0);
  result.q_plus = QTensor::Filled(S, A, B, horizon);
  StateEquilibria lower = ValueOfQ(result.q_minus, nash_tol);
  StateEquilibria upper = ValueOfQ(result.q_plus, nash_tol);

  for (int t = 1; t <= result.iterations; ++t) {
    QTensor q_minus =
        PessimisticBackup(Pessimism::kLower, model, lower.values, cfg);
    QTensor q_plus =
        PessimisticBackup(Pessimism::kUpper, model, upper.values, cfg);
    result.residuals.push_back(std::max(SupDistance(q_minus, result.q_minus),
                                        SupDistance(q_plus, result.q_plus)));
    result.q_minus = std::move(q_minus);
    result.q_plus = std::move(q_plus);
    lower = ValueOfQ(result.q_minus, nash_tol);
    upper = ValueOfQ(result.q_plus, nash_tol);
  }

  result.v_minus = std::move(lower.values);
  result.v_plus = std::move(upper.values);
  result.mu_hat = std::move(lower.mu);
  result.nu_hat = std::move(upper.nu);
  return result;
}

}  // namespace vilcb
