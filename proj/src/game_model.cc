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

#include "vilcb/game_model.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "vilcb/errors.h"
#include "vilcb/matrix_nash.h"

namespace vilcb {
namespace {

// Numerators at or below this are treated as exact zeros by
// Concentrability, so that 0/0 stays 0 despite round-off in the policies.
constexpr double kZeroOccupancy = 1e-12;

std::string Triple(int s, int a, int b) {
  std::ostringstream out;
  out << "(" << s << "," << a << "," << b << ")";
  return out.str();
}

void CheckTol(double tol, const char* where) {
  if (!(tol > 0.0)) {
    throw ValidationError(std::string(where) + ": tol must be positive");
  }
}

void CheckDistribution(std::span<const double> p, const std::string& what) {
  double total = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (!(p[k] >= 0.0) || !std::isfinite(p[k])) {
      std::ostringstream out;
      out << what << ": negative or non-finite entry " << p[k] << " at index "
          << k;
      throw ValidationError(out.str());
    }
    total += p[k];
  }
  if (std::abs(total - 1.0) > kProbabilityTol) {
    std::ostringstream out;
    out.precision(17);
    out << what << ": entries sum to " << total;
    throw ValidationError(out.str());
  }
}

// Iteration budget for value iteration with rewards bounded by `r_max`.
int IterationCap(double gamma, double tol, double r_max) {
  const double horizon = 1.0 / (1.0 - gamma);
  const double needed = std::log(tol * (1.0 - gamma) /
                                 (2.0 * gamma * std::max(1.0, r_max) * horizon)) /
                        std::log(gamma);
  return static_cast<int>(2.0 * std::max(needed, 1.0)) + 100;
}

double StoppingGap(double gamma, double tol) {
  return tol * (1.0 - gamma) / (2.0 * gamma);
}

double MaxAbs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// r^{mu,nu}(s) and row-major P^{mu,nu}(s, s').
struct ProductDynamics {
  std::vector<double> reward;
  std::vector<double> transition;
};

ProductDynamics MarginalizeProduct(const MarkovGame& game,
                                   const StationaryPolicy& mu,
                                   const StationaryPolicy& nu) {
  const int S = game.num_states();
  ProductDynamics dyn{std::vector<double>(S, 0.0),
                      std::vector<double>(static_cast<std::size_t>(S) * S, 0.0)};
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < game.num_actions_max(); ++a) {
      const double pa = mu(s, a);
      if (pa == 0.0) continue;
      for (int b = 0; b < game.num_actions_min(); ++b) {
        const double pab = pa * nu(s, b);
        if (pab == 0.0) continue;
        dyn.reward[s] += pab * game.r(s, a, b);
        const auto row = game.P(s, a, b);
        for (int t = 0; t < S; ++t) {
          dyn.transition[static_cast<std::size_t>(s) * S + t] += pab * row[t];
        }
      }
    }
  }
  return dyn;
}

void CheckPair(const MarkovGame& game, const StationaryPolicy& mu,
               const StationaryPolicy& nu) {
  if (mu.side() != Side::kMax || nu.side() != Side::kMin) {
    throw ValidationError("expected a (max-player, min-player) policy pair");
  }
  ValidatePolicy(mu, game);
  ValidatePolicy(nu, game);
}

}  // namespace

MarkovGame::MarkovGame(int num_states, int num_actions_max,
                       int num_actions_min, double gamma)
    : num_states_(num_states),
      num_actions_max_(num_actions_max),
      num_actions_min_(num_actions_min),
      gamma_(gamma) {
  if (num_states < 1 || num_actions_max < 1 || num_actions_min < 1) {
    throw ValidationError("game dimensions must be positive");
  }
  reward_.assign(static_cast<std::size_t>(num_triples()), 0.0);
  transition_.assign(static_cast<std::size_t>(num_triples()) * num_states, 0.0);
}

void ValidateGame(const MarkovGame& game) {
  const int S = game.num_states();
  const int A = game.num_actions_max();
  const int B = game.num_actions_min();
  if (S < 1 || A < 1 || B < 1) {
    throw ValidationError("game dimensions must be positive");
  }
  if (game.reward().size() != static_cast<std::size_t>(S) * A * B ||
      game.transition().size() != static_cast<std::size_t>(S) * A * B * S) {
    throw ValidationError("game tables do not match (S, A, B)");
  }
  if (!(game.gamma() > 0.0 && game.gamma() < 1.0)) {
    throw ValidationError("gamma must lie in (0,1), got " +
                          std::to_string(game.gamma()));
  }
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      for (int b = 0; b < B; ++b) {
        const auto row = game.P(s, a, b);
        double total = 0.0;
        for (int t = 0; t < S; ++t) {
          if (!(row[t] >= 0.0) || !std::isfinite(row[t])) {
            throw ValidationError("negative transition probability at " +
                                  Triple(s, a, b) + ": " +
                                  std::to_string(row[t]));
          }
          total += row[t];
        }
        if (std::abs(total - 1.0) > kProbabilityTol) {
          throw ValidationError("row not stochastic at " + Triple(s, a, b) +
                                ": sums to " + std::to_string(total));
        }
        const double r = game.r(s, a, b);
        if (!(r >= 0.0 && r <= 1.0)) {
          throw ValidationError("reward out of [0,1] at " + Triple(s, a, b) +
                                ": " + std::to_string(r));
        }
      }
    }
  }
}

StationaryPolicy::StationaryPolicy(Side side, int num_states, int num_actions)
    : side_(side),
      num_states_(num_states),
      num_actions_(num_actions),
      probs_(static_cast<std::size_t>(num_states) * num_actions,
             num_actions > 0 ? 1.0 / num_actions : 0.0) {
  if (num_states < 1 || num_actions < 1) {
    throw ValidationError("policy dimensions must be positive");
  }
}

StationaryPolicy StationaryPolicy::Deterministic(
    Side side, int num_actions, const std::vector<int>& actions) {
  StationaryPolicy policy(side, static_cast<int>(actions.size()), num_actions);
  for (int s = 0; s < policy.num_states(); ++s) {
    if (actions[s] < 0 || actions[s] >= num_actions) {
      throw ValidationError("action index out of range at state " +
                            std::to_string(s));
    }
    auto row = policy.MutableAt(s);
    std::fill(row.begin(), row.end(), 0.0);
    row[actions[s]] = 1.0;
  }
  return policy;
}

void ValidatePolicy(const StationaryPolicy& policy, const MarkovGame& game) {
  const int expected = policy.side() == Side::kMax ? game.num_actions_max()
                                                   : game.num_actions_min();
  if (policy.num_states() != game.num_states() ||
      policy.num_actions() != expected) {
    throw ValidationError("policy dimensions do not match the game");
  }
  for (int s = 0; s < policy.num_states(); ++s) {
    CheckDistribution(policy.At(s), "policy row " + std::to_string(s));
  }
}

StateDistribution StateDistribution::PointMass(int num_states, int s) {
  StateDistribution rho{std::vector<double>(num_states, 0.0)};
  rho.probs.at(s) = 1.0;
  return rho;
}

void ValidateStateDistribution(const StateDistribution& rho,
                               const MarkovGame& game) {
  if (static_cast<int>(rho.probs.size()) != game.num_states()) {
    throw ValidationError("state distribution has wrong length");
  }
  CheckDistribution(rho.probs, "state distribution");
}

void ValidateBehaviorDistribution(const BehaviorDistribution& d_b,
                                  const MarkovGame& game) {
  if (d_b.num_states != game.num_states() ||
      d_b.num_actions_max != game.num_actions_max() ||
      d_b.num_actions_min != game.num_actions_min() ||
      d_b.probs.size() != static_cast<std::size_t>(game.num_triples())) {
    throw ValidationError("behavior distribution does not match the game");
  }
  CheckDistribution(d_b.probs, "behavior distribution");
}

QTensor QTensor::Filled(int num_states, int num_actions_max,
                        int num_actions_min, double value) {
  return {num_states, num_actions_max, num_actions_min,
          std::vector<double>(
              static_cast<std::size_t>(num_states) * num_actions_max *
                  num_actions_min,
              value)};
}

InducedMdp InduceMdp(const MarkovGame& game, const StationaryPolicy& frozen) {
  ValidatePolicy(frozen, game);
  const int S = game.num_states();
  const bool frozen_max = frozen.side() == Side::kMax;
  const int free_actions =
      frozen_max ? game.num_actions_min() : game.num_actions_max();
  const int frozen_actions = frozen.num_actions();

  InducedMdp mdp;
  mdp.num_states = S;
  mdp.num_actions = free_actions;
  mdp.gamma = game.gamma();
  mdp.reward.assign(static_cast<std::size_t>(S) * free_actions, 0.0);
  mdp.transition.assign(static_cast<std::size_t>(S) * free_actions * S, 0.0);
  for (int s = 0; s < S; ++s) {
    for (int k = 0; k < free_actions; ++k) {
      const std::size_t sk = static_cast<std::size_t>(s) * free_actions + k;
      for (int f = 0; f < frozen_actions; ++f) {
        const double pf = frozen(s, f);
        if (pf == 0.0) continue;
        const int a = frozen_max ? f : k;
        const int b = frozen_max ? k : f;
        mdp.reward[sk] += pf * game.r(s, a, b);
        const auto row = game.P(s, a, b);
        for (int t = 0; t < S; ++t) mdp.transition[sk * S + t] += pf * row[t];
      }
    }
  }
  return mdp;
}

MdpSolution SolveMdp(const InducedMdp& mdp, bool maximize, double tol,
                     std::span<const double> reward_override) {
  CheckTol(tol, "SolveMdp");
  const int S = mdp.num_states;
  const int K = mdp.num_actions;
  const std::span<const double> reward =
      reward_override.empty() ? std::span<const double>(mdp.reward)
                              : reward_override;
  if (reward.size() != static_cast<std::size_t>(S) * K) {
    throw ValidationError("MDP reward override has wrong size");
  }
  const double gamma = mdp.gamma;
  const double stop = StoppingGap(gamma, tol);
  const int cap = IterationCap(gamma, tol, MaxAbs(reward));

  auto q_value = [&](const ValueVector& v, int s, int k) {
    const std::size_t sk = static_cast<std::size_t>(s) * K + k;
    double acc = 0.0;
    const double* row = mdp.transition.data() + sk * S;
    for (int t = 0; t < S; ++t) acc += row[t] * v[t];
    return reward[sk] + gamma * acc;
  };

  MdpSolution sol;
  ValueVector v(S, 0.0), next(S, 0.0);
  for (int it = 1;; ++it) {
    double diff = 0.0;
    for (int s = 0; s < S; ++s) {
      double best = q_value(v, s, 0);
      for (int k = 1; k < K; ++k) {
        const double q = q_value(v, s, k);
        best = maximize ? std::max(best, q) : std::min(best, q);
      }
      next[s] = best;
      diff = std::max(diff, std::abs(next[s] - v[s]));
    }
    v.swap(next);
    if (diff <= stop) {
      sol.iterations = it;
      break;
    }
    if (it >= cap) {
      throw NumericalError("value iteration did not converge in " +
                           std::to_string(cap) + " iterations");
    }
  }
  sol.greedy.assign(S, 0);
  for (int s = 0; s < S; ++s) {
    double best = q_value(v, s, 0);
    for (int k = 1; k < K; ++k) {
      const double q = q_value(v, s, k);
      if (maximize ? q > best : q < best) {
        best = q;
        sol.greedy[s] = k;
      }
    }
  }
  sol.values = std::move(v);
  return sol;
}

PolicyValue PolicyEvaluateProduct(const MarkovGame& game,
                                  const StationaryPolicy& mu,
                                  const StationaryPolicy& nu,
                                  const StateDistribution& rho, double tol) {
  CheckTol(tol, "PolicyEvaluateProduct");
  CheckPair(game, mu, nu);
  ValidateStateDistribution(rho, game);
  const int S = game.num_states();
  const double gamma = game.gamma();
  const ProductDynamics dyn = MarginalizeProduct(game, mu, nu);
  const double stop = StoppingGap(gamma, tol);
  const int cap = IterationCap(gamma, tol, MaxAbs(dyn.reward));

  ValueVector v(S, 0.0), next(S, 0.0);
  for (int it = 1;; ++it) {
    double diff = 0.0;
    for (int s = 0; s < S; ++s) {
      double acc = 0.0;
      const double* row = dyn.transition.data() + static_cast<std::size_t>(s) * S;
      for (int t = 0; t < S; ++t) acc += row[t] * v[t];
      next[s] = dyn.reward[s] + gamma * acc;
      diff = std::max(diff, std::abs(next[s] - v[s]));
    }
    v.swap(next);
    if (diff <= stop) break;
    if (it >= cap) {
      throw NumericalError("policy evaluation did not converge");
    }
  }
  PolicyValue out;
  for (int s = 0; s < S; ++s) out.at_rho += rho[s] * v[s];
  out.values = std::move(v);
  return out;
}

BestResponseResult BestResponse(const MarkovGame& game,
                                const StationaryPolicy& fixed, double tol) {
  CheckTol(tol, "BestResponse");
  const InducedMdp mdp = InduceMdp(game, fixed);
  // Against a frozen max player the responder minimizes.
  const bool maximize = fixed.side() == Side::kMin;
  MdpSolution sol = SolveMdp(mdp, maximize, tol);
  const Side responder = maximize ? Side::kMax : Side::kMin;
  return {StationaryPolicy::Deterministic(responder, mdp.num_actions, sol.greedy),
          std::move(sol.values)};
}

double DualityGap(const MarkovGame& game, const StationaryPolicy& mu_hat,
                  const StationaryPolicy& nu_hat, const StateDistribution& rho,
                  double tol) {
  CheckPair(game, mu_hat, nu_hat);
  ValidateStateDistribution(rho, game);
  const ValueVector v_mu_star = BestResponse(game, mu_hat, tol).values;
  const ValueVector v_star_nu = BestResponse(game, nu_hat, tol).values;
  double gap = 0.0;
  for (int s = 0; s < game.num_states(); ++s) {
    gap += rho[s] * (v_star_nu[s] - v_mu_star[s]);
  }
  return gap;
}

NashSolution SolveNashExact(const MarkovGame& game, double tol) {
  CheckTol(tol, "SolveNashExact");
  ValidateGame(game);
  const int S = game.num_states();
  const int A = game.num_actions_max();
  const int B = game.num_actions_min();
  const double gamma = game.gamma();
  // Tighter than tol so that the greedy pair, not just the values, is
  // tol-accurate: a Q error of e costs up to 2e/(1-gamma) per player.
  const double q_tol = tol * (1.0 - gamma) / 4.0;
  const double stop = StoppingGap(gamma, q_tol);
  const double nash_tol = tol * (1.0 - gamma) / 8.0;
  const int cap = IterationCap(gamma, q_tol, 1.0);

  QTensor q = QTensor::LikeGame(game, 0.0);
  QTensor next = q;
  ValueVector v(S, 0.0);
  NashSolution out;
  for (int it = 1;; ++it) {
    for (int s = 0; s < S; ++s) {
      v[s] = SolveMatrixNash(MatrixView{q.StateSlice(s), A, B}, nash_tol).value;
    }
    double diff = 0.0;
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        for (int b = 0; b < B; ++b) {
          const auto row = game.P(s, a, b);
          double acc = 0.0;
          for (int t = 0; t < S; ++t) acc += row[t] * v[t];
          next(s, a, b) = game.r(s, a, b) + gamma * acc;
          diff = std::max(diff, std::abs(next(s, a, b) - q(s, a, b)));
        }
      }
    }
    std::swap(q, next);
    if (diff <= stop) {
      out.iterations = it;
      break;
    }
    if (it >= cap) throw NumericalError("Shapley iteration did not converge");
  }

  out.mu_star = StationaryPolicy(Side::kMax, S, A);
  out.nu_star = StationaryPolicy(Side::kMin, S, B);
  out.v_star.assign(S, 0.0);
  for (int s = 0; s < S; ++s) {
    const NashCertificate cert =
        SolveMatrixNash(MatrixView{q.StateSlice(s), A, B}, nash_tol);
    std::copy(cert.row_strategy.begin(), cert.row_strategy.end(),
              out.mu_star.MutableAt(s).begin());
    std::copy(cert.col_strategy.begin(), cert.col_strategy.end(),
              out.nu_star.MutableAt(s).begin());
    out.v_star[s] = cert.value;
  }
  return out;
}

OccupancyMeasure ComputeOccupancyMeasure(const MarkovGame& game,
                                         const StationaryPolicy& mu,
                                         const StationaryPolicy& nu,
                                         const StateDistribution& rho,
                                         double tol) {
  CheckTol(tol, "ComputeOccupancyMeasure");
  CheckPair(game, mu, nu);
  ValidateStateDistribution(rho, game);
  const int S = game.num_states();
  const int A = game.num_actions_max();
  const int B = game.num_actions_min();
  const double gamma = game.gamma();
  const ProductDynamics dyn = MarginalizeProduct(game, mu, nu);

  std::vector<double> marginal(S, 0.0);
  if (S <= kDenseOccupancyLimit) {
    // (I - gamma P)' d = (1 - gamma) rho
    Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(S, S);
    Eigen::VectorXd rhs(S);
    for (int s = 0; s < S; ++s) {
      rhs(s) = (1.0 - gamma) * rho[s];
      for (int t = 0; t < S; ++t) {
        lhs(t, s) -= gamma * dyn.transition[static_cast<std::size_t>(s) * S + t];
      }
    }
    const Eigen::VectorXd d = lhs.partialPivLu().solve(rhs);
    for (int s = 0; s < S; ++s) marginal[s] = std::max(0.0, d(s));
  } else {
    // The l1 mass beyond step T is gamma^T.
    std::vector<double> dist = rho.probs, next(S);
    double weight = 1.0 - gamma;
    double tail = 1.0 / (1.0 - gamma);
    while (tail > tol) {
      for (int s = 0; s < S; ++s) marginal[s] += weight * dist[s];
      std::fill(next.begin(), next.end(), 0.0);
      for (int s = 0; s < S; ++s) {
        if (dist[s] == 0.0) continue;
        const double* row = dyn.transition.data() + static_cast<std::size_t>(s) * S;
        for (int t = 0; t < S; ++t) next[t] += dist[s] * row[t];
      }
      dist.swap(next);
      weight *= gamma;
      tail *= gamma;
    }
  }

  OccupancyMeasure occ{S, A, B,
                       std::vector<double>(static_cast<std::size_t>(S) * A * B),
                       marginal};
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      for (int b = 0; b < B; ++b) {
        occ.state_action[game.TripleIndex(s, a, b)] =
            marginal[s] * mu(s, a) * nu(s, b);
      }
    }
  }
  return occ;
}

double Concentrability(const MarkovGame& game, const StateDistribution& rho,
                       const BehaviorDistribution& d_b,
                       const StationaryPolicy& mu_star,
                       const StationaryPolicy& nu_star, bool clipped,
                       double tol) {
  CheckTol(tol, "Concentrability");
  ValidateGame(game);
  ValidateBehaviorDistribution(d_b, game);
  const double gap = DualityGap(game, mu_star, nu_star, rho, tol);
  if (gap > 10.0 * tol) {
    throw ValidationError("supplied policy pair is not a Nash equilibrium "
                          "(duality gap " + std::to_string(gap) + ")");
  }
  const int S = game.num_states();
  const int A = game.num_actions_max();
  const int B = game.num_actions_min();
  const double clip = 1.0 / (static_cast<double>(S) * (A + B));

  double worst = 0.0;
  auto consider = [&](double occupancy, double mass) {
    if (clipped) occupancy = std::min(occupancy, clip);
    if (occupancy <= kZeroOccupancy) return;
    worst = mass > 0.0 ? std::max(worst, occupancy / mass) : kInfinity;
  };

  // sup over one player's policies of d(s, x) is (1 - gamma) times the
  // optimal value of the induced MDP with reward 1{(s', x') = (s, x)}.
  auto sup_occupancy = [&](const InducedMdp& mdp, int s, int x) {
    std::vector<double> indicator(
        static_cast<std::size_t>(mdp.num_states) * mdp.num_actions, 0.0);
    indicator[static_cast<std::size_t>(s) * mdp.num_actions + x] = 1.0;
    const MdpSolution sol = SolveMdp(mdp, /*maximize=*/true, tol, indicator);
    double at_rho = 0.0;
    for (int t = 0; t < S; ++t) at_rho += rho[t] * sol.values[t];
    return (1.0 - game.gamma()) * at_rho;
  };

  // Max player deviates against nu_star.
  const InducedMdp max_mdp = InduceMdp(game, nu_star);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      const double d_sa = sup_occupancy(max_mdp, s, a);
      for (int b = 0; b < B; ++b) consider(nu_star(s, b) * d_sa, d_b(s, a, b));
    }
  }
  // Min player deviates against mu_star.
  const InducedMdp min_mdp = InduceMdp(game, mu_star);
  for (int s = 0; s < S; ++s) {
    for (int b = 0; b < B; ++b) {
      const double d_sb = sup_occupancy(min_mdp, s, b);
      for (int a = 0; a < A; ++a) consider(mu_star(s, a) * d_sb, d_b(s, a, b));
    }
  }
  return worst;
}

}  // namespace vilcb
