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

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "test_util.h"
#include "vilcb/errors.h"
#include "vilcb/game_model.h"
#include "vilcb/hard_instances.h"
#include "vilcb/matrix_nash.h"

namespace vilcb {
namespace {

using testing::RandomGame;
using testing::RandomPolicy;
using testing::SupNorm;
using testing::UniformStates;

// Exact V^{mu,nu} by a dense solve of (I - gamma P) V = r.
std::vector<double> LinearSolveValue(const MarkovGame& game,
                                     const StationaryPolicy& mu,
                                     const StationaryPolicy& nu) {
  const int S = game.num_states();
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(S, S);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(S);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < game.num_actions_max(); ++a) {
      for (int b = 0; b < game.num_actions_min(); ++b) {
        const double w = mu(s, a) * nu(s, b);
        r(s) += w * game.r(s, a, b);
        const auto row = game.P(s, a, b);
        for (int t = 0; t < S; ++t) m(s, t) -= game.gamma() * w * row[t];
      }
    }
  }
  const Eigen::VectorXd v = m.partialPivLu().solve(r);
  return {v.data(), v.data() + S};
}

MarkovGame SingleStateGame(double reward, double gamma) {
  MarkovGame game(1, 1, 1, gamma);
  game.MutableP(0, 0, 0)[0] = 1.0;
  game.MutableR(0, 0, 0) = reward;
  return game;
}

TEST_CASE("validation catches broken invariants") {
  MarkovGame game = SingleStateGame(0.5, 0.9);
  CHECK_NOTHROW(ValidateGame(game));

  SUBCASE("non-stochastic row") {
    game.MutableP(0, 0, 0)[0] = 0.9;
    CHECK_THROWS_WITH_AS(ValidateGame(game),
                         doctest::Contains("row not stochastic at (0,0,0)"),
                         ValidationError);
  }
  SUBCASE("reward out of range") {
    game.MutableR(0, 0, 0) = 1.5;
    CHECK_THROWS_WITH_AS(ValidateGame(game),
                         doctest::Contains("reward out of [0,1]"),
                         ValidationError);
  }
  SUBCASE("bad discount") {
    MarkovGame bad(1, 1, 1, 1.0);
    bad.MutableP(0, 0, 0)[0] = 1.0;
    CHECK_THROWS_AS(ValidateGame(bad), ValidationError);
  }
  SUBCASE("policy on the wrong side") {
    const StationaryPolicy nu(Side::kMin, 1, 2);
    CHECK_THROWS_AS(ValidatePolicy(nu, game), ValidationError);
  }
}

TEST_CASE("policy evaluation on closed-form games") {
  const double tol = 1e-10;
  const MarkovGame one = SingleStateGame(1.0, 0.9);
  const StationaryPolicy mu(Side::kMax, 1, 1), nu(Side::kMin, 1, 1);
  const auto v = PolicyEvaluateProduct(one, mu, nu, UniformStates(1), tol);
  CHECK(std::abs(v.values[0] - 10.0) <= tol);

  const MarkovGame zero = SingleStateGame(0.0, 0.9);
  CHECK(PolicyEvaluateProduct(zero, mu, nu, UniformStates(1), tol).at_rho ==
        0.0);

  HardInstanceSpec spec;
  spec.num_actions_max = 4;
  const HardInstance hard = BuildHardInstance(spec);
  const PolicyPair pair = HardInstancePolicies(spec, 0.5, 1.0);
  const auto hv =
      PolicyEvaluateProduct(hard.game, pair.mu, pair.nu, hard.rho, tol);
  CHECK(std::abs(hv.at_rho - 1.0 / 0.36) <= tol);
  CHECK(std::abs(hv.values[1]) <= tol);
}

TEST_CASE("policy evaluation matches a dense linear solve") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const double gamma = 0.5 + 0.015 * trial;
    const MarkovGame game = RandomGame(rng, 5, 3, 2, gamma);
    const auto mu = RandomPolicy(rng, Side::kMax, 5, 3);
    const auto nu = RandomPolicy(rng, Side::kMin, 5, 2);
    const double tol = 1e-9;
    const auto v = PolicyEvaluateProduct(game, mu, nu, UniformStates(5), tol);
    CHECK(SupNorm(v.values, LinearSolveValue(game, mu, nu)) <= tol);
  }
}

TEST_CASE("best response beats random opponents") {
  std::mt19937_64 rng(4);
  const double tol = 1e-9;
  for (int trial = 0; trial < 5; ++trial) {
    const MarkovGame game = RandomGame(rng, 2, 2, 2, 0.9);
    const auto mu = RandomPolicy(rng, Side::kMax, 2, 2);
    const auto br = BestResponse(game, mu, tol);
    CHECK(br.policy.side() == Side::kMin);
    const auto br_exact = LinearSolveValue(game, mu, br.policy);
    CHECK(SupNorm(br.values, br_exact) <= tol);
    for (int k = 0; k < 100; ++k) {
      const auto nu = RandomPolicy(rng, Side::kMin, 2, 2);
      const auto v = LinearSolveValue(game, mu, nu);
      for (int s = 0; s < 2; ++s) CHECK(br.values[s] <= v[s] + tol);
    }
    const auto nu = RandomPolicy(rng, Side::kMin, 2, 2);
    const auto br_max = BestResponse(game, nu, tol);
    for (int k = 0; k < 100; ++k) {
      const auto other = RandomPolicy(rng, Side::kMax, 2, 2);
      const auto v = LinearSolveValue(game, other, nu);
      for (int s = 0; s < 2; ++s) CHECK(br_max.values[s] >= v[s] - tol);
    }
  }
}

TEST_CASE("best response in the hard instance plays b=0 at state 0") {
  HardInstanceSpec spec;
  spec.num_actions_max = 4;
  const HardInstance hard = BuildHardInstance(spec);
  std::mt19937_64 rng(8);
  for (int k = 0; k < 10; ++k) {
    const auto mu = RandomPolicy(rng, Side::kMax, 2, 4);
    const auto br = BestResponse(hard.game, mu, 1e-10);
    CHECK(br.policy(0, 0) == 1.0);
  }
}

TEST_CASE("single-action opponent makes the best response trivial") {
  std::mt19937_64 rng(2);
  const MarkovGame game = RandomGame(rng, 3, 2, 1, 0.8);
  const auto mu = RandomPolicy(rng, Side::kMax, 3, 2);
  const auto br = BestResponse(game, mu, 1e-10);
  const StationaryPolicy only(Side::kMin, 3, 1);
  CHECK(SupNorm(br.values, LinearSolveValue(game, mu, only)) <= 1e-10);
}

TEST_CASE("weak duality on random pairs") {
  std::mt19937_64 rng(13);
  const double tol = 1e-8;
  for (int trial = 0; trial < 40; ++trial) {
    const MarkovGame game = RandomGame(rng, 3, 2, 3, 0.85);
    const auto mu = RandomPolicy(rng, Side::kMax, 3, 2);
    const auto nu = RandomPolicy(rng, Side::kMin, 3, 3);
    CHECK(DualityGap(game, mu, nu, UniformStates(3), tol) >= -2 * tol);
    const auto lo = BestResponse(game, mu, tol).values;
    const auto hi = BestResponse(game, nu, tol).values;
    for (int s = 0; s < 3; ++s) CHECK(lo[s] <= hi[s] + 2 * tol);
  }
}

TEST_CASE("exact Nash solver") {
  const double tol = 1e-9;
  SUBCASE("hard instance") {
    HardInstanceSpec spec;
    spec.num_actions_max = 4;
    const HardInstance hard = BuildHardInstance(spec);
    const NashSolution ne = SolveNashExact(hard.game, tol);
    CHECK(std::abs(ne.v_star[0] - 1.0 / (1.0 - 0.8 * 0.87)) <= tol);
    CHECK(DualityGap(hard.game, ne.mu_star, ne.nu_star, hard.rho, tol) <=
          4 * tol);
    const PolicyPair known = HardInstanceNash(spec);
    CHECK(DualityGap(hard.game, known.mu, known.nu, hard.rho, tol) <= 2 * tol);
  }
  SUBCASE("constant reward") {
    std::mt19937_64 rng(1);
    MarkovGame game = RandomGame(rng, 4, 2, 2, 0.7);
    for (double& r : game.mutable_reward()) r = 0.3;
    const NashSolution ne = SolveNashExact(game, tol);
    for (double v : ne.v_star) CHECK(std::abs(v - 0.3 / 0.3) <= tol);
  }
  SUBCASE("one state reduces to a matrix game") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 10; ++trial) {
      MarkovGame game = RandomGame(rng, 1, 3, 4, 0.9);
      PayoffMatrix m(3, 4);
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 4; ++b) m(a, b) = game.r(0, a, b);
      }
      const double value = SolveMatrixNash(m, 1e-12).value;
      const NashSolution ne = SolveNashExact(game, tol);
      CHECK(std::abs(ne.v_star[0] - value / (1.0 - 0.9)) <= tol + 1e-10);
    }
  }
  SUBCASE("random games have small duality gap") {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 10; ++trial) {
      const MarkovGame game = RandomGame(rng, 4, 3, 3, 0.9);
      const NashSolution ne = SolveNashExact(game, 1e-7);
      const double gap =
          DualityGap(game, ne.mu_star, ne.nu_star, UniformStates(4), 1e-10);
      CHECK(gap <= 4e-7);
    }
  }
}

TEST_CASE("occupancy measure") {
  SUBCASE("single state") {
    const MarkovGame game = SingleStateGame(0.5, 0.9);
    const StationaryPolicy mu(Side::kMax, 1, 1), nu(Side::kMin, 1, 1);
    const auto d = ComputeOccupancyMeasure(game, mu, nu, UniformStates(1), 1e-12);
    CHECK(d.state_marginal[0] == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("two-state chain") {
    MarkovGame game(2, 1, 1, 0.5);
    game.MutableP(0, 0, 0)[1] = 1.0;
    game.MutableP(1, 0, 0)[1] = 1.0;
    const StationaryPolicy mu(Side::kMax, 2, 1), nu(Side::kMin, 2, 1);
    const auto d = ComputeOccupancyMeasure(
        game, mu, nu, StateDistribution::PointMass(2, 0), 1e-12);
    CHECK(std::abs(d.state_marginal[0] - 0.5) <= 1e-12);
    CHECK(std::abs(d.state_marginal[1] - 0.5) <= 1e-12);
  }
  SUBCASE("normalization and factorization") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
      const MarkovGame game = RandomGame(rng, 6, 2, 3, 0.95);
      const auto mu = RandomPolicy(rng, Side::kMax, 6, 2);
      const auto nu = RandomPolicy(rng, Side::kMin, 6, 3);
      const auto d = ComputeOccupancyMeasure(game, mu, nu, UniformStates(6), 1e-10);
      double total = 0.0;
      for (double x : d.state_action) total += x;
      CHECK(std::abs(total - 1.0) <= 1e-8);
      for (int s = 0; s < 6; ++s) {
        for (int a = 0; a < 2; ++a) {
          for (int b = 0; b < 3; ++b) {
            CHECK(std::abs(d(s, a, b) - d.state_marginal[s] * mu(s, a) *
                                            nu(s, b)) <= 1e-14);
          }
        }
      }
    }
  }
  SUBCASE("agrees with Monte-Carlo rollouts") {
    std::mt19937_64 rng(31);
    const int S = 4, A = 2, B = 2;
    const double gamma = 0.8;
    const MarkovGame game = RandomGame(rng, S, A, B, gamma);
    const auto mu = RandomPolicy(rng, Side::kMax, S, A);
    const auto nu = RandomPolicy(rng, Side::kMin, S, B);
    const auto rho = UniformStates(S);
    const auto d = ComputeOccupancyMeasure(game, mu, nu, rho, 1e-12);

    // Stop each step with probability 1 - gamma; the stopped triple is a
    // draw from d.
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto draw = [&](std::span<const double> p) {
      double u = unif(rng), acc = 0.0;
      for (std::size_t k = 0; k + 1 < p.size(); ++k) {
        acc += p[k];
        if (u < acc) return static_cast<int>(k);
      }
      return static_cast<int>(p.size()) - 1;
    };
    const int trajectories = 100000;
    std::vector<double> freq(game.num_triples(), 0.0);
    for (int n = 0; n < trajectories; ++n) {
      int s = draw(rho.probs);
      while (true) {
        const int a = draw(mu.At(s));
        const int b = draw(nu.At(s));
        if (unif(rng) >= gamma) {
          freq[game.TripleIndex(s, a, b)] += 1.0 / trajectories;
          break;
        }
        s = draw(game.P(s, a, b));
      }
    }
    for (int k = 0; k < game.num_triples(); ++k) {
      const double exact = d.state_action[k];
      const double se = std::sqrt(exact * (1 - exact) / trajectories);
      CHECK(std::abs(freq[k] - exact) <= 3 * se);
    }
  }
}

TEST_CASE("concentrability") {
  const double tol = 1e-10;
  SUBCASE("single triple") {
    const MarkovGame game = SingleStateGame(0.5, 0.9);
    const StationaryPolicy mu(Side::kMax, 1, 1), nu(Side::kMin, 1, 1);
    const BehaviorDistribution d_b{1, 1, 1, {1.0}};
    CHECK(Concentrability(game, UniformStates(1), d_b, mu, nu, false, tol) ==
          doctest::Approx(1.0));
    CHECK(Concentrability(game, UniformStates(1), d_b, mu, nu, true, tol) ==
          doctest::Approx(0.5));
  }
  SUBCASE("uncovered reachable triple is infinite") {
    MarkovGame game(1, 2, 1, 0.9);
    game.MutableP(0, 0, 0)[0] = 1.0;
    game.MutableP(0, 1, 0)[0] = 1.0;
    game.MutableR(0, 0, 0) = 1.0;
    const auto mu = StationaryPolicy::Deterministic(Side::kMax, 2, {0});
    const StationaryPolicy nu(Side::kMin, 1, 1);
    const BehaviorDistribution d_b{1, 2, 1, {1.0, 0.0}};
    CHECK(std::isinf(
        Concentrability(game, UniformStates(1), d_b, mu, nu, true, tol)));
  }
  SUBCASE("non-equilibrium pair is rejected") {
    MarkovGame game(1, 2, 1, 0.9);
    game.MutableP(0, 0, 0)[0] = 1.0;
    game.MutableP(0, 1, 0)[0] = 1.0;
    game.MutableR(0, 0, 0) = 1.0;
    const auto mu = StationaryPolicy::Deterministic(Side::kMax, 2, {1});
    const StationaryPolicy nu(Side::kMin, 1, 1);
    const BehaviorDistribution d_b{1, 2, 1, {0.5, 0.5}};
    CHECK_THROWS_AS(
        Concentrability(game, UniformStates(1), d_b, mu, nu, true, tol),
        ValidationError);
  }
  SUBCASE("clipped never exceeds unclipped") {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 10; ++trial) {
      const MarkovGame game = RandomGame(rng, 3, 2, 2, 0.8);
      const NashSolution ne = SolveNashExact(game, 1e-10);
      BehaviorDistribution d_b{3, 2, 2,
                               testing::RandomSimplex(rng, game.num_triples())};
      const double c = Concentrability(game, UniformStates(3), d_b, ne.mu_star,
                                       ne.nu_star, false, 1e-10);
      const double cc = Concentrability(game, UniformStates(3), d_b,
                                        ne.mu_star, ne.nu_star, true, 1e-10);
      CHECK(cc <= c + 1e-12);
      CHECK(cc >= 0.0);
    }
  }
}

}  // namespace
}  // namespace vilcb
