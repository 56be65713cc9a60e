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
#include <random>

#include "vilcb/errors.h"
#include "vilcb/game_model.h"
#include "vilcb/hard_instances.h"

namespace vilcb {
namespace {

HardInstanceSpec Spec(int S, int A, int B, double gamma, double eps, double c) {
  HardInstanceSpec spec;
  spec.num_states = S;
  spec.num_actions_max = A;
  spec.num_actions_min = B;
  spec.gamma = gamma;
  spec.epsilon = eps;
  spec.c_clipped = c;
  return spec;
}

std::vector<HardInstanceSpec> SpecFamily() {
  std::vector<HardInstanceSpec> specs{Spec(2, 4, 2, 0.8, 0.1, 2.0),
                                      Spec(3, 3, 2, 0.9, 0.2, 1.5),
                                      Spec(4, 2, 3, 2.0 / 3.0, 0.05, 3.0)};
  specs[1].theta = {ThetaLevel::kQ, ThetaLevel::kP, ThetaLevel::kQ};
  return specs;
}

TEST_CASE("levels and behavior distribution of the reference spec") {
  const HardInstanceSpec spec = Spec(2, 4, 2, 0.8, 0.1, 2.0);
  CHECK(spec.p() == doctest::Approx(0.87).epsilon(1e-14));
  CHECK(spec.q() == doctest::Approx(0.73).epsilon(1e-14));
  const auto theta = spec.ResolvedTheta();
  CHECK(theta == std::vector<ThetaLevel>{ThetaLevel::kP, ThetaLevel::kP,
                                         ThetaLevel::kQ, ThetaLevel::kQ});
  const HardInstance hard = BuildHardInstance(spec);
  double total = 0.0;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 2; ++b) {
      CHECK(hard.d_b(0, a, b) == doctest::Approx(1.0 / 24).epsilon(1e-14));
      CHECK(hard.d_b(1, a, b) == doctest::Approx(1.0 / 12).epsilon(1e-14));
      total += hard.d_b(0, a, b) + hard.d_b(1, a, b);
    }
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(hard.rho.probs == std::vector<double>{1.0, 0.0});
  CHECK_NOTHROW(ValidateGame(hard.game));
}

TEST_CASE("transition and reward structure") {
  const HardInstanceSpec spec = Spec(3, 2, 2, 0.8, 0.1, 2.0);
  const HardInstance hard = BuildHardInstance(spec);
  CHECK(hard.game.P(0, 0, 0)[0] == spec.p());
  CHECK(hard.game.P(0, 1, 0)[0] == spec.q());
  CHECK(hard.game.P(0, 0, 0)[1] == doctest::Approx(1 - spec.p()));
  CHECK(hard.game.P(0, 0, 1)[0] == 1.0);
  for (int s = 1; s < 3; ++s) {
    CHECK(hard.game.P(s, 1, 1)[s] == 1.0);
    CHECK(hard.game.r(s, 0, 0) == 0.0);
  }
  CHECK(hard.game.r(0, 1, 1) == 1.0);
  // Unreachable absorbing states carry no behavior mass.
  CHECK(hard.d_b(2, 0, 0) == 0.0);
}

TEST_CASE("spec validation") {
  SUBCASE("largest legal epsilon is accepted") {
    HardInstanceSpec spec = Spec(2, 2, 2, 0.8, 1.0 / (42 * 0.2), 2.0);
    CHECK_NOTHROW(ValidateHardInstanceSpec(spec));
    CHECK(spec.q() >= 0.5);
    CHECK(spec.p() <= 1.0);
  }
  SUBCASE("epsilon above the bound") {
    CHECK_THROWS_WITH_AS(
        ValidateHardInstanceSpec(Spec(2, 2, 2, 0.8, 0.2, 2.0)),
        doctest::Contains("eps"), ValidationError);
  }
  SUBCASE("clipped level below 2AB/(S(A+B))") {
    // 2 * 4 * 2 / (2 * 6) = 4/3.
    CHECK_NOTHROW(ValidateHardInstanceSpec(Spec(2, 4, 2, 0.8, 0.1, 4.0 / 3)));
    CHECK_THROWS_AS(ValidateHardInstanceSpec(Spec(2, 4, 2, 0.8, 0.1, 1.3)),
                    ValidationError);
  }
  SUBCASE("other bounds") {
    CHECK_THROWS_AS(ValidateHardInstanceSpec(Spec(1, 2, 2, 0.8, 0.1, 2.0)),
                    ValidationError);
    CHECK_THROWS_AS(ValidateHardInstanceSpec(Spec(2, 2, 2, 0.6, 0.1, 2.0)),
                    ValidationError);
    HardInstanceSpec all_q = Spec(2, 2, 2, 0.8, 0.1, 2.0);
    all_q.theta = {ThetaLevel::kQ, ThetaLevel::kQ};
    CHECK_THROWS_AS(ValidateHardInstanceSpec(all_q), ValidationError);
    HardInstanceSpec short_theta = Spec(2, 3, 2, 0.8, 0.1, 2.0);
    short_theta.theta = {ThetaLevel::kP};
    CHECK_THROWS_AS(ValidateHardInstanceSpec(short_theta), ValidationError);
  }
}

TEST_CASE("closed-form values") {
  const HardInstanceSpec spec = Spec(2, 4, 2, 0.8, 0.1, 2.0);
  CHECK(HardInstanceValue(spec, 1.0, 1.0) ==
        doctest::Approx(1.0 / (1.0 - 0.8 * 0.87)).epsilon(1e-14));
  CHECK(HardInstanceValue(spec, 0.3, 0.0) ==
        doctest::Approx(5.0).epsilon(1e-14));
  CHECK(HardInstanceValue(spec, 0.5, 1.0) ==
        doctest::Approx(1.0 / 0.36).epsilon(1e-14));
  CHECK(HardInstanceOptimalValue(spec) == HardInstanceValue(spec, 1.0, 1.0));
}

TEST_CASE("Nash pair structure") {
  const HardInstanceSpec spec = Spec(2, 4, 2, 0.8, 0.1, 2.0);
  const PolicyPair ne = HardInstanceNash(spec);
  for (int s = 0; s < 2; ++s) {
    CHECK(std::vector<double>(ne.mu.At(s).begin(), ne.mu.At(s).end()) ==
          std::vector<double>{0.5, 0.5, 0.0, 0.0});
    CHECK(ne.nu(s, 0) == 1.0);
    CHECK(ne.nu(s, 1) == 0.0);
  }
  HardInstanceSpec all_p = spec;
  all_p.theta.assign(4, ThetaLevel::kP);
  const PolicyPair uniform = HardInstanceNash(all_p);
  for (int a = 0; a < 4; ++a) CHECK(uniform.mu(0, a) == 0.25);
}

TEST_CASE("closed forms agree with iterative evaluation on a grid") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (const HardInstanceSpec& spec : SpecFamily()) {
    const HardInstance hard = BuildHardInstance(spec);
    for (int k = 0; k < 50; ++k) {
      const double mu_p = unif(rng), nu_0 = unif(rng);
      const PolicyPair pair = HardInstancePolicies(spec, mu_p, nu_0);
      const auto v =
          PolicyEvaluateProduct(hard.game, pair.mu, pair.nu, hard.rho, 1e-11);
      CHECK(std::abs(v.at_rho - HardInstanceValue(spec, mu_p, nu_0)) <= 1e-8);
      for (int s = 1; s < spec.num_states; ++s) {
        CHECK(std::abs(v.values[s]) <= 1e-11);
      }
    }
  }
}

TEST_CASE("the constructed pair is an equilibrium") {
  for (const HardInstanceSpec& spec : SpecFamily()) {
    const HardInstance hard = BuildHardInstance(spec);
    const PolicyPair ne = HardInstanceNash(spec);
    const double tol = 1e-10;
    CHECK(DualityGap(hard.game, ne.mu, ne.nu, hard.rho, tol) <= 2 * tol);
    const NashSolution exact = SolveNashExact(hard.game, tol);
    CHECK(std::abs(exact.v_star[0] - HardInstanceOptimalValue(spec)) <= tol);
  }
}

TEST_CASE("gap of a q-only policy matches the closed forms") {
  const HardInstanceSpec spec = Spec(2, 4, 2, 0.8, 0.1, 2.0);
  const HardInstance hard = BuildHardInstance(spec);
  const PolicyPair q_only = HardInstancePolicies(spec, 0.0, 1.0);
  const PolicyPair ne = HardInstanceNash(spec);
  const double tol = 1e-10;
  const double expected =
      HardInstanceValue(spec, 1.0, 1.0) - HardInstanceValue(spec, 0.0, 1.0);
  CHECK(std::abs(DualityGap(hard.game, q_only.mu, ne.nu, hard.rho, tol) -
                 expected) <= 2 * tol);
}

TEST_CASE("clipped concentrability round-trips") {
  for (const HardInstanceSpec& spec : SpecFamily()) {
    const HardInstance hard = BuildHardInstance(spec);
    const PolicyPair ne = HardInstanceNash(spec);
    const double clipped = Concentrability(hard.game, hard.rho, hard.d_b,
                                           ne.mu, ne.nu, true, 1e-10);
    const double full = Concentrability(hard.game, hard.rho, hard.d_b, ne.mu,
                                        ne.nu, false, 1e-10);
    CHECK(std::abs(clipped - spec.c_clipped) <= 1e-6);
    CHECK(clipped <= full + 1e-12);
  }
}

TEST_CASE("suboptimality grows at least 6 eps per unit of q-mass") {
  for (const HardInstanceSpec& base : SpecFamily()) {
    for (double frac : {0.1, 0.5, 1.0}) {
      HardInstanceSpec spec = base;
      spec.epsilon = frac / (42 * (1 - spec.gamma));
      const double v_star = HardInstanceOptimalValue(spec);
      for (int k = 0; k <= 20; ++k) {
        const double mu_p = k / 20.0;
        // The min player's best response keeps b = 0.
        const double v_br = HardInstanceValue(spec, mu_p, 1.0);
        CHECK(v_star - v_br >= 6 * spec.epsilon * (1 - mu_p) - 1e-12);
      }
    }
  }
}

}  // namespace
}  // namespace vilcb
