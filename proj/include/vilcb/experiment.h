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

#ifndef VILCB_EXPERIMENT_H_
#define VILCB_EXPERIMENT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vilcb/game_model.h"
#include "vilcb/hard_instances.h"
#include "vilcb/io.h"
#include "vilcb/vi_lcb.h"

namespace vilcb {

enum class Aggregate { kMean, kMedian };

// A sample-complexity sweep: for every N in `sample_sizes` and every seed
// index in [0, seeds_per_size), sample a dataset, run the pessimistic
// solver and score the returned pair on the true game.
struct SweepConfig {
  // Either a hard-instance spec or paths to game / rho / d_b JSON files.
  std::optional<HardInstanceSpec> hard_instance;
  std::string game_path;
  std::string rho_path;
  std::string d_b_path;

  std::vector<std::int64_t> sample_sizes;
  int seeds_per_size = 1;
  double c_b = kDefaultPenaltyConstant;
  double delta = kDefaultDelta;
  double planner_tol = 1e-8;
  double nash_tol = kDefaultInnerNashTol;
  std::uint64_t master_seed = 0;
  std::string output_path;
  // Worker threads; results never depend on this.
  int jobs = 1;
};

void ValidateSweepConfig(const SweepConfig& cfg);

Json SweepConfigToJson(const SweepConfig& cfg);
SweepConfig SweepConfigFromJson(const Json& j);

// "p,q,p" -> {kP, kQ, kP}.
std::vector<ThetaLevel> ParseTheta(const std::string& csv);
std::string ThetaToString(const std::vector<ThetaLevel>& theta);

// Game, initial distribution and behavior distribution a sweep runs on.
HardInstance ResolveInstance(const SweepConfig& cfg);

// Seed of cell (N, seed_index): Hash64({master_seed, N, seed_index}).
std::uint64_t CellSeed(std::uint64_t master_seed, std::int64_t num_samples,
                       int seed_index);

struct SweepRecord {
  std::int64_t num_samples = 0;
  int seed_index = 0;
  std::uint64_t cell_seed = 0;
  double gap = 0.0;        // v_star_nu - v_mu_star
  double v_star = 0.0;     // V*(rho)
  double v_mu_star = 0.0;  // V^{mu_hat,*}(rho)
  double v_star_nu = 0.0;  // V^{*,nu_hat}(rho)
  std::int64_t runtime_ms = 0;
};

// Cells are returned in (N, seed_index) lexicographic order.
std::vector<SweepRecord> RunSweep(const HardInstance& instance,
                                  const SweepConfig& cfg);

// Wall-clock runtimes are only written when `with_timing` is set, so that
// the default output is byte-reproducible.
std::string SweepToCsv(const std::vector<SweepRecord>& records,
                       bool with_timing);
std::vector<SweepRecord> SweepFromCsv(const std::string& csv);

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::int64_t> sample_sizes;
  std::vector<double> aggregated_gaps;
};

// Ordinary least squares of log(aggregate gap) on log N. Needs at least
// three distinct N with positive aggregate gap.
LogLogFit FitLogLogSlope(const std::vector<SweepRecord>& records,
                         Aggregate aggregate = Aggregate::kMean);

}  // namespace vilcb

#endif  // VILCB_EXPERIMENT_H_
