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

#include "vilcb/experiment.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>
#include <thread>

#include "vilcb/errors.h"
#include "vilcb/offline_data.h"
#include "vilcb/rng.h"

namespace vilcb {
namespace {

double Dot(std::span<const double> x, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) acc += x[k] * y[k];
  return acc;
}

SweepRecord RunCell(const HardInstance& inst, const SweepConfig& cfg,
                    double v_star, std::int64_t n, int seed_index) {
  const auto start = std::chrono::steady_clock::now();
  SweepRecord rec;
  rec.num_samples = n;
  rec.seed_index = seed_index;
  rec.cell_seed = CellSeed(cfg.master_seed, n, seed_index);
  rec.v_star = v_star;

  const Dataset data = SampleDataset(inst.game, inst.d_b, n, rec.cell_seed);
  const EmpiricalModel model = BuildEmpiricalModel(data, inst.game);
  const PenaltyConfig penalty{cfg.c_b, cfg.delta, n};
  const SolveResult solved = ViLcbGame(model, penalty, cfg.nash_tol);

  rec.v_mu_star = Dot(inst.rho.probs,
                      BestResponse(inst.game, solved.mu_hat, cfg.planner_tol).values);
  rec.v_star_nu = Dot(inst.rho.probs,
                      BestResponse(inst.game, solved.nu_hat, cfg.planner_tol).values);
  rec.gap = rec.v_star_nu - rec.v_mu_star;
  rec.runtime_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return rec;
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  return out;
}

}  // namespace

void ValidateSweepConfig(const SweepConfig& cfg) {
  if (cfg.sample_sizes.empty()) {
    throw ValidationError("sample_sizes must be non-empty");
  }
  for (std::size_t k = 0; k < cfg.sample_sizes.size(); ++k) {
    if (cfg.sample_sizes[k] < 1) {
      throw ValidationError("sample sizes must be positive");
    }
    if (k > 0 && cfg.sample_sizes[k] <= cfg.sample_sizes[k - 1]) {
      throw ValidationError("sample_sizes must be strictly increasing");
    }
  }
  if (cfg.seeds_per_size < 1) {
    throw ValidationError("seeds_per_size must be at least 1");
  }
  if (!(cfg.planner_tol > 0.0) || !(cfg.nash_tol > 0.0)) {
    throw ValidationError("tolerances must be positive");
  }
  if (cfg.jobs < 1) throw ValidationError("jobs must be at least 1");
  ValidatePenaltyConfig({cfg.c_b, cfg.delta, 1});
  if (!cfg.hard_instance &&
      (cfg.game_path.empty() || cfg.rho_path.empty() || cfg.d_b_path.empty())) {
    throw ValidationError(
        "sweep needs a hard instance or game, rho and d_b paths");
  }
}

std::vector<ThetaLevel> ParseTheta(const std::string& csv) {
  std::vector<ThetaLevel> theta;
  std::istringstream in(csv);
  std::string token;
  while (std::getline(in, token, ',')) {
    if (token == "p") {
      theta.push_back(ThetaLevel::kP);
    } else if (token == "q") {
      theta.push_back(ThetaLevel::kQ);
    } else {
      throw ValidationError("theta entries must be p or q, got '" + token + "'");
    }
  }
  return theta;
}

std::string ThetaToString(const std::vector<ThetaLevel>& theta) {
  std::string out;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    if (k > 0) out += ',';
    out += theta[k] == ThetaLevel::kP ? 'p' : 'q';
  }
  return out;
}

Json SweepConfigToJson(const SweepConfig& cfg) {
  Json instance;
  if (cfg.hard_instance) {
    const HardInstanceSpec& h = *cfg.hard_instance;
    instance["hard"] = Json{{"S", h.num_states},
                            {"A", h.num_actions_max},
                            {"B", h.num_actions_min},
                            {"gamma", h.gamma},
                            {"eps", h.epsilon},
                            {"c_clipped", h.c_clipped},
                            {"theta", ThetaToString(h.ResolvedTheta())}};
  } else {
    instance = Json{{"game", cfg.game_path},
                    {"rho", cfg.rho_path},
                    {"d_b", cfg.d_b_path}};
  }
  return Json{{"instance", std::move(instance)},
              {"sample_sizes", cfg.sample_sizes},
              {"seeds_per_size", cfg.seeds_per_size},
              {"c_b", cfg.c_b},
              {"delta", cfg.delta},
              {"planner_tol", cfg.planner_tol},
              {"nash_tol", cfg.nash_tol},
              {"master_seed", cfg.master_seed},
              {"output_path", cfg.output_path}};
}

SweepConfig SweepConfigFromJson(const Json& j) {
  try {
    SweepConfig cfg;
    const Json& instance = j.at("instance");
    if (instance.contains("hard")) {
      const Json& h = instance.at("hard");
      HardInstanceSpec spec;
      spec.num_states = h.value("S", spec.num_states);
      spec.num_actions_max = h.value("A", spec.num_actions_max);
      spec.num_actions_min = h.value("B", spec.num_actions_min);
      spec.gamma = h.value("gamma", spec.gamma);
      spec.epsilon = h.value("eps", spec.epsilon);
      spec.c_clipped = h.value("c_clipped", spec.c_clipped);
      if (h.contains("theta")) {
        spec.theta = ParseTheta(h.at("theta").get<std::string>());
      }
      cfg.hard_instance = spec;
    } else {
      cfg.game_path = instance.at("game").get<std::string>();
      cfg.rho_path = instance.at("rho").get<std::string>();
      cfg.d_b_path = instance.at("d_b").get<std::string>();
    }
    cfg.sample_sizes = j.at("sample_sizes").get<std::vector<std::int64_t>>();
    cfg.seeds_per_size = j.value("seeds_per_size", cfg.seeds_per_size);
    cfg.c_b = j.value("c_b", cfg.c_b);
    cfg.delta = j.value("delta", cfg.delta);
    cfg.planner_tol = j.value("planner_tol", cfg.planner_tol);
    cfg.nash_tol = j.value("nash_tol", cfg.nash_tol);
    cfg.master_seed = j.value("master_seed", cfg.master_seed);
    cfg.output_path = j.value("output_path", cfg.output_path);
    cfg.jobs = j.value("jobs", cfg.jobs);
    return cfg;
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed sweep config: ") + e.what());
  }
}

HardInstance ResolveInstance(const SweepConfig& cfg) {
  if (cfg.hard_instance) return BuildHardInstance(*cfg.hard_instance);
  HardInstance inst;
  inst.game = GameFromJson(ReadJsonFile(cfg.game_path));
  inst.rho = StateDistributionFromJson(ReadJsonFile(cfg.rho_path));
  ValidateStateDistribution(inst.rho, inst.game);
  inst.d_b = BehaviorDistributionFromJson(ReadJsonFile(cfg.d_b_path), inst.game);
  return inst;
}

std::uint64_t CellSeed(std::uint64_t master_seed, std::int64_t num_samples,
                       int seed_index) {
  return Hash64({master_seed, static_cast<std::uint64_t>(num_samples),
                 static_cast<std::uint64_t>(seed_index)});
}

std::vector<SweepRecord> RunSweep(const HardInstance& instance,
                                  const SweepConfig& cfg) {
  ValidateSweepConfig(cfg);
  ValidateGame(instance.game);
  ValidateStateDistribution(instance.rho, instance.game);
  ValidateBehaviorDistribution(instance.d_b, instance.game);

  const NashSolution nash = SolveNashExact(instance.game, cfg.planner_tol);
  const double v_star = Dot(instance.rho.probs, nash.v_star);

  struct Cell {
    std::int64_t n;
    int seed_index;
  };
  std::vector<Cell> cells;
  for (std::int64_t n : cfg.sample_sizes) {
    for (int k = 0; k < cfg.seeds_per_size; ++k) cells.push_back({n, k});
  }
  std::vector<SweepRecord> records(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        records[i] = RunCell(instance, cfg, v_star, cells[i].n,
                             cells[i].seed_index);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int workers =
      std::min<int>(cfg.jobs, static_cast<int>(cells.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return records;
}

std::string SweepToCsv(const std::vector<SweepRecord>& records,
                       bool with_timing) {
  std::string out = "N,seed,cell_seed,gap,v_star,v_mu_star,v_star_nu";
  out += with_timing ? ",runtime_ms\n" : "\n";
  for (const SweepRecord& r : records) {
    out += std::to_string(r.num_samples) + ',' + std::to_string(r.seed_index) +
           ',' + std::to_string(r.cell_seed) + ',' + FormatDouble(r.gap) + ',' +
           FormatDouble(r.v_star) + ',' + FormatDouble(r.v_mu_star) + ',' +
           FormatDouble(r.v_star_nu);
    if (with_timing) out += ',' + std::to_string(r.runtime_ms);
    out += '\n';
  }
  return out;
}

std::vector<SweepRecord> SweepFromCsv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty sweep CSV");
  const auto header = SplitCsvLine(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t k = 0; k < header.size(); ++k) col[header[k]] = k;
  for (const char* name : {"N", "seed", "gap", "v_star", "v_mu_star",
                           "v_star_nu"}) {
    if (!col.count(name)) {
      throw ValidationError(std::string("sweep CSV lacks column ") + name);
    }
  }
  std::vector<SweepRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = SplitCsvLine(line);
    if (f.size() != header.size()) {
      throw ValidationError("sweep CSV row has wrong field count: " + line);
    }
    try {
      SweepRecord r;
      r.num_samples = std::stoll(f[col["N"]]);
      r.seed_index = std::stoi(f[col["seed"]]);
      if (col.count("cell_seed")) r.cell_seed = std::stoull(f[col["cell_seed"]]);
      r.gap = std::stod(f[col["gap"]]);
      r.v_star = std::stod(f[col["v_star"]]);
      r.v_mu_star = std::stod(f[col["v_mu_star"]]);
      r.v_star_nu = std::stod(f[col["v_star_nu"]]);
      if (col.count("runtime_ms")) r.runtime_ms = std::stoll(f[col["runtime_ms"]]);
      records.push_back(r);
    } catch (const std::logic_error&) {
      throw ValidationError("unparsable sweep CSV row: " + line);
    }
  }
  return records;
}

LogLogFit FitLogLogSlope(const std::vector<SweepRecord>& records,
                         Aggregate aggregate) {
  std::map<std::int64_t, std::vector<double>> by_n;
  for (const SweepRecord& r : records) by_n[r.num_samples].push_back(r.gap);
  if (by_n.size() < 3) {
    throw ValidationError("slope fit needs at least 3 distinct sample sizes");
  }
  LogLogFit fit;
  for (auto& [n, gaps] : by_n) {
    double agg = 0.0;
    if (aggregate == Aggregate::kMean) {
      for (double g : gaps) agg += g;
      agg /= static_cast<double>(gaps.size());
    } else {
      std::sort(gaps.begin(), gaps.end());
      const std::size_t m = gaps.size();
      agg = m % 2 ? gaps[m / 2] : 0.5 * (gaps[m / 2 - 1] + gaps[m / 2]);
    }
    if (!(agg > 0.0)) {
      throw ValidationError("non-positive aggregate gap at N=" +
                            std::to_string(n));
    }
    fit.sample_sizes.push_back(n);
    fit.aggregated_gaps.push_back(agg);
  }

  const std::size_t m = fit.sample_sizes.size();
  double mx = 0.0, my = 0.0;
  std::vector<double> xs(m), ys(m);
  for (std::size_t k = 0; k < m; ++k) {
    xs[k] = std::log(static_cast<double>(fit.sample_sizes[k]));
    ys[k] = std::log(fit.aggregated_gaps[k]);
    mx += xs[k];
    my += ys[k];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
    syy += (ys[k] - my) * (ys[k] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

}  // namespace vilcb
