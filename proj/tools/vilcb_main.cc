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

// Command-line driver. Exit codes: 0 success, 1 I/O failure, 2 validation
// error, 3 numerical failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "vilcb/errors.h"
#include "vilcb/experiment.h"
#include "vilcb/game_model.h"
#include "vilcb/hard_instances.h"
#include "vilcb/io.h"
#include "vilcb/matrix_nash.h"
#include "vilcb/offline_data.h"
#include "vilcb/vi_lcb.h"

namespace {

using vilcb::Json;

constexpr int kExitIo = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
};

std::string ReadAll(std::istream& in) {
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return ReadAll(in);
}

// Writes to `path`, or to stdout when it is empty.
void Emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
  } else {
    vilcb::WriteTextFile(path, text);
  }
}

std::string Pretty(const Json& j) { return j.dump(2) + "\n"; }

std::string SidecarPath(const std::string& csv_path) {
  return csv_path + ".json";
}

// --- gen-hard --------------------------------------------------------------

struct GenHardOptions {
  vilcb::HardInstanceSpec spec;
  std::string theta;
};

void RunGenHard(const GenHardOptions& opt, const GlobalOptions& global) {
  vilcb::HardInstanceSpec spec = opt.spec;
  if (!opt.theta.empty()) spec.theta = vilcb::ParseTheta(opt.theta);
  const vilcb::HardInstance inst = vilcb::BuildHardInstance(spec);
  const vilcb::PolicyPair nash = vilcb::HardInstanceNash(spec);
  const std::string dir = global.out.empty() ? "." : global.out;
  std::filesystem::create_directories(dir);
  vilcb::WriteTextFile(dir + "/game.json", Pretty(vilcb::GameToJson(inst.game)));
  vilcb::WriteTextFile(dir + "/rho.json",
                       Pretty(vilcb::StateDistributionToJson(inst.rho)));
  vilcb::WriteTextFile(dir + "/d_b.json",
                       Pretty(vilcb::BehaviorDistributionToJson(inst.d_b)));
  vilcb::WriteTextFile(dir + "/mu_star.json", Pretty(vilcb::PolicyToJson(nash.mu)));
  vilcb::WriteTextFile(dir + "/nu_star.json", Pretty(vilcb::PolicyToJson(nash.nu)));
  std::cout << Pretty(Json{{"p", spec.p()},
                           {"q", spec.q()},
                           {"theta", vilcb::ThetaToString(spec.ResolvedTheta())},
                           {"v_star_0", vilcb::HardInstanceOptimalValue(spec)},
                           {"dir", dir}});
}

// --- sample ----------------------------------------------------------------

struct SampleOptions {
  std::string game;
  std::string d_b;
  std::int64_t n = 0;
};

void RunSample(const SampleOptions& opt, const GlobalOptions& global) {
  if (global.out.empty()) throw vilcb::ValidationError("sample needs --out");
  const vilcb::MarkovGame game = vilcb::GameFromJson(vilcb::ReadJsonFile(opt.game));
  const vilcb::BehaviorDistribution d_b =
      vilcb::BehaviorDistributionFromJson(vilcb::ReadJsonFile(opt.d_b), game);
  const vilcb::Dataset data =
      vilcb::SampleDataset(game, d_b, opt.n, global.seed.value_or(0));
  vilcb::WriteTextFile(global.out, vilcb::DatasetToCsv(data));
  vilcb::WriteTextFile(SidecarPath(global.out),
                       Pretty(vilcb::DatasetSidecar(data)));
}

// --- solve -----------------------------------------------------------------

struct SolveOptions {
  std::string game;
  std::string dataset;
  std::string model;
  std::string emit_model;
  double c_b = vilcb::kDefaultPenaltyConstant;
  double delta = vilcb::kDefaultDelta;
  double nash_tol = vilcb::kDefaultInnerNashTol;
  bool include_q = false;
};

void RunSolve(SolveOptions opt, const GlobalOptions& global) {
  if (!global.config.empty()) {
    const Json cfg = vilcb::ReadJsonFile(global.config);
    opt.c_b = cfg.value("c_b", opt.c_b);
    opt.delta = cfg.value("delta", opt.delta);
    opt.nash_tol = cfg.value("nash_tol", opt.nash_tol);
  }
  vilcb::EmpiricalModel model;
  if (!opt.model.empty()) {
    model = vilcb::EmpiricalModelFromJson(vilcb::ReadJsonFile(opt.model));
  } else {
    if (opt.game.empty() || opt.dataset.empty()) {
      throw vilcb::ValidationError("solve needs --model or --game and --dataset");
    }
    const vilcb::MarkovGame game =
        vilcb::GameFromJson(vilcb::ReadJsonFile(opt.game));
    const vilcb::Dataset data = vilcb::DatasetFromCsv(
        ReadFile(opt.dataset), vilcb::ReadJsonFile(SidecarPath(opt.dataset)));
    model = vilcb::BuildEmpiricalModel(data, game);
  }
  if (!opt.emit_model.empty()) {
    vilcb::WriteTextFile(opt.emit_model,
                         Pretty(vilcb::EmpiricalModelToJson(model)));
  }
  const vilcb::PenaltyConfig penalty{opt.c_b, opt.delta, model.total};
  const vilcb::SolveResult result = vilcb::ViLcbGame(model, penalty, opt.nash_tol);
  Json j = vilcb::SolveResultToJson(result, opt.include_q);
  j["penalty"] = Json{{"c_b", opt.c_b}, {"delta", opt.delta}, {"N", model.total}};
  j["nash_tol"] = opt.nash_tol;
  Emit(global.out, Pretty(j));
}

// --- eval ------------------------------------------------------------------

struct EvalOptions {
  std::string game;
  std::string rho;
  std::string mu;
  std::string nu;
  std::string solution;
  std::string d_b;
  std::string mu_star;
  std::string nu_star;
  double tol = 1e-8;
};

void RunEval(const EvalOptions& opt, const GlobalOptions& global) {
  const vilcb::MarkovGame game = vilcb::GameFromJson(vilcb::ReadJsonFile(opt.game));
  const vilcb::StateDistribution rho =
      vilcb::StateDistributionFromJson(vilcb::ReadJsonFile(opt.rho));
  vilcb::ValidateStateDistribution(rho, game);

  vilcb::StationaryPolicy mu, nu;
  if (!opt.solution.empty()) {
    const Json sol = vilcb::ReadJsonFile(opt.solution);
    mu = vilcb::PolicyFromJson(sol.at("mu_hat"));
    nu = vilcb::PolicyFromJson(sol.at("nu_hat"));
  } else {
    if (opt.mu.empty() || opt.nu.empty()) {
      throw vilcb::ValidationError("eval needs --solution or --mu and --nu");
    }
    mu = vilcb::PolicyFromJson(vilcb::ReadJsonFile(opt.mu));
    nu = vilcb::PolicyFromJson(vilcb::ReadJsonFile(opt.nu));
  }

  const vilcb::NashSolution nash = vilcb::SolveNashExact(game, opt.tol);
  double v_star = 0.0;
  for (int s = 0; s < game.num_states(); ++s) v_star += rho[s] * nash.v_star[s];
  const auto br_mu = vilcb::BestResponse(game, mu, opt.tol);
  const auto br_nu = vilcb::BestResponse(game, nu, opt.tol);
  double v_mu_star = 0.0, v_star_nu = 0.0;
  for (int s = 0; s < game.num_states(); ++s) {
    v_mu_star += rho[s] * br_mu.values[s];
    v_star_nu += rho[s] * br_nu.values[s];
  }
  Json out{{"v_star", v_star},
           {"v_mu_star", v_mu_star},
           {"v_star_nu", v_star_nu},
           {"gap", v_star_nu - v_mu_star}};

  if (!opt.d_b.empty()) {
    const vilcb::BehaviorDistribution d_b =
        vilcb::BehaviorDistributionFromJson(vilcb::ReadJsonFile(opt.d_b), game);
    vilcb::StationaryPolicy mu_star = nash.mu_star;
    vilcb::StationaryPolicy nu_star = nash.nu_star;
    std::string source = "solve_nash_exact";
    if (!opt.mu_star.empty() && !opt.nu_star.empty()) {
      mu_star = vilcb::PolicyFromJson(vilcb::ReadJsonFile(opt.mu_star));
      nu_star = vilcb::PolicyFromJson(vilcb::ReadJsonFile(opt.nu_star));
      source = "supplied";
    }
    auto finite_or_inf = [](double c) {
      return c == vilcb::kInfinity ? Json("inf") : Json(c);
    };
    out["concentrability"] = finite_or_inf(vilcb::Concentrability(
        game, rho, d_b, mu_star, nu_star, /*clipped=*/false, opt.tol));
    out["concentrability_clipped"] = finite_or_inf(vilcb::Concentrability(
        game, rho, d_b, mu_star, nu_star, /*clipped=*/true, opt.tol));
    out["nash_used"] = Json{{"source", source},
                            {"mu_star", vilcb::PolicyToJson(mu_star)},
                            {"nu_star", vilcb::PolicyToJson(nu_star)}};
  }
  Emit(global.out, Pretty(out));
}

// --- sweep -----------------------------------------------------------------

struct SweepOptions {
  int jobs = 0;
  bool timing = false;
};

void RunSweepCommand(const SweepOptions& opt, const GlobalOptions& global) {
  if (global.config.empty()) throw vilcb::ValidationError("sweep needs --config");
  vilcb::SweepConfig cfg =
      vilcb::SweepConfigFromJson(vilcb::ReadJsonFile(global.config));
  if (global.seed) cfg.master_seed = *global.seed;
  if (!global.out.empty()) cfg.output_path = global.out;
  if (opt.jobs > 0) cfg.jobs = opt.jobs;
  if (cfg.output_path.empty()) {
    throw vilcb::ValidationError("sweep needs --out or output_path in the config");
  }
  const vilcb::HardInstance inst = vilcb::ResolveInstance(cfg);
  const auto records = vilcb::RunSweep(inst, cfg);
  vilcb::WriteTextFile(cfg.output_path, vilcb::SweepToCsv(records, opt.timing));
  vilcb::WriteTextFile(SidecarPath(cfg.output_path),
                       Pretty(vilcb::SweepConfigToJson(cfg)));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pessimistic value iteration for offline zero-sum Markov games"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Random seed (u64)");
  app.add_option("--config", global.config, "JSON config file");
  app.add_option("--out", global.out, "Output path");

  GenHardOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-hard", "Build a hard lower-bound instance");
  gen_cmd->add_option("--S", gen.spec.num_states)->required();
  gen_cmd->add_option("--A", gen.spec.num_actions_max)->required();
  gen_cmd->add_option("--B", gen.spec.num_actions_min)->required();
  gen_cmd->add_option("--gamma", gen.spec.gamma)->required();
  gen_cmd->add_option("--eps", gen.spec.epsilon)->required();
  gen_cmd->add_option("--c-clipped", gen.spec.c_clipped)->required();
  gen_cmd->add_option("--theta", gen.theta, "Comma-separated p/q per action");

  SampleOptions sample;
  auto* sample_cmd = app.add_subcommand("sample", "Draw an offline dataset");
  sample_cmd->add_option("--game", sample.game)->required();
  sample_cmd->add_option("--d-b", sample.d_b)->required();
  sample_cmd->add_option("--N", sample.n)->required();

  SolveOptions solve;
  auto* solve_cmd = app.add_subcommand("solve", "Run the pessimistic solver");
  solve_cmd->add_option("--game", solve.game);
  solve_cmd->add_option("--dataset", solve.dataset, "Dataset CSV (sidecar at <csv>.json)");
  solve_cmd->add_option("--model", solve.model, "Empirical model JSON");
  solve_cmd->add_option("--emit-model", solve.emit_model);
  solve_cmd->add_option("--c-b", solve.c_b);
  solve_cmd->add_option("--delta", solve.delta);
  solve_cmd->add_option("--nash-tol", solve.nash_tol);
  solve_cmd->add_flag("--include-q", solve.include_q);

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Duality gap and concentrability");
  eval_cmd->add_option("--game", eval.game)->required();
  eval_cmd->add_option("--rho", eval.rho)->required();
  eval_cmd->add_option("--solution", eval.solution, "Output of `solve`");
  eval_cmd->add_option("--mu", eval.mu);
  eval_cmd->add_option("--nu", eval.nu);
  eval_cmd->add_option("--d-b", eval.d_b, "Also report concentrability");
  eval_cmd->add_option("--mu-star", eval.mu_star);
  eval_cmd->add_option("--nu-star", eval.nu_star);
  eval_cmd->add_option("--tol", eval.tol);

  SweepOptions sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Sample-complexity sweep");
  sweep_cmd->add_option("--jobs", sweep.jobs);
  sweep_cmd->add_flag("--timing", sweep.timing, "Add a runtime_ms column");

  double nash_tol = vilcb::kDefaultMatrixNashTol;
  auto* nash_cmd = app.add_subcommand("matrix-nash", "Solve a matrix game from stdin");
  nash_cmd->add_option("--tol", nash_tol);

  std::string fit_in;
  bool fit_median = false;
  auto* fit_cmd = app.add_subcommand("fit", "Log-log slope of a sweep CSV");
  fit_cmd->add_option("--in", fit_in)->required();
  fit_cmd->add_flag("--median", fit_median);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }
  if (*seed_opt) global.seed = seed_value;

  try {
    if (*gen_cmd) {
      RunGenHard(gen, global);
    } else if (*sample_cmd) {
      RunSample(sample, global);
    } else if (*solve_cmd) {
      RunSolve(solve, global);
    } else if (*eval_cmd) {
      RunEval(eval, global);
    } else if (*sweep_cmd) {
      RunSweepCommand(sweep, global);
    } else if (*nash_cmd) {
      const vilcb::PayoffMatrix m =
          vilcb::PayoffMatrixFromJson(Json::parse(ReadAll(std::cin)));
      Emit(global.out,
           Pretty(vilcb::CertificateToJson(vilcb::SolveMatrixNash(m, nash_tol))));
    } else if (*fit_cmd) {
      const auto fit = vilcb::FitLogLogSlope(
          vilcb::SweepFromCsv(ReadFile(fit_in)),
          fit_median ? vilcb::Aggregate::kMedian : vilcb::Aggregate::kMean);
      Emit(global.out, Pretty(Json{{"slope", fit.slope},
                                   {"intercept", fit.intercept},
                                   {"r_squared", fit.r_squared},
                                   {"N", fit.sample_sizes},
                                   {"gap", fit.aggregated_gaps}}));
    }
  } catch (const vilcb::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Json::exception& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const vilcb::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return 0;
}
