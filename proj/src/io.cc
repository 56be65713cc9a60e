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

#include "vilcb/io.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "vilcb/errors.h"

namespace vilcb {
namespace {

// Wraps parse-level failures from the JSON library as validation errors.
template <typename Fn>
auto Parsing(const char* what, Fn fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed ") + what + ": " + e.what());
  }
}

Json Nested3(const std::vector<double>& flat, int d0, int d1, int d2) {
  Json out = Json::array();
  std::size_t k = 0;
  for (int i = 0; i < d0; ++i) {
    Json mid = Json::array();
    for (int j = 0; j < d1; ++j) {
      Json inner = Json::array();
      for (int l = 0; l < d2; ++l) inner.push_back(flat[k++]);
      mid.push_back(std::move(inner));
    }
    out.push_back(std::move(mid));
  }
  return out;
}

Json QToJson(const QTensor& q) {
  return Nested3(q.values, q.num_states, q.num_actions_max, q.num_actions_min);
}

}  // namespace

std::string FormatDouble(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

Json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return Parsing("JSON file", [&] { return Json::parse(in); });
}

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

Json GameToJson(const MarkovGame& game) {
  const int S = game.num_states();
  const int A = game.num_actions_max();
  const int B = game.num_actions_min();
  Json p = Json::array();
  for (int s = 0; s < S; ++s) {
    Json ps = Json::array();
    for (int a = 0; a < A; ++a) {
      Json pa = Json::array();
      for (int b = 0; b < B; ++b) {
        const auto row = game.P(s, a, b);
        pa.push_back(std::vector<double>(row.begin(), row.end()));
      }
      ps.push_back(std::move(pa));
    }
    p.push_back(std::move(ps));
  }
  return Json{{"S", S},
              {"A", A},
              {"B", B},
              {"gamma", game.gamma()},
              {"P", std::move(p)},
              {"r", Nested3(game.reward(), S, A, B)}};
}

MarkovGame GameFromJson(const Json& j) {
  MarkovGame game = Parsing("game", [&] {
    const int S = j.at("S").get<int>();
    const int A = j.at("A").get<int>();
    const int B = j.at("B").get<int>();
    MarkovGame g(S, A, B, j.at("gamma").get<double>());
    const Json& p = j.at("P");
    const Json& r = j.at("r");
    if (p.size() != static_cast<std::size_t>(S) ||
        r.size() != static_cast<std::size_t>(S)) {
      throw ValidationError("game arrays do not match S");
    }
    for (int s = 0; s < S; ++s) {
      if (p[s].size() != static_cast<std::size_t>(A) ||
          r[s].size() != static_cast<std::size_t>(A)) {
        throw ValidationError("game arrays do not match A");
      }
      for (int a = 0; a < A; ++a) {
        if (p[s][a].size() != static_cast<std::size_t>(B) ||
            r[s][a].size() != static_cast<std::size_t>(B)) {
          throw ValidationError("game arrays do not match B");
        }
        for (int b = 0; b < B; ++b) {
          const auto row = p[s][a][b].get<std::vector<double>>();
          if (row.size() != static_cast<std::size_t>(S)) {
            throw ValidationError("transition row does not have S entries");
          }
          std::copy(row.begin(), row.end(), g.MutableP(s, a, b).begin());
          g.MutableR(s, a, b) = r[s][a][b].get<double>();
        }
      }
    }
    return g;
  });
  ValidateGame(game);
  return game;
}

Json PolicyToJson(const StationaryPolicy& policy) {
  Json probs = Json::array();
  for (int s = 0; s < policy.num_states(); ++s) {
    const auto row = policy.At(s);
    probs.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return Json{{"side", policy.side() == Side::kMax ? "max" : "min"},
              {"probs", std::move(probs)}};
}

StationaryPolicy PolicyFromJson(const Json& j) {
  return Parsing("policy", [&] {
    const std::string side = j.at("side").get<std::string>();
    if (side != "max" && side != "min") {
      throw ValidationError("policy side must be \"max\" or \"min\"");
    }
    const auto rows = j.at("probs").get<std::vector<std::vector<double>>>();
    if (rows.empty() || rows.front().empty()) {
      throw ValidationError("policy has no states or actions");
    }
    StationaryPolicy policy(side == "max" ? Side::kMax : Side::kMin,
                            static_cast<int>(rows.size()),
                            static_cast<int>(rows.front().size()));
    for (int s = 0; s < policy.num_states(); ++s) {
      if (static_cast<int>(rows[s].size()) != policy.num_actions()) {
        throw ValidationError("ragged policy table");
      }
      std::copy(rows[s].begin(), rows[s].end(), policy.MutableAt(s).begin());
    }
    return policy;
  });
}

Json StateDistributionToJson(const StateDistribution& rho) {
  return Json(rho.probs);
}

StateDistribution StateDistributionFromJson(const Json& j) {
  return Parsing("state distribution", [&] {
    return StateDistribution{j.get<std::vector<double>>()};
  });
}

Json BehaviorDistributionToJson(const BehaviorDistribution& d_b) {
  return Json(d_b.probs);
}

BehaviorDistribution BehaviorDistributionFromJson(const Json& j,
                                                  const MarkovGame& game) {
  BehaviorDistribution d_b = Parsing("behavior distribution", [&] {
    return BehaviorDistribution{game.num_states(), game.num_actions_max(),
                                game.num_actions_min(),
                                j.get<std::vector<double>>()};
  });
  ValidateBehaviorDistribution(d_b, game);
  return d_b;
}

std::string DatasetToCsv(const Dataset& data) {
  std::string out = "s,a,b,s_next\n";
  out.reserve(out.size() + data.transitions.size() * 10);
  for (const Transition& t : data.transitions) {
    out += std::to_string(t.s);
    out += ',';
    out += std::to_string(t.a);
    out += ',';
    out += std::to_string(t.b);
    out += ',';
    out += std::to_string(t.s_next);
    out += '\n';
  }
  return out;
}

Json DatasetSidecar(const Dataset& data) {
  return Json{{"seed", data.seed},
              {"N", data.size()},
              {"S", data.num_states},
              {"A", data.num_actions_max},
              {"B", data.num_actions_min}};
}

Dataset DatasetFromCsv(const std::string& csv, const Json& sidecar) {
  Dataset data = Parsing("dataset sidecar", [&] {
    Dataset d;
    d.seed = sidecar.at("seed").get<std::uint64_t>();
    d.num_states = sidecar.at("S").get<int>();
    d.num_actions_max = sidecar.at("A").get<int>();
    d.num_actions_min = sidecar.at("B").get<int>();
    return d;
  });
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != "s,a,b,s_next") {
    throw ValidationError("dataset CSV must start with header s,a,b,s_next");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Transition t;
    char c1 = 0, c2 = 0, c3 = 0;
    std::istringstream row(line);
    if (!(row >> t.s >> c1 >> t.a >> c2 >> t.b >> c3 >> t.s_next) ||
        c1 != ',' || c2 != ',' || c3 != ',') {
      throw ValidationError("bad dataset row: " + line);
    }
    data.transitions.push_back(t);
  }
  const auto expected = Parsing("dataset sidecar", [&] {
    return sidecar.at("N").get<std::int64_t>();
  });
  if (expected != data.size()) {
    throw ValidationError("dataset CSV row count does not match sidecar N");
  }
  ValidateDataset(data);
  return data;
}

Json EmpiricalModelToJson(const EmpiricalModel& model) {
  Json j = GameToJson(model.AsGame());
  Json nested = Json::array();
  std::size_t k = 0;
  for (int s = 0; s < model.num_states; ++s) {
    Json ps = Json::array();
    for (int a = 0; a < model.num_actions_max; ++a) {
      Json pa = Json::array();
      for (int b = 0; b < model.num_actions_min; ++b) {
        pa.push_back(model.counts[k++]);
      }
      ps.push_back(std::move(pa));
    }
    nested.push_back(std::move(ps));
  }
  j["counts"] = std::move(nested);
  j["N"] = model.total;
  return j;
}

EmpiricalModel EmpiricalModelFromJson(const Json& j) {
  const MarkovGame game = GameFromJson(j);
  EmpiricalModel model;
  model.num_states = game.num_states();
  model.num_actions_max = game.num_actions_max();
  model.num_actions_min = game.num_actions_min();
  model.gamma = game.gamma();
  model.p_hat = game.transition();
  model.r_hat = game.reward();
  Parsing("empirical model", [&] {
    model.total = j.at("N").get<std::int64_t>();
    const Json& counts = j.at("counts");
    for (int s = 0; s < model.num_states; ++s) {
      for (int a = 0; a < model.num_actions_max; ++a) {
        for (int b = 0; b < model.num_actions_min; ++b) {
          model.counts.push_back(counts.at(s).at(a).at(b).get<std::int64_t>());
        }
      }
    }
    return 0;
  });
  std::int64_t total = 0;
  for (std::int64_t c : model.counts) {
    if (c < 0) throw ValidationError("negative count in empirical model");
    total += c;
  }
  if (total != model.total || total < 1) {
    throw ValidationError("empirical model counts do not sum to N");
  }
  return model;
}

Json CertificateToJson(const NashCertificate& cert) {
  return Json{{"row_strategy", cert.row_strategy},
              {"col_strategy", cert.col_strategy},
              {"value", cert.value},
              {"exploitability_gap", cert.exploitability_gap},
              {"lower_bound", cert.lower_bound},
              {"upper_bound", cert.upper_bound},
              {"iterations", cert.iterations}};
}

PayoffMatrix PayoffMatrixFromJson(const Json& j) {
  return Parsing("payoff matrix", [&] {
    return PayoffMatrix::FromRows(j.get<std::vector<std::vector<double>>>());
  });
}

Json SolveResultToJson(const SolveResult& result, bool include_q) {
  Json j{{"iterations", result.iterations},
         {"residuals", result.residuals},
         {"v_minus", result.v_minus},
         {"v_plus", result.v_plus},
         {"mu_hat", PolicyToJson(result.mu_hat)},
         {"nu_hat", PolicyToJson(result.nu_hat)}};
  if (include_q) {
    j["q_minus"] = QToJson(result.q_minus);
    j["q_plus"] = QToJson(result.q_plus);
  }
  return j;
}

}  // namespace vilcb
