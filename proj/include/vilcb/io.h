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

#ifndef VILCB_IO_H_
#define VILCB_IO_H_

#include <string>

#include "json.hpp"
#include "vilcb/game_model.h"
#include "vilcb/matrix_nash.h"
#include "vilcb/offline_data.h"
#include "vilcb/vi_lcb.h"

namespace vilcb {

using Json = nlohmann::json;

// Formats with 17 significant digits, which round-trips every double.
std::string FormatDouble(double x);

Json ReadJsonFile(const std::string& path);
void WriteTextFile(const std::string& path, const std::string& text);

// {"S","A","B","gamma","P":[S][A][B][S],"r":[S][A][B]}
Json GameToJson(const MarkovGame& game);
// Validates the result.
MarkovGame GameFromJson(const Json& j);

// {"side":"max"|"min","probs":[S][actions]}
Json PolicyToJson(const StationaryPolicy& policy);
StationaryPolicy PolicyFromJson(const Json& j);

// Flat arrays; the behavior distribution in row-major (s, a, b) order.
Json StateDistributionToJson(const StateDistribution& rho);
StateDistribution StateDistributionFromJson(const Json& j);
Json BehaviorDistributionToJson(const BehaviorDistribution& d_b);
BehaviorDistribution BehaviorDistributionFromJson(const Json& j,
                                                  const MarkovGame& game);

// CSV with header "s,a,b,s_next", one row per transition.
std::string DatasetToCsv(const Dataset& data);
// {"seed","N","S","A","B"}
Json DatasetSidecar(const Dataset& data);
Dataset DatasetFromCsv(const std::string& csv, const Json& sidecar);

// Game schema of the empirical game plus "counts":[S][A][B] and "N".
Json EmpiricalModelToJson(const EmpiricalModel& model);
EmpiricalModel EmpiricalModelFromJson(const Json& j);

Json CertificateToJson(const NashCertificate& cert);
PayoffMatrix PayoffMatrixFromJson(const Json& j);

Json SolveResultToJson(const SolveResult& result, bool include_q);

}  // namespace vilcb

#endif  // VILCB_IO_H_
