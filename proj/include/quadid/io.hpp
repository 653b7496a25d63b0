/*
 Copyright 2026 The quadid Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

// File formats: dataset and tracking-log CSV, model JSON.
#pragma once

#include <memory>
#include <string>

#include <json.hpp>

#include "quadid/mpc.hpp"
#include "quadid/pd_model.hpp"
#include "quadid/signals.hpp"
#include "quadid/sindy.hpp"

namespace quadid {

/// Header: t, the 12 state names, the 4 input names. Values use %.17g.
void write_dataset_csv(const std::string& path, const FlightDataset& data);
/// Requires the exact header and uniformly spaced t; derivs are left empty.
FlightDataset read_dataset_csv(const std::string& path);

nlohmann::json pd_model_json(const PdModel& model);
PdModel pd_model_from_json(const nlohmann::json& j);

nlohmann::json sindy_model_json(const SparseModel& model, bool wrap_yaw);
/// Rejects a term list that differs from the one generated by the spec.
SparseModel sindy_model_from_json(const nlohmann::json& j, bool* wrap_yaw = nullptr);

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

/// Dispatches on the "type" key ("pd" or "sindy").
std::unique_ptr<DynamicsModel> load_model(const std::string& path);

/// "# model=..." and "# trajectory=..." lines, then t, states, inputs,
/// ref_x, ref_y, ref_z, cost, kkt, solve_ms.
void write_tracking_log(const std::string& path, const TrackingLog& log);
/// Throws InputError naming the first missing column.
TrackingLog read_tracking_log(const std::string& path);

/// Writes a header line and the rows of `values` with %.17g.
void write_matrix_csv(const std::string& path, const std::vector<std::string>& header, const Eigen::MatrixXd& values);

}  // namespace quadid
