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

// Closed-loop data collection and short-horizon prediction scoring.
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "quadid/eval.hpp"
#include "quadid/mpc.hpp"
#include "quadid/simulator.hpp"

namespace quadid {

struct TrackingDataConfig {
  std::vector<TrajectoryKind> trajectories = {TrajectoryKind::kSinusoidal, TrajectoryKind::kCircular,
                                              TrajectoryKind::kSpiral};
  double duration = 60.0;
  /// Must divide the MPC control interval.
  double sample_dt = 1.0 / 600.0;
  /// Scale applied to ExcitationSpec::rich() for the dither added to the commands.
  double dither_scale = 0.1;
  Vec12 x_init = (Vec12() << 3, 3, 5, 0, 0, 0, 0, 0, 0, 0, 0, 0).finished();
  std::array<double, 12> noise_sigma{};
  std::uint64_t seed = 0;

  void validate() const;
};

/// One MPC tracking run per trajectory on the ground-truth plant, recorded at
/// sample_dt. Inside each control interval the applied command ramps linearly
/// from the previous MPC input to the current one, a chirp dither is added and
/// the sum is projected onto InputBounds. Run i draws its noise from seed + i.
std::vector<SimulationResult> collect_tracking_runs(const DynamicsModel& controller, const PlantConfig& plant,
                                                    const OcpConfig& ocp, const TrackingDataConfig& cfg);

/// Open-loop prediction of a recorded flight: the model is re-initialized
/// from the measured state every `horizon` seconds and integrated with RK4
/// under the recorded (held) inputs. Returns samples x 12.
Eigen::MatrixXd predict_states(const DynamicsModel& model, const FlightDataset& data, double horizon);

/// Per-state RMSE/MAE/concordance of predict_states against the measured states.
MetricReport prediction_report(const DynamicsModel& model, const FlightDataset& data, double horizon,
                               ConcordanceKind kind = ConcordanceKind::kWillmott);

}  // namespace quadid
