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

// Pipeline configuration and its JSON schema (documented in docs/config.md).
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "quadid/eval.hpp"
#include "quadid/experiment.hpp"
#include "quadid/ident_pd.hpp"
#include "quadid/mpc.hpp"
#include "quadid/signals.hpp"
#include "quadid/simulator.hpp"
#include "quadid/sindy.hpp"

namespace quadid {

struct IdentPdConfig {
  IdentBounds bounds = IdentBounds::defaults();
  PdParams init = PdParams::identified_reference();
  IdentOptions options;
};

struct SindyConfig {
  LibrarySpec library;
  SolverConfig solver;
  /// Preprocessing of SINDy training data; tracking runs carry faster
  /// content than the chirp flights and use a shorter window.
  PreprocessConfig preprocess{21, 3, true};
  bool wrap_yaw = true;
  TrackingDataConfig training;
};

struct ExperimentConfig {
  std::vector<TrajectoryKind> trajectories = {TrajectoryKind::kSinusoidal, TrajectoryKind::kCircular,
                                              TrajectoryKind::kSpiral};
  double duration = 60.0;
  Vec12 x_init = (Vec12() << 3, 3, 5, 0, 0, 0, 0, 0, 0, 0, 0, 0).finished();
  /// Re-initialization interval of the state-prediction metrics.
  double prediction_horizon = 1.0;
  ConcordanceKind concordance = ConcordanceKind::kWillmott;
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  /// simulation.seed is ignored; the top-level seed is used.
  SimulationConfig simulation;
  PreprocessConfig preprocess;
  IdentPdConfig ident_pd;
  SindyConfig sindy;
  OcpConfig mpc;
  ExperimentConfig experiment;

  /// Throws InputError on any invalid section.
  void validate() const;
  /// Simulation settings with the top-level seed applied.
  SimulationConfig simulation_config() const;
  /// Training-run settings with the experiment's x_init and the top-level seed.
  TrackingDataConfig training_config() const;
};

nlohmann::json to_json(const PipelineConfig& cfg);
/// Missing keys keep their defaults; unknown keys and wrong types are
/// InputErrors naming the offending path.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);

PipelineConfig load_config(const std::string& path);
void save_config(const PipelineConfig& cfg, const std::string& path);

}  // namespace quadid
