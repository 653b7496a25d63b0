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

// Pipeline subcommands behind the command-line front-end. Each returns the
// process exit code; library errors propagate as exceptions.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "quadid/config.hpp"

namespace quadid {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitInput = 2;

struct CommandContext {
  PipelineConfig config;
  std::string out_dir = ".";
  std::ostream* log = nullptr;  // progress and tables; null silences them
};

struct SimulateArgs {
  /// "excitation": one chirp flight. "tracking": one MPC run per training trajectory.
  std::string mode = "excitation";
  /// Controller for tracking mode; empty uses the plant's own PD model.
  std::string controller_model;
};

struct IdentifyArgs {
  std::string method = "pd";  // "pd" or "sindy"
  std::vector<std::string> data;
};

struct TrackArgs {
  std::string model;
  /// Empty runs the configured experiment trajectories.
  std::vector<TrajectoryKind> trajectories;
};

struct CompareArgs {
  std::string log_a;
  std::string log_b;
};

struct MetricsArgs {
  std::vector<std::string> models;
  std::string data;
};

/// Writes dataset.csv (excitation) or dataset_<trajectory>.csv (tracking)
/// plus simulation.json.
int cmd_simulate(const CommandContext& ctx, const SimulateArgs& args);
/// Preprocesses every dataset separately, stacks them and writes
/// pd_model.json + ident_pd_report.json or sindy_model.json + sindy_report.json.
int cmd_identify(const CommandContext& ctx, const IdentifyArgs& args);
/// Per trajectory: track_, summary_, timing_ and plot_ files; then
/// tracking_table.txt and tracking_<model>.json. Returns kExitNumerical if a
/// run aborted.
int cmd_track(const CommandContext& ctx, const TrackArgs& args);
/// Side-by-side metrics of two logs of the same trajectory: compare.txt, compare.json.
int cmd_compare(const CommandContext& ctx, const CompareArgs& args);
/// Short-horizon state-prediction metrics of each model on a dataset:
/// metrics.txt, metrics.json.
int cmd_metrics(const CommandContext& ctx, const MetricsArgs& args);

}  // namespace quadid
