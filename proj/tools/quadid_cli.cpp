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

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "quadid/commands.hpp"

namespace {

using quadid::CommandContext;

int run(int argc, char** argv) {
  CLI::App app{"quadid: quadrotor identification (PD and SINDy) and MPC tracking"};
  app.require_subcommand(0, 1);
  bool dump_config = false;
  app.add_flag("--dump-config", dump_config, "Print the effective config as JSON and exit");
  std::string config_path, out_dir = ".";
  std::uint64_t seed = 0;
  app.add_option("--config", config_path, "Pipeline config JSON")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Overrides the config seed");
  app.add_option("--out", out_dir, "Output directory");

  quadid::SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a flight dataset from the ground-truth plant");
  simulate->add_option("--mode", sim.mode, "excitation or tracking")->check(CLI::IsMember({"excitation", "tracking"}));
  simulate->add_option("--controller", sim.controller_model, "Model driving the MPC in tracking mode");

  quadid::IdentifyArgs ident;
  auto* identify = app.add_subcommand("identify", "Identify a PD or SINDy model from datasets");
  identify->add_option("--method", ident.method, "pd or sindy")->check(CLI::IsMember({"pd", "sindy"}));
  identify->add_option("--data", ident.data, "Dataset CSV (repeatable)")->required();

  quadid::TrackArgs trk;
  std::vector<std::string> trajectories;
  auto* track = app.add_subcommand("track", "Run MPC tracking experiments against the plant");
  track->add_option("--model", trk.model, "Model JSON")->required();
  track->add_option("--trajectory", trajectories, "sinusoidal, circular or spiral (repeatable)")
      ->check(CLI::IsMember({"sinusoidal", "circular", "spiral"}));

  quadid::CompareArgs cmp;
  auto* compare = app.add_subcommand("compare", "Compare two tracking logs");
  compare->add_option("log_a", cmp.log_a, "First tracking log CSV")->required();
  compare->add_option("log_b", cmp.log_b, "Second tracking log CSV")->required();

  quadid::MetricsArgs met;
  auto* metrics = app.add_subcommand("metrics", "State-prediction metrics of models on a dataset");
  metrics->add_option("--model", met.models, "Model JSON (repeatable)")->required();
  metrics->add_option("--data", met.data, "Dataset CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? quadid::kExitOk : quadid::kExitInput;
  }

  CommandContext ctx;
  if (!config_path.empty()) ctx.config = quadid::load_config(config_path);
  if (*seed_opt) ctx.config.seed = seed;
  ctx.config.validate();
  if (dump_config) {
    std::cout << quadid::to_json(ctx.config).dump(2) << '\n';
    return quadid::kExitOk;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return quadid::kExitInput;
  }
  ctx.out_dir = out_dir;
  ctx.log = &std::cout;
  for (const auto& t : trajectories) trk.trajectories.push_back(quadid::parse_trajectory(t));

  if (*simulate) return quadid::cmd_simulate(ctx, sim);
  if (*identify) return quadid::cmd_identify(ctx, ident);
  if (*track) return quadid::cmd_track(ctx, trk);
  if (*compare) return quadid::cmd_compare(ctx, cmp);
  return quadid::cmd_metrics(ctx, met);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const quadid::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.category() == quadid::Error::Category::kNumerical ? quadid::kExitNumerical : quadid::kExitInput;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return quadid::kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return quadid::kExitNumerical;
  }
}
