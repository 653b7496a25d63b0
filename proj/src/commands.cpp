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

#include "quadid/commands.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>

#include "quadid/io.hpp"

namespace quadid {

using nlohmann::json;

namespace {

std::string out_path(const CommandContext& ctx, const std::string& name) {
  std::filesystem::create_directories(ctx.out_dir);
  return (std::filesystem::path(ctx.out_dir) / name).string();
}

void say(const CommandContext& ctx, const std::string& text) {
  if (ctx.log) *ctx.log << text << '\n';
}

std::vector<FlightDataset> read_all(const std::vector<std::string>& paths, const PreprocessConfig& pp) {
  if (paths.empty()) throw InputError("no dataset given");
  std::vector<FlightDataset> parts;
  for (const auto& p : paths) parts.push_back(preprocess(read_dataset_csv(p), pp));
  return parts;
}

void write_plots(const CommandContext& ctx, const TrackingLog& log, const std::string& stem) {
  const auto n = static_cast<Eigen::Index>(log.size());
  const Eigen::MatrixXd pos = log.positions(), ref = log.reference_positions();
  Eigen::MatrixXd p(n, 7), e(n, 5), s(n, 3);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double t = log.t[static_cast<std::size_t>(k)];
    p(k, 0) = t;
    p.block<1, 3>(k, 1) = pos.row(k);
    p.block<1, 3>(k, 4) = ref.row(k);
    e(k, 0) = t;
    e.block<1, 3>(k, 1) = pos.row(k) - ref.row(k);
    e(k, 4) = (pos.row(k) - ref.row(k)).norm();
    s(k, 0) = static_cast<double>(k);
    s(k, 1) = t;
    s(k, 2) = log.solve_ms[static_cast<std::size_t>(k)];
  }
  write_matrix_csv(out_path(ctx, "plot_" + stem + "_position.csv"), {"t", "x", "y", "z", "ref_x", "ref_y", "ref_z"}, p);
  write_matrix_csv(out_path(ctx, "plot_" + stem + "_error.csv"), {"t", "e_x", "e_y", "e_z", "e_norm"}, e);
  write_matrix_csv(out_path(ctx, "plot_" + stem + "_solve_time.csv"), {"step", "t", "solve_ms"}, s);
}

TrackingRow row_of(const TrackingLog& log, ConcordanceKind kind) {
  if (log.size() == 0) throw InputError("tracking log of " + log.model + " on " + log.trajectory + " is empty");
  const TrackingMetrics m = tracking_metrics(log.positions(), log.reference_positions(), kind);
  return {log.trajectory, log.model, m.rmse_3d, m.mae_3d, m.axes.concordance.aggregate};
}

}  // namespace

int cmd_simulate(const CommandContext& ctx, const SimulateArgs& args) {
  const PipelineConfig& cfg = ctx.config;
  json meta = {{"mode", args.mode}, {"seed", cfg.seed}};
  if (args.mode == "excitation") {
    const SimulationResult r = simulate(cfg.simulation_config());
    write_dataset_csv(out_path(ctx, "dataset.csv"), r.data);
    meta["files"] = {"dataset.csv"};
    meta["samples"] = r.data.samples();
    say(ctx, "wrote " + std::to_string(r.data.samples()) + " samples to dataset.csv");
  } else if (args.mode == "tracking") {
    std::unique_ptr<DynamicsModel> controller;
    if (args.controller_model.empty()) {
      controller = std::make_unique<PdDynamics>(cfg.simulation.plant.model());
    } else {
      controller = load_model(args.controller_model);
    }
    const TrackingDataConfig tcfg = cfg.training_config();
    const auto runs = collect_tracking_runs(*controller, cfg.simulation.plant, cfg.mpc, tcfg);
    meta["files"] = json::array();
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const std::string name = "dataset_" + std::string(trajectory_name(tcfg.trajectories[i])) + ".csv";
      write_dataset_csv(out_path(ctx, name), runs[i].data);
      meta["files"].push_back(name);
      say(ctx, "wrote " + std::to_string(runs[i].data.samples()) + " samples to " + name);
    }
    meta["controller"] = controller->name();
  } else {
    throw InputError("simulate: mode must be \"excitation\" or \"tracking\"");
  }
  meta["config"] = to_json(cfg);
  write_json(out_path(ctx, "simulation.json"), meta);
  return kExitOk;
}

int cmd_identify(const CommandContext& ctx, const IdentifyArgs& args) {
  const PipelineConfig& cfg = ctx.config;
  if (args.method == "pd") {
    const FlightDataset data = concatenate(read_all(args.data, cfg.preprocess));
    IdentProblem problem;
    problem.samples = pd_samples(data);
    problem.dt = data.states.dt;
    problem.mass = cfg.simulation.plant.mass;
    problem.g = cfg.simulation.plant.g;
    problem.bounds = cfg.ident_pd.bounds;
    problem.init = cfg.ident_pd.init;
    problem.options = cfg.ident_pd.options;
    const IdentResult r = identify_pd(problem);
    write_json(out_path(ctx, "pd_model.json"), pd_model_json({r.xi_hat, problem.mass, problem.g}));
    write_json(out_path(ctx, "ident_pd_report.json"), to_json(r));
    std::string line = "pd: J = ";
    line += std::to_string(r.cost_trajectory.back()) + " after " + std::to_string(r.iterations) + " iterations";
    say(ctx, line);
    for (const auto& w : r.warnings) say(ctx, "warning: " + w);
    return kExitOk;
  }
  if (args.method == "sindy") {
    std::vector<FlightDataset> parts = read_all(args.data, cfg.sindy.preprocess);
    if (cfg.sindy.wrap_yaw) {
      for (auto& p : parts) p = wrap_yaw(p);
    }
    const SindyFit fit = identify_sindy(concatenate(parts), cfg.sindy.library, cfg.sindy.solver);
    write_json(out_path(ctx, "sindy_model.json"), sindy_model_json(fit.model, cfg.sindy.wrap_yaw));
    json report = {{"nonzeros", fit.nonzeros},
                   {"iterations", fit.solver.iterations},
                   {"converged", fit.solver.converged},
                   {"rank_deficient", fit.solver.rank_deficient},
                   {"warnings", fit.solver.warnings}};
    json resid = json::object();
    for (int c = 0; c < kStateDim; ++c) resid[std::string(kStateNames[static_cast<std::size_t>(c)])] = fit.residual_rmse(c);
    report["residual_rmse"] = resid;
    write_json(out_path(ctx, "sindy_report.json"), report);
    say(ctx, "sindy: " + std::to_string(fit.nonzeros) + " active terms");
    for (const auto& w : fit.solver.warnings) say(ctx, "warning: " + w);
    return kExitOk;
  }
  throw InputError("identify: method must be \"pd\" or \"sindy\"");
}

int cmd_track(const CommandContext& ctx, const TrackArgs& args) {
  const PipelineConfig& cfg = ctx.config;
  if (args.model.empty()) throw InputError("track: a model file is required");
  const auto model = load_model(args.model);
  const auto& kinds = args.trajectories.empty() ? cfg.experiment.trajectories : args.trajectories;
  const ConcordanceKind ck = cfg.experiment.concordance;
  json runs = json::array();
  std::vector<TrackingRow> rows;
  bool aborted = false;
  for (const TrajectoryKind kind : kinds) {
    QuadPlant plant(cfg.simulation.plant, State12::from(cfg.experiment.x_init));
    const PlantStep step = [&](const Vec4& u, double dt) { return plant.step(u, dt).vec(); };
    const TrackingLog log = track(*model, step, kind, cfg.mpc, cfg.experiment.duration, cfg.experiment.x_init);
    const std::string stem = model->name() + "_" + std::string(trajectory_name(kind));
    write_tracking_log(out_path(ctx, "track_" + stem + ".csv"), log);
    const json summary = tracking_summary(log, cfg.mpc, ck);
    write_json(out_path(ctx, "summary_" + stem + ".json"), summary);
    write_json(out_path(ctx, "timing_" + stem + ".json"), timing_summary(log));
    write_plots(ctx, log, stem);
    runs.push_back(summary);
    if (log.aborted) {
      aborted = true;
      say(ctx, stem + ": aborted: " + log.abort_reason);
    }
    if (log.size() > 0) rows.push_back(row_of(log, ck));
  }
  const std::string table = render_tracking_table(rows);
  std::ofstream(out_path(ctx, "tracking_table.txt")) << table;
  write_json(out_path(ctx, "tracking_" + model->name() + ".json"), {{"model", model->name()}, {"runs", runs}});
  say(ctx, table);
  return aborted ? kExitNumerical : kExitOk;
}

int cmd_compare(const CommandContext& ctx, const CompareArgs& args) {
  const TrackingLog a = read_tracking_log(args.log_a);
  const TrackingLog b = read_tracking_log(args.log_b);
  if (a.trajectory != b.trajectory) {
    throw InputError("compare: logs follow different trajectories (" + a.trajectory + ", " + b.trajectory + ")");
  }
  const ConcordanceKind ck = ctx.config.experiment.concordance;
  const TrackingRow ra = row_of(a, ck), rb = row_of(b, ck);
  auto entry = [](const TrackingRow& r, const TrackingLog& log) {
    return json{{"model", r.model}, {"rmse", r.rmse}, {"mae", r.mae}, {"concordance", r.concordance},
                {"steps", log.size()}, {"aborted", log.aborted}};
  };
  const json out = {{"trajectory", a.trajectory},
                    {"a", entry(ra, a)},
                    {"b", entry(rb, b)},
                    {"difference",
                     {{"rmse", rb.rmse - ra.rmse}, {"mae", rb.mae - ra.mae}, {"concordance", rb.concordance - ra.concordance}}}};
  write_json(out_path(ctx, "compare.json"), out);
  const std::string table = render_tracking_table({ra, rb});
  std::ofstream(out_path(ctx, "compare.txt")) << table;
  say(ctx, table);
  return kExitOk;
}

int cmd_metrics(const CommandContext& ctx, const MetricsArgs& args) {
  const PipelineConfig& cfg = ctx.config;
  if (args.models.empty()) throw InputError("metrics: at least one model file is required");
  if (args.data.empty()) throw InputError("metrics: a dataset is required");
  const FlightDataset data = read_dataset_csv(args.data);
  std::vector<std::pair<std::string, MetricReport>> reports;
  json out = json::object();
  for (const auto& path : args.models) {
    const auto model = load_model(path);
    MetricReport r = prediction_report(*model, data, cfg.experiment.prediction_horizon, cfg.experiment.concordance);
    std::string label = model->name();
    for (int k = 2; out.contains(label); ++k) label = model->name() + "#" + std::to_string(k);
    out[label] = to_json(r);
    reports.emplace_back(label, std::move(r));
  }
  out["prediction_horizon"] = cfg.experiment.prediction_horizon;
  write_json(out_path(ctx, "metrics.json"), out);
  const std::string table = render_state_table(reports);
  std::ofstream(out_path(ctx, "metrics.txt")) << table;
  say(ctx, table);
  return kExitOk;
}

}  // namespace quadid
