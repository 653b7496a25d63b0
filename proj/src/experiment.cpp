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

#include "quadid/experiment.hpp"

#include <cmath>
#include <optional>
#include <random>

namespace quadid {

void TrackingDataConfig::validate() const {
  if (trajectories.empty()) throw InputError("tracking data: no trajectories");
  if (!(duration > 0.0) || !std::isfinite(duration)) throw InputError("tracking data: duration must be > 0");
  if (!(sample_dt > 0.0) || sample_dt > 0.1) throw InputError("tracking data: sample_dt must be in (0, 0.1]");
  if (!(dither_scale >= 0.0) || dither_scale > 1.0) throw InputError("tracking data: dither_scale must be in [0, 1]");
  if (!x_init.allFinite()) throw InputError("tracking data: x_init must be finite");
  for (double s : noise_sigma) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw InputError("tracking data: noise sigma must be finite and >= 0");
  }
}

std::vector<SimulationResult> collect_tracking_runs(const DynamicsModel& controller, const PlantConfig& plant_cfg,
                                                    const OcpConfig& ocp, const TrackingDataConfig& cfg) {
  cfg.validate();
  ocp.validate();
  plant_cfg.validate();
  const auto sub = static_cast<int>(std::lround(ocp.dt / cfg.sample_dt));
  if (sub < 1 || std::abs(sub * cfg.sample_dt - ocp.dt) > 1e-9) {
    throw InputError("tracking data: the control interval must be a multiple of sample_dt");
  }
  ExcitationSpec dither = ExcitationSpec::rich();
  for (auto& c : dither.channels) {
    c.amplitude *= cfg.dither_scale;
    c.offset *= cfg.dither_scale;
  }
  const auto steps = static_cast<long>(std::llround(cfg.duration / ocp.dt));
  const Eigen::Index n = steps * sub;

  std::vector<SimulationResult> runs;
  for (std::size_t i = 0; i < cfg.trajectories.size(); ++i) {
    const TrajectoryKind kind = cfg.trajectories[i];
    QuadPlant plant(plant_cfg, State12::from(cfg.x_init));
    SimulationResult r;
    r.clean_states.resize(n, kStateDim);
    r.true_derivs.resize(n, kStateDim);
    Eigen::MatrixXd inputs(n, kControlDim);
    std::optional<OcpSolution> warm;
    Vec4 previous = Vec4::Zero();
    Eigen::Index row = 0;
    for (long k = 0; k < steps; ++k) {
      const double t = static_cast<double>(k) * ocp.dt;
      const Vec12 x = plant.state().vec();
      const OcpSolution sol = solve_ocp(controller, ocp, x, reference_window(kind, t, ocp), warm ? &*warm : nullptr);
      const Vec4 current = sol.inputs.front();
      for (int s = 0; s < sub; ++s, ++row) {
        const double a = static_cast<double>(s) / sub;
        const double ts = t + s * cfg.sample_dt;
        const Vec4 u = InputBounds::project((1.0 - a) * previous + a * current + dither.evaluate(ts, cfg.duration));
        const Vec12 xs = plant.state().vec();
        r.clean_states.row(row) = xs.transpose();
        r.true_derivs.row(row) = plant.derivative(xs, u).transpose();
        inputs.row(row) = u.transpose();
        plant.step(u, cfg.sample_dt);
      }
      previous = current;
      warm = shift_solution(sol, controller, ocp);
    }

    std::mt19937_64 rng(cfg.seed + i);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd measured = r.clean_states;
    for (int c = 0; c < kStateDim; ++c) {
      const double sigma = cfg.noise_sigma[static_cast<std::size_t>(c)];
      if (sigma == 0.0) continue;
      for (Eigen::Index k = 0; k < n; ++k) measured(k, c) += sigma * normal(rng);
    }
    r.data.states = {0.0, cfg.sample_dt, std::move(measured)};
    r.data.inputs = {0.0, cfg.sample_dt, std::move(inputs)};
    runs.push_back(std::move(r));
  }
  return runs;
}

Eigen::MatrixXd predict_states(const DynamicsModel& model, const FlightDataset& data, double horizon) {
  data.validate();
  if (!(horizon > 0.0)) throw InputError("prediction horizon must be > 0");
  const double dt = data.states.dt;
  const auto every = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::llround(horizon / dt)));
  const Eigen::Index n = data.samples();
  Eigen::MatrixXd pred(n, kStateDim);
  Vec12 x = Vec12::Zero();
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k % every == 0) x = data.states.values.row(k).transpose();
    pred.row(k) = x.transpose();
    if (k + 1 < n) {
      const Vec4 u = data.inputs.values.row(k).transpose();
      x = discretize(model, x, u, dt);
      if (!x.allFinite()) throw NumericalError(model.name() + " prediction became non-finite");
    }
  }
  return pred;
}

MetricReport prediction_report(const DynamicsModel& model, const FlightDataset& data, double horizon,
                               ConcordanceKind kind) {
  const Eigen::MatrixXd pred = predict_states(model, data, horizon);
  std::vector<std::string> names(kStateNames.begin(), kStateNames.end());
  return metric_report(pred, data.states.values, names, kind);
}

}  // namespace quadid
