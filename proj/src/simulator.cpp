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

#include "quadid/simulator.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace quadid {

void PlantConfig::validate() const {
  xi.validate();
  if (!(mass > 0.0) || !std::isfinite(mass)) throw InputError("plant mass must be positive");
  if (!(g > 0.0) || !std::isfinite(g)) throw InputError("plant gravity must be positive");
  if (!(substep > 0.0) || substep > 0.1) throw InputError("plant substep must be in (0, 0.1]");
}

QuadPlant::QuadPlant(PlantConfig cfg, const State12& x0) : cfg_(std::move(cfg)), model_(cfg_.model()) {
  cfg_.validate();
  reset(x0);
}

void QuadPlant::reset(const State12& x0) {
  if (!x0.finite()) throw InputError("plant initial state is not finite");
  x_ = x0;
  last_accel_ = Vec6::Zero();
}

Vec12 QuadPlant::derivative(const Vec12& x, const Vec4& mu) const { return model_.derivative(x, mu); }

const State12& QuadPlant::step(const Vec4& mu, double dt) {
  if (!(dt > 0.0)) throw InputError("plant step: dt must be positive");
  const ControlInput input(mu);
  const int n = std::max(1, static_cast<int>(std::ceil(dt / cfg_.substep - 1e-9)));
  const double h = dt / n;
  Vec12 x = x_.vec();
  for (int i = 0; i < n; ++i) {
    if (cfg_.feedback == AccelFeedback::kImplicit) {
      const Vec12 k1 = model_.derivative(x, mu);
      const Vec12 k2 = model_.derivative(x + 0.5 * h * k1, mu);
      const Vec12 k3 = model_.derivative(x + 0.5 * h * k2, mu);
      const Vec12 k4 = model_.derivative(x + h * k3, mu);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    } else {
      const State12 s = State12::from(x);
      const InertiaParams p = model_.inertia();
      const Wrench T = pd_wrench(s, input, cfg_.xi, last_accel_);
      last_accel_ = generalized_accel(s, T, p);
      x = step_rk4(s, T, p, h).vec();
    }
    if (!x.allFinite()) throw NumericalError("plant state became non-finite");
    if (std::abs(x(4)) >= std::numbers::pi / 2.0 - kPitchSingularityMargin) {
      throw DegeneratePitchError("plant diverged: pitch reached the Euler singularity");
    }
  }
  x_ = State12::from(x);
  return x_;
}

ExcitationSpec ExcitationSpec::rich() {
  ExcitationSpec e;
  e.channels[0] = {4.0, 0.0, 0.0, false};
  e.channels[1] = {0.5, 0.0, 0.7, true};
  e.channels[2] = {0.6, 0.0, 1.9, false};
  e.channels[3] = {2.6, 0.0, 2.6, true};
  return e;
}

void ExcitationSpec::validate() const {
  if (!(f0 > 0.0) || !(f1 > 0.0)) throw InputError("excitation frequencies must be positive");
  const Vec4 hi = InputBounds::upper();
  for (int c = 0; c < 4; ++c) {
    const auto& ch = channels[static_cast<std::size_t>(c)];
    if (!std::isfinite(ch.amplitude) || !std::isfinite(ch.offset) || !std::isfinite(ch.phase)) {
      throw InputError("excitation parameters must be finite");
    }
    if (std::abs(ch.offset) + std::abs(ch.amplitude) > hi(c)) {
      throw InputError("excitation on channel " + std::string(kInputNames[static_cast<std::size_t>(c)]) +
                       " exceeds the input bounds");
    }
  }
}

Vec4 ExcitationSpec::evaluate(double t, double sweep_duration) const {
  Vec4 u;
  const double T = std::max(sweep_duration, 1e-9);
  for (int c = 0; c < 4; ++c) {
    const auto& ch = channels[static_cast<std::size_t>(c)];
    const double fa = ch.descending ? f1 : f0;
    const double fb = ch.descending ? f0 : f1;
    const double arg = 2.0 * std::numbers::pi * (fa * t + (fb - fa) * t * t / (2.0 * T)) + ch.phase;
    u(c) = ch.offset + ch.amplitude * std::sin(arg);
  }
  return InputBounds::project(u);
}

void SimulationConfig::validate() const {
  plant.validate();
  excitation.validate();
  if (!(duration >= 0.0) || !std::isfinite(duration)) throw InputError("simulation duration must be >= 0");
  if (!(sample_dt > 0.0) || sample_dt > 0.1) throw InputError("sample_dt must be in (0, 0.1]");
  if (!x0.allFinite()) throw InputError("initial state must be finite");
  for (double s : noise_sigma) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw InputError("noise sigma must be finite and >= 0");
  }
}

namespace {

/// Integrates x_dot = f(x, u(t)) over [t, t + dt] with RK4 substeps of at
/// most `substep`, evaluating the excitation at every stage time.
Vec12 advance(const DerivativeFn& f, const ExcitationSpec& ex, double sweep, const Vec12& x0, double t, double dt,
              double substep) {
  const int n = std::max(1, static_cast<int>(std::ceil(dt / substep - 1e-9)));
  const double h = dt / n;
  Vec12 x = x0;
  for (int i = 0; i < n; ++i) {
    const double ts = t + i * h;
    const Vec4 ua = ex.evaluate(ts, sweep);
    const Vec4 um = ex.evaluate(ts + 0.5 * h, sweep);
    const Vec4 ub = ex.evaluate(ts + h, sweep);
    const Vec12 k1 = f(x, ua);
    const Vec12 k2 = f(x + 0.5 * h * k1, um);
    const Vec12 k3 = f(x + 0.5 * h * k2, um);
    const Vec12 k4 = f(x + h * k3, ub);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite()) throw NumericalError("simulation state became non-finite");
    if (std::abs(x(4)) >= std::numbers::pi / 2.0 - kPitchSingularityMargin) {
      throw DegeneratePitchError("simulation diverged: pitch reached the Euler singularity");
    }
  }
  return x;
}

template <typename StepFn, typename DerivFn>
SimulationResult run(const SimulationConfig& cfg, StepFn&& step, DerivFn&& deriv) {
  cfg.validate();
  const auto n = static_cast<Eigen::Index>(std::floor(cfg.duration / cfg.sample_dt + 1e-9)) + 1;
  SimulationResult r;
  r.clean_states.resize(n, kStateDim);
  r.true_derivs.resize(n, kStateDim);
  Eigen::MatrixXd inputs(n, kControlDim);
  Vec12 x = cfg.x0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * cfg.sample_dt;
    const Vec4 u = cfg.excitation.evaluate(t, cfg.duration);
    r.clean_states.row(k) = x.transpose();
    inputs.row(k) = u.transpose();
    r.true_derivs.row(k) = deriv(x, u).transpose();
    if (k + 1 < n) x = step(x, t, cfg.sample_dt);
  }

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd measured = r.clean_states;
  for (int c = 0; c < kStateDim; ++c) {
    const double sigma = cfg.noise_sigma[static_cast<std::size_t>(c)];
    if (sigma == 0.0) continue;
    for (Eigen::Index k = 0; k < n; ++k) measured(k, c) += sigma * normal(rng);
  }
  r.data.states = {0.0, cfg.sample_dt, std::move(measured)};
  r.data.inputs = {0.0, cfg.sample_dt, std::move(inputs)};
  return r;
}

}  // namespace

SimulationResult simulate(const SimulationConfig& cfg) {
  QuadPlant plant(cfg.plant, State12::from(cfg.x0));
  const DerivativeFn f = [&](const Vec12& x, const Vec4& u) { return plant.derivative(x, u); };
  return run(
      cfg,
      [&](const Vec12& x, double t, double dt) -> Vec12 {
        if (cfg.plant.feedback == AccelFeedback::kImplicit) {
          return advance(f, cfg.excitation, cfg.duration, x, t, dt, cfg.plant.substep);
        }
        const int n = std::max(1, static_cast<int>(std::ceil(dt / cfg.plant.substep - 1e-9)));
        for (int i = 0; i < n; ++i) plant.step(cfg.excitation.evaluate(t + i * dt / n, cfg.duration), dt / n);
        return plant.state().vec();
      },
      f);
}

SimulationResult simulate_model(const DerivativeFn& f, const SimulationConfig& cfg) {
  return run(
      cfg,
      [&](const Vec12& x, double t, double dt) {
        return advance(f, cfg.excitation, cfg.duration, x, t, dt, cfg.plant.substep);
      },
      f);
}

}  // namespace quadid
