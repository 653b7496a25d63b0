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

// Ground-truth vehicle for data generation and closed-loop tracking: the
// Euler-Lagrange body driven by the PD inner loop.
#pragma once

#include <array>
#include <cstdint>
#include <functional>

#include "quadid/pd_model.hpp"
#include "quadid/signals.hpp"

namespace quadid {

/// kImplicit solves the closed loop for q_ddot at every evaluation.
/// kDelayed feeds back the acceleration of the previous substep instead.
enum class AccelFeedback { kImplicit, kDelayed };

struct PlantConfig {
  PdParams xi = plant_reference_xi();
  double mass = hover_mass(plant_reference_xi(), 9.81);
  double g = 9.81;
  /// Upper bound on the internal RK4 step.
  double substep = 1e-3;
  AccelFeedback feedback = AccelFeedback::kImplicit;

  void validate() const;
  PdModel model() const { return {xi, mass, g}; }
};

class QuadPlant {
 public:
  explicit QuadPlant(PlantConfig cfg, const State12& x0 = {});

  void reset(const State12& x0);
  const State12& state() const { return x_; }
  const PlantConfig& config() const { return cfg_; }

  /// Holds mu for dt seconds. Throws InputError if mu is outside InputBounds,
  /// DegeneratePitchError if the pitch reaches the singularity and
  /// NumericalError if the state stops being finite.
  const State12& step(const Vec4& mu, double dt);

  /// Closed-loop derivative in implicit mode.
  Vec12 derivative(const Vec12& x, const Vec4& mu) const;

 private:
  PlantConfig cfg_;
  PdModel model_;
  State12 x_;
  Vec6 last_accel_ = Vec6::Zero();
};

/// Linear chirp on one input channel:
/// u(t) = offset + amplitude sin(2 pi (f_a t + (f_b - f_a) t^2 / (2 T)) + phase)
/// sweeping f_a -> f_b (f0 -> f1, or f1 -> f0 when descending) over T seconds.
struct ChirpChannel {
  double amplitude = 0.0;
  double offset = 0.0;
  double phase = 0.0;
  bool descending = false;
};

struct ExcitationSpec {
  double f0 = 0.05;
  double f1 = 2.0;
  std::array<ChirpChannel, 4> channels{};

  /// Near-bound chirps on all four channels with distinct sweeps and phases.
  static ExcitationSpec rich();
  /// Throws InputError if any channel can leave InputBounds.
  void validate() const;
  Vec4 evaluate(double t, double sweep_duration) const;
};

struct SimulationConfig {
  PlantConfig plant;
  ExcitationSpec excitation = ExcitationSpec::rich();
  double duration = 60.0;
  double sample_dt = 0.002;
  Vec12 x0 = Vec12::Zero();
  /// Additive Gaussian measurement noise per state channel.
  std::array<double, 12> noise_sigma{};
  std::uint64_t seed = 0;

  void validate() const;
};

struct SimulationResult {
  /// Measured (noisy) states and applied inputs; derivs left empty.
  FlightDataset data;
  Eigen::MatrixXd clean_states;
  /// Exact closed-loop derivative at every sample.
  Eigen::MatrixXd true_derivs;
};

using DerivativeFn = std::function<Vec12(const Vec12&, const Vec4&)>;

/// Simulates the ground-truth plant under the configured excitation. The
/// excitation acts as a continuous-time command (evaluated at every RK4 stage
/// in implicit mode, held per substep in delayed mode); states and inputs are
/// recorded every sample_dt.
SimulationResult simulate(const SimulationConfig& cfg);

/// Same sampling, excitation and noise handling for an arbitrary model
/// x_dot = f(x, u), integrated with RK4 steps of at most cfg.plant.substep.
SimulationResult simulate_model(const DerivativeFn& f, const SimulationConfig& cfg);

}  // namespace quadid
