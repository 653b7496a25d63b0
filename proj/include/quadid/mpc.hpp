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

// Nonlinear MPC by multiple shooting. Each SQP iteration linearizes the
// discretized model around the shooting nodes, condenses the state deltas
// into the input deltas and solves the resulting box-constrained
// Gauss-Newton QP with the active-set solver.
#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "quadid/eval.hpp"
#include "quadid/pd_model.hpp"
#include "quadid/sindy.hpp"

namespace quadid {

/// Plug-in continuous-time model x_dot = f(x, u).
class DynamicsModel {
 public:
  virtual ~DynamicsModel() = default;
  virtual Vec12 derivative(const Vec12& x, const Vec4& u) const = 0;
  /// Default: central finite differences of derivative().
  virtual void jacobian(const Vec12& x, const Vec4& u, Mat12& A, Mat12x4& B) const;
  virtual std::string name() const = 0;
};

class PdDynamics final : public DynamicsModel {
 public:
  explicit PdDynamics(PdModel model) : model_(std::move(model)) {}
  Vec12 derivative(const Vec12& x, const Vec4& u) const override { return model_.derivative(x, u); }
  std::string name() const override { return "pd"; }
  const PdModel& model() const { return model_; }

 private:
  PdModel model_;
};

/// With wrap_yaw the model sees psi mapped to [-pi, pi], matching a model
/// trained on wrap_yaw() data.
class SindyDynamics final : public DynamicsModel {
 public:
  explicit SindyDynamics(SparseModel model, bool wrap_yaw = false);
  Vec12 derivative(const Vec12& x, const Vec4& u) const override { return model_.derivative(view(x), u); }
  void jacobian(const Vec12& x, const Vec4& u, Mat12& A, Mat12x4& B) const override {
    model_.jacobian(view(x), u, A, B);
  }
  std::string name() const override { return "sindy"; }
  const SparseModel& model() const { return model_; }
  bool wrap_yaw() const { return wrap_yaw_; }

 private:
  Vec12 view(const Vec12& x) const {
    if (!wrap_yaw_) return x;
    Vec12 y = x;
    y(5) = wrap_angle(y(5));
    return y;
  }

  SparseModel model_;
  bool wrap_yaw_ = false;
};

/// Wraps any derivative function; the Jacobian comes from finite differences.
class FunctionDynamics final : public DynamicsModel {
 public:
  using Fn = std::function<Vec12(const Vec12&, const Vec4&)>;
  FunctionDynamics(Fn f, std::string name) : f_(std::move(f)), name_(std::move(name)) {}
  Vec12 derivative(const Vec12& x, const Vec4& u) const override { return f_(x, u); }
  std::string name() const override { return name_; }

 private:
  Fn f_;
  std::string name_;
};

/// One classical RK4 step of the model. Requires dt > 0.
Vec12 discretize(const DynamicsModel& f, const Vec12& x, const Vec4& u, double dt);

/// Discrete map F = `substeps` RK4 steps of dt / substeps, with its exact
/// sensitivities A = dF/dx, B = dF/du when requested.
Vec12 discretize(const DynamicsModel& f, const Vec12& x, const Vec4& u, double dt, int substeps, Mat12* A,
                 Mat12x4* B);

struct OcpConfig {
  int N = 30;
  double dt = 1.0 / 30.0;
  Mat12 Q = default_q();
  Eigen::Matrix4d R = 0.1 * Eigen::Matrix4d::Identity();
  Vec4 lower = InputBounds::lower();
  Vec4 upper = InputBounds::upper();
  int max_sqp_iter = 10;
  /// One full SQP step per solve from the (shifted) warm start.
  bool rti = true;
  /// RK4 substeps per control interval inside the prediction model.
  int substeps = 4;
  /// Fill the velocity channels of the reference from the trajectory derivative.
  bool velocity_feedforward = true;
  double psi_ref = 0.0;

  /// 2 on the three position channels, 0 elsewhere.
  static Mat12 default_q();
  /// Throws InputError on N < 1, dt <= 0, asymmetric or indefinite weights,
  /// R not positive definite, or crossing bounds.
  void validate() const;
};

/// N + 1 reference states.
using ReferenceWindow = std::vector<Vec12>;

ReferenceWindow reference_window(TrajectoryKind kind, double t0, const OcpConfig& cfg);

struct OcpSolution {
  std::vector<Vec4> inputs;   // N
  std::vector<Vec12> states;  // N + 1, states[0] = x0
  double cost = 0.0;
  /// max(projected-gradient inf-norm, defect inf-norm) at the linearization
  /// point of the last SQP iteration.
  double kkt_residual = 0.0;
  std::vector<double> kkt_history;
  std::vector<double> cost_history;
  int sqp_iterations = 0;
};

/// Solves the tracking OCP. rti = true takes exactly one full multiple-shooting
/// Gauss-Newton step from the warm start (shifted by the caller) or from a
/// rollout of zero inputs. rti = false iterates condensed Gauss-Newton steps
/// on the rolled-out trajectory with Armijo backtracking on the cost, up to
/// max_sqp_iter. Inputs always lie inside [lower, upper].
OcpSolution solve_ocp(const DynamicsModel& model, const OcpConfig& cfg, const Vec12& x0, const ReferenceWindow& refs,
                      const OcpSolution* warm = nullptr);

/// Cost of the trajectory obtained by rolling the discretized model out
/// from x0 under inputs u (4N stacked).
double ocp_rollout_cost(const DynamicsModel& model, const OcpConfig& cfg, const Vec12& x0, const ReferenceWindow& refs,
                        const Eigen::VectorXd& u);

/// Gauss-Newton (exact for this least-squares cost) gradient of
/// ocp_rollout_cost with respect to the stacked inputs.
Eigen::VectorXd ocp_rollout_gradient(const DynamicsModel& model, const OcpConfig& cfg, const Vec12& x0,
                                     const ReferenceWindow& refs, const Eigen::VectorXd& u);

/// Shifts a solution one interval forward for warm starting; the last input
/// is repeated and the last state re-propagated.
OcpSolution shift_solution(const OcpSolution& sol, const DynamicsModel& model, const OcpConfig& cfg);

struct TrackingLog {
  std::string model;
  std::string trajectory;
  std::vector<double> t;
  std::vector<Vec12> states;
  std::vector<Vec4> inputs;
  std::vector<Vec3> reference;
  std::vector<double> cost;
  std::vector<double> kkt;
  std::vector<double> solve_ms;
  bool aborted = false;
  std::string abort_reason;

  std::size_t size() const { return t.size(); }
  Eigen::MatrixXd positions() const;
  Eigen::MatrixXd reference_positions() const;
};

/// Plant closure: advance the true system by dt under u and return its state.
using PlantStep = std::function<Vec12(const Vec4& u, double dt)>;

/// Receding-horizon loop over round(duration / cfg.dt) control intervals.
/// Logs the measured state, the applied input, the reference position and
/// solver statistics at every step. A NumericalError from the solver or the
/// plant (divergence, non-finite prediction) ends the run early with
/// aborted = true and the partial log. A warm start that cannot be shifted
/// is dropped and the next step starts cold.
TrackingLog track(const DynamicsModel& model, const PlantStep& plant, TrajectoryKind trajectory,
                  const OcpConfig& cfg, double duration, const Vec12& x_init);

/// Summary metrics of a log and the OCP settings. Contains no wall
/// times, so identical runs give identical summaries.
nlohmann::json tracking_summary(const TrackingLog& log, const OcpConfig& cfg,
                                ConcordanceKind kind = ConcordanceKind::kWillmott);

/// Solve-time statistics of a log: mean, median, p95, min and max in ms.
nlohmann::json timing_summary(const TrackingLog& log);

}  // namespace quadid
