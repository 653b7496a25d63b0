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

#include "quadid/mpc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "quadid/box_qp.hpp"

namespace quadid {

void DynamicsModel::jacobian(const Vec12& x, const Vec4& u, Mat12& A, Mat12x4& B) const {
  Vec12 xp = x, xm = x;
  for (int j = 0; j < kStateDim; ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(x(j)));
    xp(j) = x(j) + h;
    xm(j) = x(j) - h;
    A.col(j) = (derivative(xp, u) - derivative(xm, u)) / (2.0 * h);
    xp(j) = xm(j) = x(j);
  }
  Vec4 up = u, um = u;
  for (int j = 0; j < kControlDim; ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(u(j)));
    up(j) = u(j) + h;
    um(j) = u(j) - h;
    B.col(j) = (derivative(x, up) - derivative(x, um)) / (2.0 * h);
    up(j) = um(j) = u(j);
  }
}

SindyDynamics::SindyDynamics(SparseModel model, bool wrap_yaw) : model_(std::move(model)), wrap_yaw_(wrap_yaw) {
  if (model_.state_dim() != kStateDim || model_.control_dim() != kControlDim) {
    throw InputError("SINDy model for MPC must have 12 states and 4 inputs");
  }
}

Vec12 discretize(const DynamicsModel& f, const Vec12& x, const Vec4& u, double dt) {
  return discretize(f, x, u, dt, 1, nullptr, nullptr);
}

Vec12 discretize(const DynamicsModel& f, const Vec12& x, const Vec4& u, double dt, int substeps, Mat12* A,
                 Mat12x4* B) {
  if (!(dt > 0.0)) throw InputError("discretize: dt must be positive");
  if (substeps < 1) throw InputError("discretize: substeps must be >= 1");
  const double h = dt / substeps;
  const bool sens = A != nullptr && B != nullptr;
  Vec12 X = x;
  if (sens) {
    A->setIdentity();
    B->setZero();
  }
  Mat12 J1, J2, J3, J4, D1x, D2x, D3x, D4x;
  Mat12x4 G1, G2, G3, G4, D1u, D2u, D3u, D4u;
  const Mat12 I = Mat12::Identity();
  for (int s = 0; s < substeps; ++s) {
    const Vec12 k1 = f.derivative(X, u);
    const Vec12 X2 = X + 0.5 * h * k1;
    const Vec12 k2 = f.derivative(X2, u);
    const Vec12 X3 = X + 0.5 * h * k2;
    const Vec12 k3 = f.derivative(X3, u);
    const Vec12 X4 = X + h * k3;
    const Vec12 k4 = f.derivative(X4, u);
    if (sens) {
      f.jacobian(X, u, J1, G1);
      f.jacobian(X2, u, J2, G2);
      f.jacobian(X3, u, J3, G3);
      f.jacobian(X4, u, J4, G4);
      D1x = J1;
      D1u = G1;
      D2x.noalias() = J2 * (I + 0.5 * h * D1x);
      D2u.noalias() = J2 * (0.5 * h * D1u);
      D2u += G2;
      D3x.noalias() = J3 * (I + 0.5 * h * D2x);
      D3u.noalias() = J3 * (0.5 * h * D2u);
      D3u += G3;
      D4x.noalias() = J4 * (I + h * D3x);
      D4u.noalias() = J4 * (h * D3u);
      D4u += G4;
      const Mat12 Phi = I + (h / 6.0) * (D1x + 2.0 * D2x + 2.0 * D3x + D4x);
      const Mat12x4 Gam = (h / 6.0) * (D1u + 2.0 * D2u + 2.0 * D3u + D4u);
      const Mat12x4 Bn = Phi * (*B) + Gam;
      const Mat12 An = Phi * (*A);
      *A = An;
      *B = Bn;
    }
    X += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  if (!X.allFinite()) throw NumericalError("model prediction became non-finite");
  return X;
}

Mat12 OcpConfig::default_q() {
  Mat12 q = Mat12::Zero();
  q.diagonal().head<3>().setConstant(2.0);
  return q;
}

void OcpConfig::validate() const {
  if (N < 1) throw InputError("OCP horizon N must be >= 1");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InputError("OCP dt must be positive");
  if (substeps < 1) throw InputError("OCP substeps must be >= 1");
  if (max_sqp_iter < 1) throw InputError("OCP max_sqp_iter must be >= 1");
  if (!Q.allFinite() || (Q - Q.transpose()).lpNorm<Eigen::Infinity>() > 1e-12) {
    throw InputError("OCP Q must be finite and symmetric");
  }
  if (Eigen::SelfAdjointEigenSolver<Mat12>(Q).eigenvalues().minCoeff() < -1e-12) {
    throw InputError("OCP Q must be positive semidefinite");
  }
  if (!R.allFinite() || (R - R.transpose()).lpNorm<Eigen::Infinity>() > 1e-12 ||
      Eigen::LLT<Eigen::Matrix4d>(R).info() != Eigen::Success) {
    throw InputError("OCP R must be symmetric positive definite");
  }
  const Vec4 hi = InputBounds::upper();
  for (int i = 0; i < kControlDim; ++i) {
    if (!(lower(i) <= upper(i))) throw InputError("OCP input bounds cross");
    if (lower(i) < -hi(i) || upper(i) > hi(i)) throw InputError("OCP input bounds exceed the vehicle limits");
  }
  if (!std::isfinite(psi_ref)) throw InputError("OCP psi_ref must be finite");
}

ReferenceWindow reference_window(TrajectoryKind kind, double t0, const OcpConfig& cfg) {
  ReferenceWindow refs(static_cast<std::size_t>(cfg.N + 1), Vec12::Zero());
  for (int k = 0; k <= cfg.N; ++k) {
    const ReferenceSample r = reference_position(kind, t0 + k * cfg.dt);
    Vec12& x = refs[static_cast<std::size_t>(k)];
    x.head<3>() = r.position;
    x(5) = cfg.psi_ref;
    if (cfg.velocity_feedforward) x.segment<3>(6) = r.velocity;
  }
  return refs;
}

namespace {

/// Square-root weights: Q = Qh' Qh (rank rows), R = Rh' Rh.
struct Weights {
  Eigen::MatrixXd Qh;
  Eigen::Matrix4d Rh;
};

Weights factor_weights(const OcpConfig& cfg) {
  Weights w;
  const Eigen::SelfAdjointEigenSolver<Mat12> eig(cfg.Q);
  const double tol = 1e-12 * std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  int rank = 0;
  for (int i = 0; i < kStateDim; ++i) rank += eig.eigenvalues()(i) > tol ? 1 : 0;
  w.Qh.resize(rank, kStateDim);
  int row = 0;
  for (int i = 0; i < kStateDim; ++i) {
    if (eig.eigenvalues()(i) > tol) {
      w.Qh.row(row++) = std::sqrt(eig.eigenvalues()(i)) * eig.eigenvectors().col(i).transpose();
    }
  }
  w.Rh = Eigen::LLT<Eigen::Matrix4d>(cfg.R).matrixU();
  return w;
}

void check_inputs(const OcpConfig& cfg, const Vec12& x0, const ReferenceWindow& refs) {
  cfg.validate();
  if (!x0.allFinite()) throw InputError("solve_ocp: x0 is not finite");
  if (refs.size() != static_cast<std::size_t>(cfg.N + 1)) {
    throw InputError("solve_ocp: reference window must have N + 1 entries");
  }
}

/// Condensed Gauss-Newton QP of one linearization.
struct Condensed {
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  std::vector<Eigen::MatrixXd> S;  // d s_k / d u, 12 x 4N
  std::vector<Vec12> e;            // state deltas from the defects
  double defect = 0.0;
};

Condensed condense(const DynamicsModel& model, const OcpConfig& cfg, const Weights& w, const std::vector<Vec12>& s,
                   const std::vector<Vec4>& u, const ReferenceWindow& refs) {
  const int N = cfg.N;
  const int nu = kControlDim * N;
  const auto r = w.Qh.rows();
  Condensed c;
  c.S.assign(static_cast<std::size_t>(N + 1), Eigen::MatrixXd::Zero(kStateDim, nu));
  c.e.assign(static_cast<std::size_t>(N + 1), Vec12::Zero());
  Mat12 A;
  Mat12x4 B;
  for (int k = 0; k < N; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const Vec12 F = discretize(model, s[ks], u[ks], cfg.dt, cfg.substeps, &A, &B);
    const Vec12 d = F - s[ks + 1];
    c.defect = std::max(c.defect, d.lpNorm<Eigen::Infinity>());
    if (k > 0) c.S[ks + 1].leftCols(kControlDim * k).noalias() = A * c.S[ks].leftCols(kControlDim * k);
    c.S[ks + 1].middleCols(kControlDim * k, kControlDim) = B;
    c.e[ks + 1] = A * c.e[ks] + d;
  }
  const Eigen::Index rows = r * (N + 1) + nu;
  Eigen::MatrixXd Jr = Eigen::MatrixXd::Zero(rows, nu);
  Eigen::VectorXd rho(rows);
  for (int k = 0; k <= N; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    Jr.block(r * k, 0, r, nu).noalias() = w.Qh * c.S[ks];
    rho.segment(r * k, r) = w.Qh * (s[ks] + c.e[ks] - refs[ks]);
  }
  const Eigen::Index off = r * (N + 1);
  for (int k = 0; k < N; ++k) {
    Jr.block(off + kControlDim * k, kControlDim * k, kControlDim, kControlDim) = w.Rh;
    rho.segment(off + kControlDim * k, kControlDim) = w.Rh * u[static_cast<std::size_t>(k)];
  }
  c.H.noalias() = Jr.transpose() * Jr;
  c.g.noalias() = Jr.transpose() * rho;
  return c;
}

double node_cost(const OcpConfig& cfg, const std::vector<Vec12>& s, const std::vector<Vec4>& u,
                 const ReferenceWindow& refs) {
  double J = 0.0;
  for (int k = 0; k <= cfg.N; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const Vec12 e = s[ks] - refs[ks];
    J += 0.5 * e.dot(cfg.Q * e);
    if (k < cfg.N) J += 0.5 * u[ks].dot(cfg.R * u[ks]);
  }
  return J;
}

std::vector<Vec12> rollout(const DynamicsModel& model, const OcpConfig& cfg, const Vec12& x0,
                           const std::vector<Vec4>& u) {
  std::vector<Vec12> s(static_cast<std::size_t>(cfg.N + 1));
  s[0] = x0;
  for (int k = 0; k < cfg.N; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    s[ks + 1] = discretize(model, s[ks], u[ks], cfg.dt, cfg.substeps, nullptr, nullptr);
  }
  return s;
}

std::vector<Vec4> unstack(const OcpConfig& cfg, const Eigen::VectorXd& u) {
  if (u.size() != kControlDim * cfg.N) throw InputError("stacked input vector must have 4N entries");
  std::vector<Vec4> out(static_cast<std::size_t>(cfg.N));
  for (int k = 0; k < cfg.N; ++k) out[static_cast<std::size_t>(k)] = u.segment<kControlDim>(kControlDim * k);
  return out;
}

Eigen::VectorXd stacked(const std::vector<Vec4>& u) {
  Eigen::VectorXd v(kControlDim * static_cast<Eigen::Index>(u.size()));
  for (std::size_t k = 0; k < u.size(); ++k) v.segment<kControlDim>(kControlDim * static_cast<Eigen::Index>(k)) = u[k];
  return v;
}

}  // namespace

double ocp_rollout_cost(const DynamicsModel& model, const OcpConfig& cfg, const Vec12& x0, const ReferenceWindow& refs,
                        const Eigen::VectorXd& u) {
  check_inputs(cfg, x0, refs);
  const auto uu = unstack(cfg, u);
  return node_cost(cfg, rollout(model, cfg, x0, uu), uu, refs);
}

Eigen::VectorXd ocp_rollout_gradient(const DynamicsModel& model, const OcpConfig& cfg, const Vec12& x0,
                                     const ReferenceWindow& refs, const Eigen::VectorXd& u) {
  check_inputs(cfg, x0, refs);
  const auto uu = unstack(cfg, u);
  return condense(model, cfg, factor_weights(cfg), rollout(model, cfg, x0, uu), uu, refs).g;
}

OcpSolution shift_solution(const OcpSolution& sol, const DynamicsModel& model, const OcpConfig& cfg) {
  if (sol.inputs.size() != static_cast<std::size_t>(cfg.N) || sol.states.size() != static_cast<std::size_t>(cfg.N + 1)) {
    throw InputError("shift_solution: solution does not match the horizon");
  }
  OcpSolution out = sol;
  for (int k = 0; k + 1 < cfg.N; ++k) out.inputs[static_cast<std::size_t>(k)] = sol.inputs[static_cast<std::size_t>(k + 1)];
  for (int k = 0; k < cfg.N; ++k) out.states[static_cast<std::size_t>(k)] = sol.states[static_cast<std::size_t>(k + 1)];
  const auto last = static_cast<std::size_t>(cfg.N);
  out.states[last] = discretize(model, sol.states[last], out.inputs[last - 1], cfg.dt, cfg.substeps, nullptr, nullptr);
  return out;
}

OcpSolution solve_ocp(const DynamicsModel& model, const OcpConfig& cfg, const Vec12& x0, const ReferenceWindow& refs,
                      const OcpSolution* warm) {
  check_inputs(cfg, x0, refs);
  const int N = cfg.N;
  const Weights w = factor_weights(cfg);
  Eigen::VectorXd lo(kControlDim * N), hi(kControlDim * N);
  for (int k = 0; k < N; ++k) {
    lo.segment<kControlDim>(kControlDim * k) = cfg.lower;
    hi.segment<kControlDim>(kControlDim * k) = cfg.upper;
  }

  OcpSolution sol;
  const bool warm_ok = warm != nullptr && warm->inputs.size() == static_cast<std::size_t>(N) &&
                       warm->states.size() == static_cast<std::size_t>(N + 1);
  if (warm_ok) {
    sol.inputs = warm->inputs;
    for (auto& u : sol.inputs) u = u.cwiseMax(cfg.lower).cwiseMin(cfg.upper);
  } else {
    sol.inputs.assign(static_cast<std::size_t>(N), Vec4::Zero().cwiseMax(cfg.lower).cwiseMin(cfg.upper));
  }
  if (cfg.rti && warm_ok) {
    sol.states = warm->states;
    sol.states[0] = x0;
  } else {
    sol.states = rollout(model, cfg, x0, sol.inputs);
  }

  const int iters = cfg.rti ? 1 : cfg.max_sqp_iter;
  double J = node_cost(cfg, sol.states, sol.inputs, refs);
  sol.cost_history.push_back(J);
  for (int it = 0; it < iters; ++it) {
    const Condensed c = condense(model, cfg, w, sol.states, sol.inputs, refs);
    const Eigen::VectorXd u = stacked(sol.inputs);
    const Eigen::VectorXd dlo = lo - u, dhi = hi - u;
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(u.size());
    const double kkt = std::max(box_qp_kkt_residual(c.H, c.g, dlo, dhi, zero), c.defect);
    sol.kkt_history.push_back(kkt);
    sol.kkt_residual = kkt;
    ++sol.sqp_iterations;
    if (!cfg.rti && kkt <= 1e-10) break;

    const BoxQpResult qp = solve_box_qp(c.H, c.g, dlo, dhi, &zero);
    const Eigen::VectorXd& du = qp.x;
    if (cfg.rti) {
      for (int k = 0; k <= N; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        sol.states[ks] += c.e[ks] + c.S[ks] * du;
      }
      sol.inputs = unstack(cfg, (u + du).cwiseMax(lo).cwiseMin(hi));
      sol.states[0] = x0;
      J = node_cost(cfg, sol.states, sol.inputs, refs);
      sol.cost_history.push_back(J);
      break;
    }

    const double slope = c.g.dot(du);
    if (!(slope < 0.0)) break;
    double alpha = 1.0;
    std::vector<Vec4> trial_u;
    std::vector<Vec12> trial_s;
    double J_trial = 0.0;
    bool accepted = false;
    for (int bt = 0; bt < 30; ++bt, alpha *= 0.5) {
      trial_u = unstack(cfg, (u + alpha * du).cwiseMax(lo).cwiseMin(hi));
      trial_s = rollout(model, cfg, x0, trial_u);
      J_trial = node_cost(cfg, trial_s, trial_u, refs);
      if (J_trial <= J + 1e-4 * alpha * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    sol.inputs = std::move(trial_u);
    sol.states = std::move(trial_s);
    J = J_trial;
    sol.cost_history.push_back(J);
    if ((alpha * du).lpNorm<Eigen::Infinity>() <= 1e-10) break;
  }
  sol.cost = J;
  return sol;
}

Eigen::MatrixXd TrackingLog::positions() const {
  Eigen::MatrixXd p(static_cast<Eigen::Index>(states.size()), 3);
  for (std::size_t k = 0; k < states.size(); ++k) p.row(static_cast<Eigen::Index>(k)) = states[k].head<3>().transpose();
  return p;
}

Eigen::MatrixXd TrackingLog::reference_positions() const {
  Eigen::MatrixXd p(static_cast<Eigen::Index>(reference.size()), 3);
  for (std::size_t k = 0; k < reference.size(); ++k) p.row(static_cast<Eigen::Index>(k)) = reference[k].transpose();
  return p;
}

TrackingLog track(const DynamicsModel& model, const PlantStep& plant, TrajectoryKind trajectory, const OcpConfig& cfg,
                  double duration, const Vec12& x_init) {
  cfg.validate();
  if (!(duration >= 0.0)) throw InputError("track: duration must be >= 0");
  TrackingLog log;
  log.model = model.name();
  log.trajectory = std::string(trajectory_name(trajectory));
  const auto steps = static_cast<long>(std::llround(duration / cfg.dt));
  Vec12 x = x_init;
  std::optional<OcpSolution> warm;
  for (long i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) * cfg.dt;
    const ReferenceWindow refs = reference_window(trajectory, t, cfg);
    const auto start = std::chrono::steady_clock::now();
    OcpSolution sol;
    try {
      sol = solve_ocp(model, cfg, x, refs, warm ? &*warm : nullptr);
    } catch (const NumericalError& e) {
      log.aborted = true;
      log.abort_reason = std::string("solver: ") + e.what();
      break;
    }
    const auto stop = std::chrono::steady_clock::now();
    const Vec4 u0 = sol.inputs.front().cwiseMax(cfg.lower).cwiseMin(cfg.upper);
    log.t.push_back(t);
    log.states.push_back(x);
    log.inputs.push_back(u0);
    log.reference.push_back(refs.front().head<3>());
    log.cost.push_back(sol.cost);
    log.kkt.push_back(sol.kkt_residual);
    log.solve_ms.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
    try {
      x = plant(u0, cfg.dt);
    } catch (const NumericalError& e) {
      log.aborted = true;
      log.abort_reason = std::string("plant: ") + e.what();
      break;
    }
    try {
      warm = shift_solution(sol, model, cfg);
    } catch (const NumericalError&) {
      warm.reset();
    }
  }
  return log;
}

nlohmann::json tracking_summary(const TrackingLog& log, const OcpConfig& cfg, ConcordanceKind kind) {
  nlohmann::json j;
  j["model"] = log.model;
  j["trajectory"] = log.trajectory;
  j["steps"] = log.size();
  j["aborted"] = log.aborted;
  if (log.aborted) j["abort_reason"] = log.abort_reason;
  if (log.size() > 0) {
    const TrackingMetrics m = tracking_metrics(log.positions(), log.reference_positions(), kind);
    j["rmse"] = m.rmse_3d;
    j["mae"] = m.mae_3d;
    j["concordance"] = m.axes.concordance.aggregate;
    j["per_axis"] = to_json(m.axes);
  }
  j["metadata"] = {{"N", cfg.N},
                   {"dt", cfg.dt},
                   {"rti", cfg.rti},
                   {"substeps", cfg.substeps},
                   {"velocity_feedforward", cfg.velocity_feedforward},
                   {"psi_ref", cfg.psi_ref}};
  return j;
}

nlohmann::json timing_summary(const TrackingLog& log) {
  nlohmann::json j;
  j["model"] = log.model;
  j["trajectory"] = log.trajectory;
  j["samples"] = log.solve_ms.size();
  if (log.solve_ms.empty()) return j;
  std::vector<double> ms = log.solve_ms;
  std::sort(ms.begin(), ms.end());
  const auto at = [&](double q) { return ms[static_cast<std::size_t>(std::floor(q * static_cast<double>(ms.size() - 1)))]; };
  double total = 0.0;
  for (double v : ms) total += v;
  j["mean_ms"] = total / static_cast<double>(ms.size());
  j["median_ms"] = at(0.5);
  j["p95_ms"] = at(0.95);
  j["max_ms"] = ms.back();
  j["min_ms"] = ms.front();
  return j;
}

}  // namespace quadid
