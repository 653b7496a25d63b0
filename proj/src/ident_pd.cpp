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

#include "quadid/ident_pd.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "quadid/box_qp.hpp"

namespace quadid {

namespace {

constexpr int kP = PdParams::kSize;

InertiaParams unit_inertia(int axis) {
  InertiaParams p;
  p.Ix = axis == 0 ? 1.0 : 0.0;
  p.Iy = axis == 1 ? 1.0 : 0.0;
  p.Iz = axis == 2 ? 1.0 : 0.0;
  return p;
}

}  // namespace

Vec6 wrench_residual(const PdParams& xi, const PdSample& s, double mass, double g) {
  const InertiaParams p{mass, xi.Ix(), xi.Iy(), xi.Iz(), g};
  const Vec6 T = wrench_from_accel(s.x, s.q_ddot, p).vec();
  const SMatrices S = build_s_matrices(xi);
  Vec6 mu6;
  mu6 << 0.0, 0.0, s.mu;
  const Vec6 inner = S.S1.cwiseProduct(mu6) - S.S2.cwiseProduct(s.x.q()) - S.S3.cwiseProduct(s.x.q_dot()) -
                     S.S4.cwiseProduct(s.q_ddot) + S.S5;
  return T - expanded_rotation(s.x.Omega) * inner;
}

WrenchRegressor wrench_regressor(const PdSample& s, double mass, double g) {
  WrenchRegressor reg;
  reg.A.setZero();
  reg.c.setZero();
  const Vec3 b3 = rotation_matrix(s.x.Omega).col(2);
  const Vec6 qd = s.x.q_dot();
  const Vec6& qdd = s.q_ddot;

  reg.c.head<3>() = mass * qdd.head<3>();
  reg.c(2) += mass * g;
  reg.A.block<3, 1>(0, 0) = -b3 * s.mu(0);
  reg.A.block<3, 1>(0, 6) = b3 * qd(2);
  reg.A.block<3, 1>(0, 10) = b3 * qdd(2);
  reg.A.block<3, 1>(0, 12) = -b3;

  const Vec3 ang = s.x.Omega.vec();
  reg.A(3, 1) = -s.mu(1);
  reg.A(3, 4) = ang(0);
  reg.A(3, 7) = qd(3);
  reg.A(4, 2) = -s.mu(2);
  reg.A(4, 5) = ang(1);
  reg.A(4, 8) = qd(4);
  reg.A(5, 3) = -s.mu(3);
  reg.A(5, 9) = qd(5);
  reg.A(5, 11) = qdd(5);

  const Vec3 rates = qd.tail<3>();
  for (int axis = 0; axis < 3; ++axis) {
    const InertiaParams p = unit_inertia(axis);
    reg.A.block<3, 1>(3, 13 + axis) =
        inertia_matrix(s.x.Omega, p) * qdd.tail<3>() + coriolis_matrix(s.x.Omega, rates, p) * rates;
  }
  return reg;
}

std::vector<PdSample> pd_samples(const FlightDataset& data) {
  data.validate();
  if (!data.has_derivs()) throw InputError("pd_samples: dataset has no derivatives (run preprocess first)");
  const Eigen::Index n = data.samples();
  std::vector<PdSample> out(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    auto& s = out[static_cast<std::size_t>(k)];
    s.x = State12::from(Vec12(data.states.values.row(k).transpose()));
    s.q_ddot = data.derivs.values.row(k).tail<6>().transpose();
    s.mu = data.inputs.values.row(k).transpose();
  }
  return out;
}

IdentBounds IdentBounds::defaults() {
  IdentBounds b;
  b.lo.xi.fill(-2.0);
  b.hi.xi.fill(2.0);
  for (int k = 14; k <= 16; ++k) {
    b.lo.value(k) = 1e-6;
    b.hi.value(k) = 0.1;
  }
  return b;
}

void IdentBounds::validate() const {
  for (int k = 1; k <= kP; ++k) {
    if (!std::isfinite(lo.value(k)) || !std::isfinite(hi.value(k)) || lo.value(k) > hi.value(k)) {
      throw InputError("ident bounds for xi_" + std::to_string(k) + " are not a finite interval");
    }
  }
}

std::array<bool, PdParams::kSize> default_frozen() {
  std::array<bool, kP> f{};
  for (int k : {2, 4, 6, 7, 8, 12}) f[static_cast<std::size_t>(k - 1)] = true;
  return f;
}

void IdentOptions::validate() const {
  for (double v : anchor.xi) {
    if (!std::isfinite(v)) throw InputError("ident anchor values must be finite");
  }
  if (!(lowpass_lambda >= 0.0)) throw InputError("ident lowpass_lambda must be >= 0");
  if (max_iter < 1) throw InputError("ident max_iter must be >= 1");
  if (!(grad_tol > 0.0)) throw InputError("ident grad_tol must be positive");
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw InputError("ident armijo_c must be in (0, 1)");
  if (!(svd_cutoff > 0.0 && svd_cutoff < 1.0)) throw InputError("ident svd_cutoff must be in (0, 1)");
}

namespace {

void validate_problem(const IdentProblem& pr) {
  pr.bounds.validate();
  pr.options.validate();
  if (!(pr.dt > 0.0)) throw InputError("ident dt must be positive");
  if (!(pr.mass > 0.0) || !(pr.g > 0.0)) throw InputError("ident mass and g must be positive");
  if (pr.samples.size() < static_cast<std::size_t>(10 * kP)) {
    throw InputError("identify_pd needs at least " + std::to_string(10 * kP) + " samples, got " +
                     std::to_string(pr.samples.size()));
  }
  for (const auto& s : pr.samples) {
    if (!s.x.finite() || !s.q_ddot.allFinite() || !s.mu.allFinite()) {
      throw InputError("identify_pd: non-finite sample");
    }
  }
}

/// Stacked filtered regression: rows are channel-major (c * m + k).
struct Regression {
  Eigen::MatrixXd A;
  Eigen::VectorXd c;
};

Regression build_regression(const IdentProblem& pr) {
  const auto m = static_cast<Eigen::Index>(pr.samples.size());
  std::array<Eigen::MatrixXd, 6> channel;
  for (auto& ch : channel) ch.resize(m, kP + 1);
  for (Eigen::Index k = 0; k < m; ++k) {
    const WrenchRegressor reg = wrench_regressor(pr.samples[static_cast<std::size_t>(k)], pr.mass, pr.g);
    for (int c = 0; c < 6; ++c) {
      channel[static_cast<std::size_t>(c)].row(k).head(kP) = reg.A.row(c);
      channel[static_cast<std::size_t>(c)](k, kP) = reg.c(c);
    }
  }
  Regression out;
  out.A.resize(6 * m, kP);
  out.c.resize(6 * m);
  for (int c = 0; c < 6; ++c) {
    auto& ch = channel[static_cast<std::size_t>(c)];
    if (pr.options.lowpass_lambda > 0.0) ch = lowpass(TimeSeries{0.0, pr.dt, ch}, pr.options.lowpass_lambda).values;
    out.A.middleRows(c * m, m) = ch.leftCols(kP);
    out.c.segment(c * m, m) = ch.col(kP);
  }
  return out;
}

}  // namespace

double ident_cost(const IdentProblem& pr, const PdParams& xi) {
  const auto m = static_cast<Eigen::Index>(pr.samples.size());
  if (m == 0) return 0.0;
  TimeSeries r{0.0, pr.dt, Eigen::MatrixXd(m, 6)};
  for (Eigen::Index k = 0; k < m; ++k) {
    r.values.row(k) = wrench_residual(xi, pr.samples[static_cast<std::size_t>(k)], pr.mass, pr.g).transpose();
  }
  if (pr.options.lowpass_lambda > 0.0) r = lowpass(r, pr.options.lowpass_lambda);
  double J = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    for (int c = 0; c < 6; ++c) J += r.values(k, c) * r.values(k, c);
  }
  return J * pr.dt;
}

IdentResult identify_pd(const IdentProblem& pr) {
  validate_problem(pr);
  const IdentOptions& opt = pr.options;
  IdentResult res;

  std::vector<int> free;
  Eigen::Matrix<double, kP, 1> x = pr.init.vec();
  for (int i = 0; i < kP; ++i) {
    if (opt.frozen[static_cast<std::size_t>(i)]) {
      x(i) = opt.anchor.xi[static_cast<std::size_t>(i)];
    } else {
      x(i) = std::clamp(x(i), pr.bounds.lo.xi[static_cast<std::size_t>(i)], pr.bounds.hi.xi[static_cast<std::size_t>(i)]);
      free.push_back(i);
    }
  }
  const auto nf = static_cast<Eigen::Index>(free.size());
  const Regression reg = build_regression(pr);

  Eigen::MatrixXd AF(reg.A.rows(), nf);
  Eigen::VectorXd lo(nf), hi(nf), xf(nf);
  for (Eigen::Index a = 0; a < nf; ++a) {
    const int i = free[static_cast<std::size_t>(a)];
    AF.col(a) = reg.A.col(i);
    lo(a) = pr.bounds.lo.xi[static_cast<std::size_t>(i)];
    hi(a) = pr.bounds.hi.xi[static_cast<std::size_t>(i)];
    xf(a) = x(i);
  }
  Eigen::VectorXd c0 = reg.c;
  for (int i = 0; i < kP; ++i) {
    if (opt.frozen[static_cast<std::size_t>(i)]) c0 += reg.A.col(i) * x(i);
  }

  auto cost = [&](const Eigen::VectorXd& v) { return (AF * v + c0).squaredNorm() * pr.dt; };
  const Eigen::MatrixXd H = 2.0 * pr.dt * (AF.transpose() * AF);

  // Identifiability of the free entries from the Jacobi-scaled normal matrix.
  Eigen::VectorXd d = H.diagonal();
  const double dmax = nf > 0 ? d.maxCoeff() : 0.0;
  Eigen::VectorXd scale = Eigen::VectorXd::Zero(nf);
  std::vector<bool> flagged(static_cast<std::size_t>(nf), false);
  for (Eigen::Index a = 0; a < nf; ++a) {
    if (d(a) <= 1e-14 * dmax || d(a) <= 0.0) {
      flagged[static_cast<std::size_t>(a)] = true;
    } else {
      scale(a) = 1.0 / std::sqrt(d(a));
    }
  }
  const Eigen::MatrixXd Hs = scale.asDiagonal() * H * scale.asDiagonal();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Hs);
  const double lmax = nf > 0 ? eig.eigenvalues().maxCoeff() : 0.0;
  const double cutoff = opt.svd_cutoff * lmax;
  for (Eigen::Index j = 0; j < nf; ++j) {
    if (eig.eigenvalues()(j) > cutoff) continue;
    const Eigen::VectorXd v = eig.eigenvectors().col(j);
    for (Eigen::Index a = 0; a < nf; ++a) {
      if (scale(a) != 0.0 && std::abs(v(a)) > 0.1) flagged[static_cast<std::size_t>(a)] = true;
    }
  }
  for (Eigen::Index a = 0; a < nf; ++a) {
    if (flagged[static_cast<std::size_t>(a)]) res.unidentifiable.push_back(free[static_cast<std::size_t>(a)] + 1);
  }
  res.rank_deficient = !res.unidentifiable.empty();
  if (res.rank_deficient) {
    std::ostringstream msg;
    msg << "rank-deficient regression; unidentifiable entries:";
    for (int k : res.unidentifiable) msg << " xi_" << k;
    res.warnings.push_back(msg.str());
  }

  // Smallest-norm Gauss-Newton step via the truncated pseudo-inverse.
  auto gn_step = [&](const Eigen::VectorXd& grad) {
    const Eigen::VectorXd gs = scale.cwiseProduct(grad);
    Eigen::VectorXd ps = Eigen::VectorXd::Zero(nf);
    for (Eigen::Index j = 0; j < nf; ++j) {
      const double l = eig.eigenvalues()(j);
      if (l <= cutoff) continue;
      const auto v = eig.eigenvectors().col(j);
      ps -= v * (v.dot(gs) / l);
    }
    return Eigen::VectorXd(scale.cwiseProduct(ps));
  };

  double J = cost(xf);
  res.cost_trajectory.push_back(J);
  for (int it = 0; it < opt.max_iter; ++it) {
    const Eigen::VectorXd grad = 2.0 * pr.dt * (AF.transpose() * (AF * xf + c0));
    res.gradient_norm = (xf - (xf - grad).cwiseMax(lo).cwiseMin(hi)).lpNorm<Eigen::Infinity>();
    if (res.gradient_norm <= opt.grad_tol) {
      res.converged = true;
      break;
    }
    Eigen::VectorXd p = gn_step(grad);
    const Eigen::VectorXd trial = xf + p;
    if ((trial.array() < lo.array()).any() || (trial.array() > hi.array()).any()) {
      Eigen::MatrixXd Hr = H;
      Eigen::VectorXd plo = lo - xf, phi = hi - xf;
      for (Eigen::Index a = 0; a < nf; ++a) {
        if (scale(a) == 0.0) {
          Hr(a, a) = 1.0;
          plo(a) = phi(a) = 0.0;
        } else {
          Hr(a, a) += std::max(cutoff, 1e-12) * d(a);
        }
      }
      const Eigen::VectorXd zero = Eigen::VectorXd::Zero(nf);
      p = solve_box_qp(Hr, grad, plo, phi, &zero).x;
    }
    const double slope = grad.dot(p);
    if (!(slope < 0.0)) {
      res.converged = true;
      break;
    }
    double alpha = 1.0;
    double J_new = cost(xf + p);
    int backtracks = 0;
    while (J_new > J + opt.armijo_c * alpha * slope && backtracks < 40) {
      alpha *= 0.5;
      J_new = cost(xf + alpha * p);
      ++backtracks;
    }
    if (J_new > J + opt.armijo_c * alpha * slope) {
      res.warnings.push_back("line search failed to satisfy the Armijo condition");
      break;
    }
    xf += alpha * p;
    xf = xf.cwiseMax(lo).cwiseMin(hi);
    const double decrease = J - J_new;
    J = cost(xf);
    res.cost_trajectory.push_back(J);
    ++res.iterations;
    if (decrease <= 1e-13 * std::max(J, 1e-300) ||
        (alpha * p).lpNorm<Eigen::Infinity>() <= 1e-13 * (1.0 + xf.lpNorm<Eigen::Infinity>())) {
      res.converged = true;
      break;
    }
  }
  if (!res.converged) res.warnings.push_back("identify_pd stopped before convergence; returning last iterate");

  for (Eigen::Index a = 0; a < nf; ++a) x(free[static_cast<std::size_t>(a)]) = xf(a);
  res.xi_hat = PdParams::from(x);

  Eigen::Array<double, 6, 1> ss = Eigen::Array<double, 6, 1>::Zero();
  for (const auto& s : pr.samples) ss += wrench_residual(res.xi_hat, s, pr.mass, pr.g).array().square();
  res.residual_rms = (ss / static_cast<double>(pr.samples.size())).sqrt().matrix();
  return res;
}

nlohmann::json to_json(const IdentResult& r) {
  static const char* kChannels[6] = {"F_x", "F_y", "F_z", "tau_phi", "tau_theta", "tau_psi"};
  nlohmann::json rms = nlohmann::json::object();
  for (int c = 0; c < 6; ++c) rms[kChannels[c]] = r.residual_rms(c);
  return {{"xi", r.xi_hat.xi},
          {"cost_trajectory", r.cost_trajectory},
          {"residual_rms", rms},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"rank_deficient", r.rank_deficient},
          {"unidentifiable", r.unidentifiable},
          {"gradient_norm", r.gradient_norm},
          {"warnings", r.warnings}};
}

}  // namespace quadid
