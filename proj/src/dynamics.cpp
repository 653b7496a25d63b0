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

#include "quadid/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace quadid {

Vec6 State12::q() const {
  Vec6 out;
  out << eta, Omega.vec();
  return out;
}

Vec6 State12::q_dot() const {
  Vec6 out;
  out << eta_dot, Omega_dot;
  return out;
}

Vec12 State12::vec() const {
  Vec12 out;
  out << eta, Omega.vec(), eta_dot, Omega_dot;
  return out;
}

State12 State12::from(const Vec12& x) {
  State12 s;
  s.eta = x.segment<3>(0);
  s.Omega = EulerAngles::from(x.segment<3>(3));
  s.eta_dot = x.segment<3>(6);
  s.Omega_dot = x.segment<3>(9);
  return s;
}

State12 State12::from(const Vec6& q, const Vec6& q_dot) {
  Vec12 x;
  x << q, q_dot;
  return from(x);
}

void InertiaParams::validate() const {
  auto check = [](double v, const char* name) {
    if (!(std::isfinite(v) && v > 0.0)) {
      std::ostringstream msg;
      msg << "inertia parameter '" << name << "' must be positive and finite, got " << v;
      throw InputError(msg.str());
    }
  };
  check(mass, "mass");
  check(Ix, "Ix");
  check(Iy, "Iy");
  check(Iz, "Iz");
  check(g, "g");
}

Vec6 Wrench::vec() const {
  Vec6 out;
  out << force_inertial, torque_body;
  return out;
}

Wrench Wrench::from(const Vec6& t) { return {t.head<3>(), t.tail<3>()}; }

Mat3 rotation_matrix(const EulerAngles& Omega) {
  const double cf = std::cos(Omega.phi), sf = std::sin(Omega.phi);
  const double ct = std::cos(Omega.theta), st = std::sin(Omega.theta);
  const double cp = std::cos(Omega.psi), sp = std::sin(Omega.psi);
  Mat3 R;
  R << cp * ct, cp * st * sf - sp * cf, cp * st * cf + sp * sf,
       sp * ct, sp * st * sf + cp * cf, sp * st * cf - cp * sf,
       -st,     ct * sf,                ct * cf;
  return R;
}

namespace {

void require_regular_pitch(double theta) {
  if (!(std::abs(theta) < std::numbers::pi / 2.0 - kPitchSingularityMargin)) {
    std::ostringstream msg;
    msg << "pitch angle " << theta << " rad is at the Euler-rate singularity";
    throw DegeneratePitchError(msg.str());
  }
}

}  // namespace

Mat3 euler_rate_map(const EulerAngles& Omega) {
  require_regular_pitch(Omega.theta);
  const double cf = std::cos(Omega.phi), sf = std::sin(Omega.phi);
  const double ct = std::cos(Omega.theta), st = std::sin(Omega.theta);
  Mat3 W;
  W << 1.0, 0.0, -st,
       0.0, cf,  sf * ct,
       0.0, -sf, cf * ct;
  return W;
}

Mat3 inertia_matrix(const EulerAngles& Omega, const InertiaParams& p) {
  const double cf = std::cos(Omega.phi), sf = std::sin(Omega.phi);
  const double ct = std::cos(Omega.theta), st = std::sin(Omega.theta);
  const double m13 = -p.Ix * st;
  const double m23 = cf * sf * ct * (p.Iy - p.Iz);
  Mat3 M;
  M << p.Ix, 0.0, m13,
       0.0, p.Iz + (p.Iy - p.Iz) * cf * cf, m23,
       m13, m23, p.Iz * cf * cf * ct * ct + p.Iy * sf * sf * ct * ct + p.Ix * st * st;
  return M;
}

Mat3 coriolis_matrix(const EulerAngles& Omega, const Vec3& Omega_dot, const InertiaParams& p) {
  const double cf = std::cos(Omega.phi), sf = std::sin(Omega.phi);
  const double ct = std::cos(Omega.theta), st = std::sin(Omega.theta);
  const double dphi = Omega_dot(0), dtheta = Omega_dot(1), dpsi = Omega_dot(2);
  const double Ix = p.Ix, Iy = p.Iy, Iz = p.Iz;

  Mat3 C;
  C(0, 0) = 0.0;
  C(0, 1) = (Iy - Iz) * (dtheta * cf * sf + dpsi * sf * sf * ct) + (Iz - Iy) * (dpsi * cf * cf * ct) -
            Ix * dpsi * ct;
  C(0, 2) = (Iz - Iy) * dpsi * cf * sf * ct * ct;
  // The sin(phi) below is not squared, unlike its mirror in C(0, 1).
  C(1, 0) = (Iz - Iy) * (dtheta * cf * sf + dpsi * sf * ct) + (Iy - Iz) * (dpsi * cf * cf * ct) +
            Ix * dpsi * ct;
  C(1, 1) = (Iz - Iy) * dphi * cf * sf;
  C(1, 2) = -Ix * dpsi * st * ct + Iy * dpsi * sf * sf * st * ct + Iz * dpsi * cf * cf * st * ct;
  C(2, 0) = (Iy - Iz) * dpsi * ct * ct * sf * cf - Ix * dtheta * ct;
  C(2, 1) = (Iz - Iy) * (dtheta * cf * sf * st + dphi * sf * sf * ct) + (Iy - Iz) * dphi * cf * cf * ct +
            Ix * dpsi * st * ct;
  C(2, 2) = (Iy - Iz) * dphi * cf * sf * ct * ct - Iy * dtheta * sf * sf * ct * st -
            Iz * dtheta * cf * cf * ct * st + Ix * dtheta * ct * st;
  return C;
}

Mat6 generalized_inertia(const EulerAngles& Omega, const InertiaParams& p) {
  Mat6 M = Mat6::Zero();
  M.topLeftCorner<3, 3>() = p.mass * Mat3::Identity();
  M.bottomRightCorner<3, 3>() = inertia_matrix(Omega, p);
  return M;
}

Mat6 generalized_coriolis(const EulerAngles& Omega, const Vec3& Omega_dot, const InertiaParams& p) {
  Mat6 C = Mat6::Zero();
  C.bottomRightCorner<3, 3>() = coriolis_matrix(Omega, Omega_dot, p);
  return C;
}

Vec6 generalized_gravity(const InertiaParams& p) {
  Vec6 G = Vec6::Zero();
  G(2) = p.mass * p.g;
  return G;
}

Wrench wrench_from_accel(const State12& x, const Vec6& q_ddot, const InertiaParams& p) {
  const Vec6 T = generalized_inertia(x.Omega, p) * q_ddot +
                 generalized_coriolis(x.Omega, x.Omega_dot, p) * x.q_dot() + generalized_gravity(p);
  return Wrench::from(T);
}

Vec6 generalized_accel(const State12& x, const Wrench& T, const InertiaParams& p) {
  require_regular_pitch(x.Omega.theta);
  const Mat3 M = inertia_matrix(x.Omega, p);

  Eigen::SelfAdjointEigenSolver<Mat3> eig;
  eig.computeDirect(M, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  const double cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(cond <= 1e12)) {
    throw SingularMatrixError("rotational inertia matrix is singular", cond);
  }

  const Vec3 coriolis = coriolis_matrix(x.Omega, x.Omega_dot, p) * x.Omega_dot;
  Vec6 q_ddot;
  q_ddot.head<3>() = (T.force_inertial - Vec3(0.0, 0.0, p.mass * p.g)) / p.mass;
  q_ddot.tail<3>() = M.ldlt().solve(T.torque_body - coriolis);
  return q_ddot;
}

State12 step_rk4(const State12& x, const Wrench& T, const InertiaParams& p, double dt) {
  if (!(dt > 0.0 && dt <= 0.1)) {
    throw InputError("step_rk4: dt must lie in (0, 0.1], got " + std::to_string(dt));
  }
  auto f = [&](const Vec12& s) {
    const State12 st = State12::from(s);
    Vec12 d;
    d << st.q_dot(), generalized_accel(st, T, p);
    return d;
  };
  const Vec12 x0 = x.vec();
  const Vec12 k1 = f(x0);
  const Vec12 k2 = f(x0 + 0.5 * dt * k1);
  const Vec12 k3 = f(x0 + 0.5 * dt * k2);
  const Vec12 k4 = f(x0 + dt * k3);
  return State12::from(x0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

double passivity_residual(const EulerAngles& Omega, const Vec3& Omega_dot, const InertiaParams& p) {
  constexpr double h = 1e-6;
  const Vec3 a = Omega.vec();
  const Mat3 M_dot = (inertia_matrix(EulerAngles::from(a + h * Omega_dot), p) -
                      inertia_matrix(EulerAngles::from(a - h * Omega_dot), p)) /
                     (2.0 * h);
  const Mat3 N = M_dot - 2.0 * coriolis_matrix(Omega, Omega_dot, p);
  return (0.5 * (N + N.transpose())).cwiseAbs().maxCoeff();
}

}  // namespace quadid
