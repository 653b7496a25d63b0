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

#include "quadid/pd_model.hpp"

#include <cmath>
#include <sstream>

namespace quadid {

bool InputBounds::contains(const Vec4& u) {
  return u.allFinite() && (u.cwiseAbs().array() <= upper().array()).all();
}

Vec4 InputBounds::project(const Vec4& u) { return u.cwiseMax(lower()).cwiseMin(upper()); }

ControlInput::ControlInput(double vz_d, double phi_d, double theta_d, double psidot_d)
    : u_(vz_d, phi_d, theta_d, psidot_d) {
  if (!InputBounds::contains(u_)) {
    std::ostringstream msg;
    msg << "control input [" << u_.transpose() << "] violates bounds [" << InputBounds::upper().transpose()
        << "]";
    throw InputError(msg.str());
  }
}

Vec6 ControlInput::embedded() const {
  Vec6 out;
  out << 0.0, 0.0, u_;
  return out;
}

void PdParams::validate() const {
  for (int k = 1; k <= kSize; ++k) {
    if (!std::isfinite(value(k))) {
      throw InputError("xi_" + std::to_string(k) + " is not finite");
    }
  }
  for (int k = 14; k <= 16; ++k) {
    if (!(value(k) > 0.0)) {
      throw InputError("xi_" + std::to_string(k) + " is an inertia and must be positive");
    }
  }
}

Eigen::Matrix<double, PdParams::kSize, 1> PdParams::vec() const {
  return Eigen::Map<const Eigen::Matrix<double, kSize, 1>>(xi.data());
}

PdParams PdParams::from(const Eigen::Matrix<double, kSize, 1>& v) {
  PdParams p;
  Eigen::Map<Eigen::Matrix<double, kSize, 1>>(p.xi.data()) = v;
  return p;
}

PdParams PdParams::identified_reference() {
  return {{0.6756, 1.0000, 0.6344, 1.0000,   //
           0.4080, 1.0000, 1.0000, 1.0000,   //
           0.2953, 0.5941, -0.8109, 1.0000,  //
           0.3984, 0.00546, 0.0035, 0.00659}};
}

PdParams plant_reference_xi() {
  PdParams xi = PdParams::identified_reference();
  xi.value(11) = std::abs(xi.value(11));
  return xi;
}

double hover_mass(const PdParams& xi, double g) { return xi.value(13) / g; }

SMatrices build_s_matrices(const PdParams& xi) {
  auto v = [&](int k) { return xi.value(k); };
  SMatrices S;
  S.S1 << 0.0, 0.0, v(1), v(2), v(3), v(4);
  S.S2 << 0.0, 0.0, 0.0, v(5), v(6), 0.0;
  S.S3 << 0.0, 0.0, v(7), v(8), v(9), v(10);
  S.S4 << 0.0, 0.0, v(11), 0.0, 0.0, v(12);
  S.S5 << 0.0, 0.0, v(13), 0.0, 0.0, 0.0;
  return S;
}

PdParams extract_xi(const SMatrices& S, const Vec3& inertias) {
  return {{S.S1(2), S.S1(3), S.S1(4), S.S1(5),  //
           S.S2(3), S.S2(4),                    //
           S.S3(2), S.S3(3), S.S3(4), S.S3(5),  //
           S.S4(2), S.S4(5),                    //
           S.S5(2),                             //
           inertias(0), inertias(1), inertias(2)}};
}

PdParams xi_from_gains(const PdGains& k, const InertiaParams& p) {
  return {{k.kp_z, k.kp_phi, k.kp_theta, k.kp_psi,  //
           k.kp_phi, k.kp_theta,                    //
           k.kp_z, k.kd_phi, k.kd_theta, k.kp_psi,  //
           k.kd_z, k.kd_psi,                        //
           p.mass * p.g,                            //
           p.Ix, p.Iy, p.Iz}};
}

Mat6 expanded_rotation(const EulerAngles& Omega) {
  Mat6 Rbar = Mat6::Identity();
  Rbar.topLeftCorner<3, 3>() = rotation_matrix(Omega);
  return Rbar;
}

Wrench pd_wrench(const State12& x, const ControlInput& mu, const InertiaParams& p, const PdGains& k,
                 const Vec6& qdd) {
  const double thrust = k.kp_z * (mu.vz_d() - x.eta_dot(2)) + k.kd_z * (0.0 - qdd(2)) + p.mass * p.g;
  Wrench T;
  T.force_inertial = rotation_matrix(x.Omega) * Vec3(0.0, 0.0, thrust);
  T.torque_body(0) = k.kp_phi * (mu.phi_d() - x.Omega.phi) + k.kd_phi * (0.0 - x.Omega_dot(0));
  T.torque_body(1) = k.kp_theta * (mu.theta_d() - x.Omega.theta) + k.kd_theta * (0.0 - x.Omega_dot(1));
  T.torque_body(2) = k.kp_psi * (mu.psidot_d() - x.Omega_dot(2)) + k.kd_psi * (0.0 - qdd(5));
  return T;
}

Wrench pd_wrench(const State12& x, const ControlInput& mu, const PdParams& xi, const Vec6& qdd) {
  const SMatrices S = build_s_matrices(xi);
  const Vec6 bracket = S.S1.cwiseProduct(mu.embedded()) - S.S2.cwiseProduct(x.q()) -
                       S.S3.cwiseProduct(x.q_dot()) - S.S4.cwiseProduct(qdd) + S.S5;
  return Wrench::from(expanded_rotation(x.Omega) * bracket);
}

namespace {

// Closed-form 3x3 solve with a Frobenius condition estimate (an upper bound
// on the 2-norm condition number).
Vec3 guarded_solve(const Mat3& A, const Vec3& b, const char* what) {
  const Mat3 inv = A.inverse();
  const double cond = A.norm() * inv.norm();
  if (!std::isfinite(cond) || cond > 1e12) {
    throw SingularMatrixError(std::string("PD closed-loop matrix (") + what + " block) is singular",
                              std::isfinite(cond) ? cond : std::numeric_limits<double>::infinity());
  }
  return inv * b;
}

}  // namespace

Vec6 PdModel::closed_loop_accel(const Vec12& xv, const Vec4& mu) const {
  const State12 x = State12::from(xv);
  if (!(std::abs(x.Omega.theta) < std::numbers::pi / 2.0 - kPitchSingularityMargin)) {
    throw DegeneratePitchError("PD model evaluated at the pitch singularity, theta = " +
                               std::to_string(x.Omega.theta));
  }
  const InertiaParams p = inertia();
  const Mat3 R = rotation_matrix(x.Omega);
  auto v = [&](int k) { return xi.value(k); };

  // Bracket S1 mu - S2 q - S3 q_dot + S5, only the structurally nonzero slots.
  const double thrust = v(1) * mu(0) - v(7) * x.eta_dot(2) + v(13);
  const Vec3 torque(v(2) * mu(1) - v(5) * x.Omega.phi - v(8) * x.Omega_dot(0),
                    v(3) * mu(2) - v(6) * x.Omega.theta - v(9) * x.Omega_dot(1),
                    v(4) * mu(3) - v(10) * x.Omega_dot(2));

  Mat3 At = mass * Mat3::Identity();
  At.col(2) += v(11) * R.col(2);
  const Vec3 bt = thrust * R.col(2) - Vec3(0.0, 0.0, mass * g);

  Mat3 Ar = inertia_matrix(x.Omega, p);
  Ar(2, 2) += v(12);
  const Vec3 br = torque - coriolis_matrix(x.Omega, x.Omega_dot, p) * x.Omega_dot;

  Vec6 qdd;
  qdd.head<3>() = guarded_solve(At, bt, "translational");
  qdd.tail<3>() = guarded_solve(Ar, br, "rotational");
  return qdd;
}

Vec12 PdModel::derivative(const Vec12& x, const Vec4& mu) const {
  Vec12 d;
  d << x.tail<6>(), closed_loop_accel(x, mu);
  return d;
}

Vec6 pd_closed_loop_accel(const State12& x, const ControlInput& mu, const PdModel& model) {
  return model.closed_loop_accel(x.vec(), mu.vec());
}

Vec12 pd_derivative(const State12& x, const ControlInput& mu, const PdModel& model) {
  return model.derivative(x.vec(), mu.vec());
}

}  // namespace quadid
