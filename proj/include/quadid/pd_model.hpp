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

// PD approximation of the vehicle's inner attitude/thrust loop. The same
// wrench is available in two algebraically equivalent forms: explicit PD
// gains on each channel, and the 16-parameter xi vector placed into the
// diagonal S matrices:
//
//   T_PD = Rbar [S1 mu - S2 q - S3 q_dot - S4 q_ddot + S5]
//
// Equating T_PD with the Euler-Lagrange wrench gives the closed-loop model
//
//   q_ddot = (Mbar + Rbar S4)^-1 [Rbar (S1 mu - S2 q - S3 q_dot + S5) - Cbar q_dot - G].

#pragma once

#include <array>
#include <numbers>

#include "quadid/dynamics.hpp"

namespace quadid {

/// Symmetric box limits on the commanded inputs [vz_d, phi_d, theta_d, psidot_d].
struct InputBounds {
  static constexpr double kVz = 5.0;
  static constexpr double kPhi = 0.611;
  static constexpr double kTheta = 0.611;
  static constexpr double kPsiDot = 5.0 * std::numbers::pi / 6.0;

  static Vec4 upper() { return {kVz, kPhi, kTheta, kPsiDot}; }
  static Vec4 lower() { return -upper(); }
  static bool contains(const Vec4& u);
  /// Componentwise clamp into the box.
  static Vec4 project(const Vec4& u);
};

/// High-level command accepted by the vehicle. Construction rejects values
/// outside InputBounds.
class ControlInput {
 public:
  ControlInput() = default;
  ControlInput(double vz_d, double phi_d, double theta_d, double psidot_d);
  explicit ControlInput(const Vec4& u) : ControlInput(u(0), u(1), u(2), u(3)) {}

  double vz_d() const { return u_(0); }
  double phi_d() const { return u_(1); }
  double theta_d() const { return u_(2); }
  double psidot_d() const { return u_(3); }

  const Vec4& vec() const { return u_; }
  /// Six-vector [0, 0, vz_d, phi_d, theta_d, psidot_d].
  Vec6 embedded() const;

 private:
  Vec4 u_ = Vec4::Zero();
};

/// xi_1..xi_16 stored zero-based: value(k) is xi_k.
struct PdParams {
  static constexpr int kSize = 16;
  std::array<double, kSize> xi{};

  double value(int k) const { return xi.at(static_cast<std::size_t>(k - 1)); }
  double& value(int k) { return xi.at(static_cast<std::size_t>(k - 1)); }

  double Ix() const { return xi[13]; }
  double Iy() const { return xi[14]; }
  double Iz() const { return xi[15]; }

  /// Throws InputError if an entry is non-finite or an inertia is not positive.
  void validate() const;

  InertiaParams inertia(double mass, double g) const { return {mass, Ix(), Iy(), Iz(), g}; }

  Eigen::Matrix<double, kSize, 1> vec() const;
  static PdParams from(const Eigen::Matrix<double, kSize, 1>& v);

  /// Reference identified values.
  static PdParams identified_reference();

  bool operator==(const PdParams&) const = default;
};

/// Parameters of the simulated ground-truth vehicle: the reference identified
/// values with xi_11 (vertical acceleration feedback) taken with positive sign.
PdParams plant_reference_xi();

/// Mass that makes xi_13 exactly cancel gravity at level attitude.
double hover_mass(const PdParams& xi, double g);

/// Explicit per-channel PD gains. Reference rates and accelerations of the
/// commands are zero.
struct PdGains {
  double kp_z = 1.0, kd_z = 0.0;
  double kp_phi = 1.0, kd_phi = 0.1;
  double kp_theta = 1.0, kd_theta = 0.1;
  double kp_psi = 1.0, kd_psi = 0.0;
};

/// Diagonals of S1..S4 and the vector S5.
struct SMatrices {
  Vec6 S1 = Vec6::Zero();
  Vec6 S2 = Vec6::Zero();
  Vec6 S3 = Vec6::Zero();
  Vec6 S4 = Vec6::Zero();
  Vec6 S5 = Vec6::Zero();
};

SMatrices build_s_matrices(const PdParams& xi);

/// Inverse of build_s_matrices; the inertias are not part of the S matrices
/// and are supplied separately.
PdParams extract_xi(const SMatrices& S, const Vec3& inertias);

/// xi equivalent to the explicit gains, with xi_13 = m g and inertias from p.
PdParams xi_from_gains(const PdGains& gains, const InertiaParams& p);

/// Rbar = blockdiag(R, I3).
Mat6 expanded_rotation(const EulerAngles& Omega);

/// Explicit-gain wrench. q_ddot_feedback supplies the current accelerations
/// used by the vertical and yaw derivative terms.
Wrench pd_wrench(const State12& x, const ControlInput& mu, const InertiaParams& p, const PdGains& gains,
                 const Vec6& q_ddot_feedback);

/// Same wrench through the S-matrix form.
Wrench pd_wrench(const State12& x, const ControlInput& mu, const PdParams& xi, const Vec6& q_ddot_feedback);

/// Closed-loop PD model: xi plus the configuration constants m and g.
struct PdModel {
  PdParams xi = PdParams::identified_reference();
  double mass = 1.0;
  double g = 9.81;

  InertiaParams inertia() const { return xi.inertia(mass, g); }

  /// Implicit closed-loop acceleration. Throws SingularMatrixError when
  /// (Mbar + Rbar S4) is numerically singular, DegeneratePitchError near the
  /// pitch singularity.
  Vec6 closed_loop_accel(const Vec12& x, const Vec4& mu) const;
  /// x_dot = [q_dot, closed_loop_accel].
  Vec12 derivative(const Vec12& x, const Vec4& mu) const;
};

Vec6 pd_closed_loop_accel(const State12& x, const ControlInput& mu, const PdModel& model);
Vec12 pd_derivative(const State12& x, const ControlInput& mu, const PdModel& model);

}  // namespace quadid
