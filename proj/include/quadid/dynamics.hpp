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

// Euler-Lagrange rigid-body model of a quadrotor. Generalized coordinates are
// q = [eta, Omega] (inertial position, ZYX Euler angles) and the state is
// x = [q, q_dot].

#pragma once

#include "quadid/common.hpp"

namespace quadid {

/// Pitch magnitude at which the Euler-rate map is treated as singular.
inline constexpr double kPitchSingularityMargin = 1e-6;

struct EulerAngles {
  double phi = 0.0;    // roll
  double theta = 0.0;  // pitch
  double psi = 0.0;    // yaw

  Vec3 vec() const { return {phi, theta, psi}; }
  static EulerAngles from(const Vec3& v) { return {v(0), v(1), v(2)}; }
};

struct State12 {
  Vec3 eta = Vec3::Zero();
  EulerAngles Omega;
  Vec3 eta_dot = Vec3::Zero();
  Vec3 Omega_dot = Vec3::Zero();

  Vec6 q() const;
  Vec6 q_dot() const;
  Vec12 vec() const;
  static State12 from(const Vec12& x);
  static State12 from(const Vec6& q, const Vec6& q_dot);
  bool finite() const { return vec().allFinite(); }
};

struct InertiaParams {
  double mass = 1.0;
  double Ix = 0.01;
  double Iy = 0.01;
  double Iz = 0.02;
  double g = 9.81;

  /// Throws InputError unless every field is strictly positive and finite.
  void validate() const;
};

struct Wrench {
  Vec3 force_inertial = Vec3::Zero();
  Vec3 torque_body = Vec3::Zero();

  Vec6 vec() const;
  static Wrench from(const Vec6& t);
};

/// Body-to-inertial rotation, R = Rz(psi) Ry(theta) Rx(phi).
Mat3 rotation_matrix(const EulerAngles& Omega);

/// W(Omega) with body angular velocity omega = W * Omega_dot.
/// Throws DegeneratePitchError when |theta| >= pi/2 - kPitchSingularityMargin.
Mat3 euler_rate_map(const EulerAngles& Omega);

/// Rotational inertia matrix M(Omega) in Euler-rate coordinates.
Mat3 inertia_matrix(const EulerAngles& Omega, const InertiaParams& p);

/// Coriolis/gyroscopic matrix C(Omega, Omega_dot), element table taken as-is
/// (rates are Omega_dot = [phi_dot, theta_dot, psi_dot]).
Mat3 coriolis_matrix(const EulerAngles& Omega, const Vec3& Omega_dot, const InertiaParams& p);

/// Generalized inertia blockdiag(m I3, M(Omega)).
Mat6 generalized_inertia(const EulerAngles& Omega, const InertiaParams& p);

/// Generalized Coriolis blockdiag(0, C).
Mat6 generalized_coriolis(const EulerAngles& Omega, const Vec3& Omega_dot, const InertiaParams& p);

/// Gravity vector [0, 0, m g, 0, 0, 0].
Vec6 generalized_gravity(const InertiaParams& p);

/// T = Mbar q_ddot + Cbar q_dot + G, the wrench that produces q_ddot.
Wrench wrench_from_accel(const State12& x, const Vec6& q_ddot, const InertiaParams& p);

/// Solves Mbar q_ddot = T - Cbar q_dot - G. Throws DegeneratePitchError near the
/// pitch singularity and SingularMatrixError when cond(M) > 1e12.
Vec6 generalized_accel(const State12& x, const Wrench& T, const InertiaParams& p);

/// One classical RK4 step of x_dot = [q_dot, generalized_accel] under a
/// constant wrench. Requires dt in (0, 0.1].
State12 step_rk4(const State12& x, const Wrench& T, const InertiaParams& p, double dt);

/// Diagnostic: max |entry| of the symmetric part of (dM/dt - 2C), with dM/dt
/// from central differences along Omega_dot. Not zero in general for this C.
double passivity_residual(const EulerAngles& Omega, const Vec3& Omega_dot, const InertiaParams& p);

}  // namespace quadid
