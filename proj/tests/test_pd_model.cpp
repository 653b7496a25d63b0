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

#include <cmath>
#include <numbers>

#include <doctest.h>

#include "quadid/mpc.hpp"
#include "quadid/pd_model.hpp"
#include "test_support.hpp"

using namespace quadid;
using quadid::testing::max_abs;
using quadid::testing::Rng;

namespace {

PdGains random_gains(Rng& rng) {
  PdGains k;
  k.kp_z = rng.uniform(0.2, 2.0);
  k.kd_z = rng.uniform(-1.0, 1.0);
  k.kp_phi = rng.uniform(0.2, 2.0);
  k.kd_phi = rng.uniform(0.0, 1.0);
  k.kp_theta = rng.uniform(0.2, 2.0);
  k.kd_theta = rng.uniform(0.0, 1.0);
  k.kp_psi = rng.uniform(0.2, 2.0);
  k.kd_psi = rng.uniform(0.0, 1.0);
  return k;
}

// Implicit closed loop assembled as one dense 6x6 system.
Vec6 dense_closed_loop(const PdModel& m, const State12& x, const Vec4& mu) {
  const SMatrices S = build_s_matrices(m.xi);
  const InertiaParams p = m.inertia();
  const Mat6 Rbar = expanded_rotation(x.Omega);
  const Mat6 Mbar = generalized_inertia(x.Omega, p);
  const Mat6 Cbar = generalized_coriolis(x.Omega, x.Omega_dot, p);
  Vec6 mu6;
  mu6 << 0, 0, mu;
  const Vec6 rhs = Rbar * (S.S1.cwiseProduct(mu6) - S.S2.cwiseProduct(x.q()) - S.S3.cwiseProduct(x.q_dot()) + S.S5) -
                   Cbar * x.q_dot() - generalized_gravity(p);
  const Mat6 A = Mbar + Rbar * S.S4.asDiagonal().toDenseMatrix();
  return A.fullPivLu().solve(rhs);
}

}  // namespace

TEST_CASE("control input bounds") {
  CHECK_NOTHROW(ControlInput(5.0, 0.611, -0.611, 5.0 * std::numbers::pi / 6.0));
  CHECK_THROWS_AS(ControlInput(5.0001, 0, 0, 0), InputError);
  CHECK_THROWS_AS(ControlInput(0, 0.62, 0, 0), InputError);
  CHECK_THROWS_AS(ControlInput(0, 0, -0.62, 0), InputError);
  CHECK_THROWS_AS(ControlInput(0, 0, 0, 2.7), InputError);
  CHECK_THROWS_AS(ControlInput(std::nan(""), 0, 0, 0), InputError);
  const Vec4 big(10, -1, 1, -10);
  const Vec4 p = InputBounds::project(big);
  CHECK(InputBounds::contains(p));
  CHECK(p(0) == 5.0);
  CHECK(p(1) == -0.611);
  CHECK(ControlInput(1, 0.1, 0.2, 0.3).embedded() == (Vec6() << 0, 0, 1, 0.1, 0.2, 0.3).finished());
}

TEST_CASE("s matrices from the reference values") {
  const SMatrices S = build_s_matrices(PdParams::identified_reference());
  CHECK(S.S1 == (Vec6() << 0, 0, 0.6756, 1.0, 0.6344, 1.0).finished());
  CHECK(S.S2 == (Vec6() << 0, 0, 0, 0.4080, 1.0, 0).finished());
  CHECK(S.S3 == (Vec6() << 0, 0, 1.0, 1.0, 0.2953, 0.5941).finished());
  CHECK(S.S4 == (Vec6() << 0, 0, -0.8109, 0, 0, 1.0).finished());
  CHECK(S.S5 == (Vec6() << 0, 0, 0.3984, 0, 0, 0).finished());

  const SMatrices Z = build_s_matrices(PdParams{});
  CHECK(Z.S1.isZero(0));
  CHECK(Z.S2.isZero(0));
  CHECK(Z.S3.isZero(0));
  CHECK(Z.S4.isZero(0));
  CHECK(Z.S5.isZero(0));

  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const PdParams xi = PdParams::from(rng.vec<16>(-2, 2));
    const PdParams back = extract_xi(build_s_matrices(xi), Vec3(xi.Ix(), xi.Iy(), xi.Iz()));
    CHECK(back == xi);
  }
}

TEST_CASE("plant reference parameters") {
  const PdParams p = plant_reference_xi();
  CHECK(p.value(11) == 0.8109);
  for (int k = 1; k <= 16; ++k) {
    if (k != 11) CHECK(p.value(k) == PdParams::identified_reference().value(k));
  }
  CHECK(hover_mass(p, 9.81) * 9.81 == doctest::Approx(0.3984).epsilon(1e-15));
  PdParams bad = p;
  bad.value(15) = 0.0;
  CHECK_THROWS_AS(bad.validate(), InputError);
}

TEST_CASE("expanded rotation") {
  CHECK(max_abs(expanded_rotation({0, 0, 0}) - Mat6::Identity()) == 0.0);
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const EulerAngles O = rng.angles();
    const Mat6 R = expanded_rotation(O);
    CHECK(max_abs(R.topLeftCorner<3, 3>() - rotation_matrix(O)) == 0.0);
    CHECK(max_abs(R.bottomRightCorner<3, 3>() - Mat3::Identity()) == 0.0);
    CHECK(R.topRightCorner<3, 3>().isZero(0));
    CHECK(R.bottomLeftCorner<3, 3>().isZero(0));
  }
}

TEST_CASE("explicit gain wrench") {
  const InertiaParams p{1.2, 0.01, 0.01, 0.02, 9.81};
  PdGains k;
  k.kp_phi = 0.8;
  State12 rest;
  const Wrench hover = pd_wrench(rest, ControlInput{}, p, k, Vec6::Zero());
  CHECK(max_abs(hover.force_inertial - Vec3(0, 0, p.mass * p.g)) < 1e-15);
  CHECK(hover.torque_body.isZero(0));

  const Wrench roll = pd_wrench(rest, ControlInput(0, 0.1, 0, 0), p, k, Vec6::Zero());
  CHECK(roll.torque_body(0) == doctest::Approx(0.08).epsilon(1e-15));
  CHECK(roll.torque_body(1) == 0.0);
  CHECK(roll.torque_body(2) == 0.0);
}

TEST_CASE("explicit gains and the s-matrix form give the same wrench") {
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    const InertiaParams p = rng.inertia();
    const PdGains k = random_gains(rng);
    const State12 x = rng.state();
    const ControlInput mu(rng.input());
    const Vec6 qdd = rng.vec<6>(-5, 5);
    const Wrench a = pd_wrench(x, mu, p, k, qdd);
    const Wrench b = pd_wrench(x, mu, xi_from_gains(k, p), qdd);
    CHECK(max_abs(a.vec() - b.vec()) < 1e-12);
  }
}

TEST_CASE("closed-loop acceleration") {
  // Hover balance: xi_13 cancels gravity.
  PdModel m{plant_reference_xi(), hover_mass(plant_reference_xi(), 9.81), 9.81};
  CHECK(max_abs(m.derivative(Vec12::Zero(), Vec4::Zero())) < 1e-15);

  PdModel table{PdParams::identified_reference(), 1.0, 9.81};
  const State12 rest;
  const Vec6 a = pd_closed_loop_accel(rest, ControlInput{}, table);
  CHECK(a.allFinite());
  CHECK(max_abs(a - dense_closed_loop(table, rest, Vec4::Zero())) < 1e-12);

  Rng rng(4);
  for (int i = 0; i < 500; ++i) {
    const State12 x = rng.state(1.3);
    const Vec4 mu = rng.input();
    PdModel r{PdParams::identified_reference(), rng.uniform(0.02, 2.0), 9.81};
    r.xi.value(11) = rng.uniform(-0.9, 0.9);
    const Vec6 got = r.closed_loop_accel(x.vec(), mu);
    const Vec6 want = dense_closed_loop(r, x, mu);
    CHECK(max_abs(got - want) < 1e-9 * std::max(1.0, max_abs(want)));
    const Vec12 d = pd_derivative(x, ControlInput(mu), r);
    CHECK(d.head<6>() == x.q_dot());
  }
}

TEST_CASE("closed-loop acceleration is affine in the command") {
  PdModel m{PdParams::identified_reference(), 0.8, 9.81};
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const Vec12 x = rng.state(1.2).vec();
    const Vec4 u1 = 0.5 * rng.input(), u2 = 0.5 * rng.input();
    const double a = rng.uniform(0, 1);
    const Vec6 lhs = m.closed_loop_accel(x, a * u1 + (1 - a) * u2);
    const Vec6 rhs = a * m.closed_loop_accel(x, u1) + (1 - a) * m.closed_loop_accel(x, u2);
    CHECK(max_abs(lhs - rhs) < 1e-11);
  }
  // At rest the roll row sees xi_2 phi_d / Ix, so doubling phi_d doubles it.
  const Vec6 r1 = m.closed_loop_accel(Vec12::Zero(), Vec4(0, 0.1, 0, 0));
  const Vec6 r2 = m.closed_loop_accel(Vec12::Zero(), Vec4(0, 0.2, 0, 0));
  const Vec6 r0 = m.closed_loop_accel(Vec12::Zero(), Vec4::Zero());
  CHECK((r2(3) - r0(3)) == doctest::Approx(2.0 * (r1(3) - r0(3))).epsilon(1e-13));
}

TEST_CASE("model jacobian matches extrapolated central differences") {
  PdModel m{plant_reference_xi(), hover_mass(plant_reference_xi(), 9.81), 9.81};
  const PdDynamics dyn(m);
  Rng rng(6);
  for (int i = 0; i < 10; ++i) {
    const Vec12 x = rng.state(1.0).vec();
    const Vec4 u = rng.input();
    Mat12 A;
    Mat12x4 B;
    dyn.jacobian(x, u, A, B);
    for (int j = 0; j < 16; ++j) {
      auto diff = [&](double h) {
        Vec12 xp = x, xm = x;
        Vec4 up = u, um = u;
        if (j < 12) {
          xp(j) += h;
          xm(j) -= h;
        } else {
          up(j - 12) += h;
          um(j - 12) -= h;
        }
        return Vec12((m.derivative(xp, up) - m.derivative(xm, um)) / (2 * h));
      };
      const Vec12 ref = (4.0 * diff(1e-3) - diff(2e-3)) / 3.0;
      const Vec12 col = j < 12 ? Vec12(A.col(j)) : Vec12(B.col(j - 12));
      const double scale = std::max(1.0, ref.cwiseAbs().maxCoeff());
      CHECK((col - ref).cwiseAbs().maxCoeff() < 1e-5 * scale);
    }
  }
}

TEST_CASE("closed loop stays away from the pitch singularity under bounded commands") {
  PdModel m{PdParams::identified_reference(), hover_mass(PdParams::identified_reference(), 9.81), 9.81};
  Vec12 x = Vec12::Zero();
  const double h = 1e-3;
  double max_pitch = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const double t = k * h;
    const Vec4 u(2.0 * std::sin(0.7 * t), 0.5 * std::sin(1.3 * t), 0.6 * std::cos(0.9 * t), 1.0);
    const Vec12 k1 = m.derivative(x, u);
    const Vec12 k2 = m.derivative(x + 0.5 * h * k1, u);
    const Vec12 k3 = m.derivative(x + 0.5 * h * k2, u);
    const Vec12 k4 = m.derivative(x + h * k3, u);
    x += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    max_pitch = std::max(max_pitch, std::abs(x(4)));
  }
  CHECK(x.allFinite());
  CHECK(max_pitch < std::numbers::pi / 2);
}

TEST_CASE("singular closed-loop matrix is reported") {
  PdModel m{PdParams::identified_reference(), 1.0, 9.81};
  m.xi.value(12) = -m.xi.Iz();
  CHECK_THROWS_AS(m.closed_loop_accel(Vec12::Zero(), Vec4::Zero()), SingularMatrixError);
  CHECK_THROWS_AS(m.closed_loop_accel((Vec12() << 0, 0, 0, 0, std::numbers::pi / 2, 0, 0, 0, 0, 0, 0, 0).finished(),
                                      Vec4::Zero()),
                  DegeneratePitchError);
}
