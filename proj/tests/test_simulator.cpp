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

#include "quadid/simulator.hpp"
#include "test_support.hpp"

using namespace quadid;
using quadid::testing::max_abs;

namespace {

SimulationConfig quiet(double duration) {
  SimulationConfig sc;
  sc.excitation = ExcitationSpec{};
  sc.duration = duration;
  sc.sample_dt = 0.01;
  sc.x0(2) = 5.0;
  return sc;
}

}  // namespace

TEST_CASE("zero excitation hovers in place") {
  SimulationConfig sc = quiet(5.0);
  sc.x0(0) = 1.0;
  sc.x0(5) = 0.4;
  const SimulationResult r = simulate(sc);
  REQUIRE(r.data.samples() == 501);
  for (Eigen::Index k = 0; k < r.data.samples(); ++k) {
    CHECK(max_abs(r.clean_states.row(k).transpose() - sc.x0) < 1e-12);
  }
  CHECK(r.data.inputs.values.isZero(0));
  CHECK(max_abs(r.true_derivs) < 1e-12);
  CHECK(r.data.states.values == r.clean_states);
  CHECK_FALSE(r.data.has_derivs());
}

TEST_CASE("recorded inputs are the analytic chirp") {
  SimulationConfig sc;
  sc.duration = 20.0;
  sc.sample_dt = 0.01;
  sc.x0(2) = 5.0;
  const SimulationResult r = simulate(sc);
  const double T = sc.duration;
  for (Eigen::Index k = 0; k < r.data.samples(); k += 7) {
    const double t = 0.01 * static_cast<double>(k);
    for (int c = 0; c < 4; ++c) {
      const ChirpChannel& ch = sc.excitation.channels[static_cast<std::size_t>(c)];
      const double fa = ch.descending ? sc.excitation.f1 : sc.excitation.f0;
      const double fb = ch.descending ? sc.excitation.f0 : sc.excitation.f1;
      const double phase = 2 * std::numbers::pi * (fa * t + 0.5 * (fb - fa) * t * t / T) + ch.phase;
      CHECK(std::abs(r.data.inputs.values(k, c) - (ch.offset + ch.amplitude * std::sin(phase))) < 1e-12);
    }
  }
}

TEST_CASE("rich excitation stays within the input bounds") {
  const ExcitationSpec e = ExcitationSpec::rich();
  CHECK_NOTHROW(e.validate());
  for (int c = 0; c < 4; ++c) CHECK(e.channels[static_cast<std::size_t>(c)].amplitude > 0.5 * InputBounds::upper()(c));
  for (double t = 0.0; t < 60.0; t += 0.013) CHECK(InputBounds::contains(e.evaluate(t, 60.0)));
}

TEST_CASE("true derivatives match differences of the clean states") {
  // Worst central-difference mismatch after the initial attitude transient.
  auto worst = [](double h) {
    SimulationConfig sc;
    sc.duration = 10.0;
    sc.sample_dt = h;
    sc.x0(2) = 5.0;
    const SimulationResult r = simulate(sc);
    double w = 0.0;
    for (Eigen::Index k = static_cast<Eigen::Index>(0.5 / h); k + 1 < r.data.samples(); ++k) {
      const Eigen::RowVectorXd fd = (r.clean_states.row(k + 1) - r.clean_states.row(k - 1)) / (2 * h);
      w = std::max(w, (fd - r.true_derivs.row(k)).cwiseAbs().maxCoeff());
    }
    return w;
  };
  const double e1 = worst(0.004), e2 = worst(0.002);
  MESSAGE("central-difference mismatch " << e1 << " -> " << e2);
  CHECK(e2 < 1e-2);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("simulate_model integrates a known solution") {
  SimulationConfig sc = quiet(2.0);
  sc.x0 = Vec12::LinSpaced(-1.0, 1.0);
  const SimulationResult r = simulate_model([](const Vec12& x, const Vec4&) -> Vec12 { return -x; }, sc);
  for (Eigen::Index k = 0; k < r.data.samples(); ++k) {
    const double t = 0.01 * static_cast<double>(k);
    CHECK(max_abs(r.clean_states.row(k).transpose() - std::exp(-t) * sc.x0) < 1e-12);
    CHECK(max_abs(r.true_derivs.row(k) + r.clean_states.row(k)) == 0.0);
  }
}

TEST_CASE("measurement noise is seeded and additive") {
  SimulationConfig sc = quiet(20.0);
  sc.noise_sigma.fill(0.01);
  sc.noise_sigma[5] = 0.0;
  sc.seed = 11;
  const SimulationResult a = simulate(sc), b = simulate(sc);
  CHECK(a.data.states.values == b.data.states.values);
  sc.seed = 12;
  const SimulationResult c = simulate(sc);
  CHECK(a.data.states.values != c.data.states.values);
  CHECK(a.clean_states == c.clean_states);
  const Eigen::MatrixXd noise = a.data.states.values - a.clean_states;
  CHECK(noise.col(5).isZero(0));
  for (int ch : {0, 3, 11}) {
    const double mean = noise.col(ch).mean();
    const double sd = std::sqrt((noise.col(ch).array() - mean).square().mean());
    CHECK(std::abs(mean) < 0.0015);
    CHECK(std::abs(sd - 0.01) < 0.0015);
  }
}

TEST_CASE("plant step checks") {
  QuadPlant plant(PlantConfig{});
  CHECK_THROWS_AS(plant.step(Vec4::Zero(), 0.0), InputError);
  CHECK_THROWS_AS(plant.step(Vec4(5.5, 0, 0, 0), 0.01), InputError);
  CHECK_NOTHROW(plant.step(InputBounds::upper(), 0.01));
  State12 bad;
  bad.eta(0) = std::nan("");
  CHECK_THROWS_AS(plant.reset(bad), InputError);

  State12 steep;
  steep.Omega.theta = 1.5;
  steep.Omega_dot(1) = 20.0;
  plant.reset(steep);
  CHECK_THROWS_AS(plant.step(Vec4::Zero(), 0.1), NumericalError);

  PlantConfig cfg;
  cfg.mass = -1.0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = PlantConfig{};
  cfg.substep = 0.0;
  CHECK_THROWS_AS(QuadPlant{cfg}, InputError);
}

TEST_CASE("simulation config checks") {
  auto bad = [](auto edit) {
    SimulationConfig sc;
    edit(sc);
    CHECK_THROWS_AS(simulate(sc), InputError);
  };
  bad([](SimulationConfig& s) { s.sample_dt = 0.0; });
  bad([](SimulationConfig& s) { s.duration = -1.0; });
  bad([](SimulationConfig& s) { s.noise_sigma[2] = -0.1; });
  bad([](SimulationConfig& s) { s.excitation.channels[1].amplitude = 0.7; });
  bad([](SimulationConfig& s) { s.excitation.f0 = 0.0; });
  bad([](SimulationConfig& s) { s.x0(3) = INFINITY; });
}

TEST_CASE("delayed acceleration feedback approaches the implicit loop") {
  // Weak acceleration feedback keeps the delayed iteration contractive.
  PlantConfig weak;
  weak.xi.xi[10] = 0.1 * weak.mass;
  weak.xi.xi[11] = 0.1 * weak.xi.value(16);
  auto run = [&](AccelFeedback fb, double substep) {
    SimulationConfig sc;
    sc.duration = 3.0;
    sc.sample_dt = 0.01;
    sc.x0(2) = 5.0;
    sc.plant = weak;
    sc.plant.feedback = fb;
    sc.plant.substep = substep;
    return simulate(sc).clean_states;
  };
  const Eigen::MatrixXd ref = run(AccelFeedback::kImplicit, 1e-4);
  const double e1 = max_abs(run(AccelFeedback::kDelayed, 1e-3) - ref);
  const double e2 = max_abs(run(AccelFeedback::kDelayed, 2.5e-4) - ref);
  MESSAGE("delayed-feedback deviation " << e1 << " -> " << e2);
  CHECK(e1 < 0.05);
  CHECK(e1 / e2 > 2.0);

  SimulationConfig sc = quiet(2.0);
  sc.plant.feedback = AccelFeedback::kDelayed;
  const SimulationResult r = simulate(sc);
  CHECK(max_abs(r.clean_states.bottomRows(1).transpose() - sc.x0) < 1e-12);
}
