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

#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "quadid/ident_pd.hpp"
#include "quadid/simulator.hpp"
#include "test_support.hpp"

using namespace quadid;
using quadid::testing::max_abs;
using quadid::testing::Rng;

namespace {

struct Flight {
  SimulationConfig cfg;
  FlightDataset exact;  // clean states with exact derivatives
};

Flight planted_flight(double duration, double sample_dt, bool excite = true) {
  Flight f;
  f.cfg.duration = duration;
  f.cfg.sample_dt = sample_dt;
  f.cfg.x0(2) = 5.0;
  if (!excite) f.cfg.excitation.channels = {};
  const SimulationResult r = simulate(f.cfg);
  f.exact.states = {0.0, sample_dt, r.clean_states};
  f.exact.inputs = r.data.inputs;
  f.exact.derivs = {0.0, sample_dt, r.true_derivs};
  return f;
}

IdentProblem problem_for(const Flight& f) {
  IdentProblem p;
  p.samples = pd_samples(f.exact);
  p.dt = f.cfg.sample_dt;
  p.mass = f.cfg.plant.mass;
  p.g = f.cfg.plant.g;
  p.options.anchor = f.cfg.plant.xi;
  return p;
}

}  // namespace

TEST_CASE("residual vanishes on data from the model itself") {
  const Flight f = planted_flight(10.0, 0.01);
  const PdParams star = f.cfg.plant.xi;
  double worst = 0.0;
  for (const PdSample& s : pd_samples(f.exact)) {
    worst = std::max(worst, wrench_residual(star, s, f.cfg.plant.mass, f.cfg.plant.g).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-8);

  PdParams zeroed = star;
  for (int k = 1; k <= 12; ++k) zeroed.value(k) = 0.0;
  double moved = 0.0;
  for (const PdSample& s : pd_samples(f.exact)) {
    moved = std::max(moved, wrench_residual(zeroed, s, f.cfg.plant.mass, f.cfg.plant.g).tail<3>().norm());
  }
  CHECK(moved > 1e-3);
}

TEST_CASE("residual is affine in xi") {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    PdSample s{rng.state(1.3), rng.vec<6>(-3, 3), rng.input()};
    const double m = rng.uniform(0.1, 2), g = 9.81;
    PdParams xi = PdParams::from(rng.vec<16>(-2, 2));
    for (int k = 14; k <= 16; ++k) xi.value(k) = rng.uniform(0.001, 0.05);

    const WrenchRegressor reg = wrench_regressor(s, m, g);
    CHECK(max_abs(reg.A * xi.vec() + reg.c - wrench_residual(xi, s, m, g)) < 1e-11);

    PdParams doubled = xi;
    doubled.value(13) *= 2.0;
    const Vec6 shift = wrench_residual(doubled, s, m, g) - wrench_residual(xi, s, m, g);
    const Vec3 expect = -rotation_matrix(s.x.Omega).col(2) * xi.value(13);
    CHECK(max_abs(shift.head<3>() - expect) < 1e-12);
    CHECK(max_abs(shift.tail<3>()) < 1e-12);

    for (int k = 1; k <= 16; ++k) {
      PdParams up = xi, dn = xi;
      const double h = 1e-3;
      up.value(k) += h;
      dn.value(k) -= h;
      const Vec6 fd = (wrench_residual(up, s, m, g) - wrench_residual(dn, s, m, g)) / (2 * h);
      CHECK(max_abs(fd - reg.A.col(k - 1)) < 1e-7 * std::max(1.0, max_abs(fd)));
    }
  }
}

TEST_CASE("pd_samples needs derivatives") {
  FlightDataset d;
  d.states = {0.0, 0.1, Eigen::MatrixXd::Zero(5, 12)};
  d.inputs = {0.0, 0.1, Eigen::MatrixXd::Zero(5, 4)};
  CHECK_THROWS_AS(pd_samples(d), InputError);
}

TEST_CASE("planted parameters are recovered from a perturbed start") {
  const Flight f = planted_flight(30.0, 0.01);
  IdentProblem p = problem_for(f);
  const PdParams star = f.cfg.plant.xi;
  p.init = PdParams::from(1.2 * star.vec());
  const IdentResult r = identify_pd(p);
  CHECK(r.converged);
  CHECK_FALSE(r.rank_deficient);
  for (int k = 1; k <= 16; ++k) CHECK(std::abs(r.xi_hat.value(k) / star.value(k) - 1.0) < 1e-2);

  for (std::size_t i = 1; i < r.cost_trajectory.size(); ++i) {
    CHECK(r.cost_trajectory[i] <= r.cost_trajectory[i - 1]);
  }
  const double indep = ident_cost(p, r.xi_hat);
  CHECK(std::abs(r.cost_trajectory.back() - indep) <= 1e-10 * std::max(1.0, indep));
  // The first entry is J at the start after frozen entries take the anchor and the rest are clipped.
  PdParams start = PdParams::from(1.2 * star.vec());
  for (std::size_t i = 0; i < PdParams::kSize; ++i) {
    start.xi[i] = p.options.frozen[i] ? p.options.anchor.xi[i]
                                      : std::clamp(start.xi[i], p.bounds.lo.xi[i], p.bounds.hi.xi[i]);
  }
  const double j0 = ident_cost(p, start);
  CHECK(std::abs(r.cost_trajectory.front() - j0) <= 1e-10 * std::max(1.0, j0));
}

TEST_CASE("the generating parameters are a fixed point") {
  const Flight f = planted_flight(20.0, 0.01);
  IdentProblem p = problem_for(f);
  p.init = f.cfg.plant.xi;
  const IdentResult r = identify_pd(p);
  CHECK(r.iterations <= 2);
  CHECK(max_abs(r.xi_hat.vec() - f.cfg.plant.xi.vec()) < 1e-8);
}

TEST_CASE("hover data leaves the attitude gains unidentifiable") {
  const Flight f = planted_flight(10.0, 0.01, false);
  IdentProblem p = problem_for(f);
  p.init = PdParams::identified_reference();
  const IdentResult r = identify_pd(p);
  CHECK(r.rank_deficient);
  CHECK_FALSE(r.warnings.empty());
  for (int k : {3, 5, 9}) {
    CHECK(std::find(r.unidentifiable.begin(), r.unidentifiable.end(), k) != r.unidentifiable.end());
  }
}

TEST_CASE("bounds are respected") {
  const Flight f = planted_flight(10.0, 0.01);
  IdentProblem p = problem_for(f);
  p.bounds.hi.value(1) = 0.5;  // below the true 0.6756
  p.bounds.lo.value(10) = 0.7;  // above the true 0.5941
  p.init = PdParams::from(0.5 * (p.bounds.lo.vec() + p.bounds.hi.vec()));
  const IdentResult r = identify_pd(p);
  for (int k = 1; k <= 16; ++k) {
    CHECK(r.xi_hat.value(k) >= p.bounds.lo.value(k));
    CHECK(r.xi_hat.value(k) <= p.bounds.hi.value(k));
  }
  CHECK(r.xi_hat.value(1) == 0.5);
  CHECK(r.xi_hat.value(10) == 0.7);
}

TEST_CASE("frozen entries keep their anchor values") {
  const Flight f = planted_flight(10.0, 0.01);
  IdentProblem p = problem_for(f);
  p.options.anchor = PdParams::identified_reference();
  p.options.anchor.value(11) = 0.8109;
  p.options.frozen[0] = true;
  p.options.anchor.value(1) = 0.7;
  const IdentResult r = identify_pd(p);
  CHECK(r.xi_hat.value(1) == 0.7);
  for (int k : {2, 4, 6, 7, 8, 12}) CHECK(r.xi_hat.value(k) == 1.0);
}

TEST_CASE("problem validation") {
  const Flight f = planted_flight(0.5, 0.01);
  IdentProblem p = problem_for(f);
  CHECK_THROWS_AS(identify_pd(p), InputError);  // 51 samples, 160 required

  IdentOptions o;
  o.max_iter = 0;
  CHECK_THROWS_AS(o.validate(), InputError);
  IdentBounds b = IdentBounds::defaults();
  b.lo.value(3) = 3.0;
  CHECK_THROWS_AS(b.validate(), InputError);
}

TEST_CASE("result serialization") {
  const Flight f = planted_flight(5.0, 0.01);
  IdentProblem p = problem_for(f);
  p.init = f.cfg.plant.xi;
  const nlohmann::json j = to_json(identify_pd(p));
  CHECK(j.contains("xi"));
  CHECK(j.contains("cost_trajectory"));
  CHECK(j.contains("residual_rms"));
  CHECK(j["xi"].size() == 16);
}
