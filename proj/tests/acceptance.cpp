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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits 0 when
// the set of failing criteria equals the set passed with --known-failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "quadid/config.hpp"
#include "quadid/eval.hpp"
#include "quadid/experiment.hpp"
#include "quadid/ident_pd.hpp"
#include "quadid/mpc.hpp"
#include "quadid/simulator.hpp"
#include "quadid/sindy.hpp"

using namespace quadid;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  EulerAngles angles() { return {uniform(-3.1, 3.1), uniform(-1.4, 1.4), uniform(-3.1, 3.1)}; }
  InertiaParams inertia() {
    return {uniform(0.5, 3.0), uniform(0.002, 0.05), uniform(0.002, 0.05), uniform(0.004, 0.08), 9.81};
  }
  State12 state() {
    State12 x;
    for (int i = 0; i < 3; ++i) {
      x.eta(i) = uniform(-10, 10);
      x.eta_dot(i) = uniform(-3, 3);
      x.Omega_dot(i) = uniform(-2, 2);
    }
    x.Omega = angles();
    return x;
  }
  Vec4 input() {
    return {uniform(-5.0, 5.0), uniform(-0.611, 0.611), uniform(-0.611, 0.611),
            uniform(-5.0 * std::numbers::pi / 6.0, 5.0 * std::numbers::pi / 6.0)};
  }

 private:
  std::mt19937_64 gen_;
};

Outcome inertia_identity() {
  const auto t0 = Clock::now();
  Sampler s(1);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const EulerAngles O = s.angles();
    const InertiaParams p = s.inertia();
    const Mat3 W = euler_rate_map(O);
    const Mat3 I = Vec3(p.Ix, p.Iy, p.Iz).asDiagonal();
    worst = std::max(worst, (inertia_matrix(O, p) - W.transpose() * I * W).cwiseAbs().maxCoeff());
  }
  const double sec = seconds_since(t0);
  return {worst < 1e-12 && sec < 1.0, "max |M - W^T I W| = " + fmt("%.2e", worst) + ", " + fmt("%.3f", sec) + " s"};
}

Outcome dynamics_round_trip() {
  const auto t0 = Clock::now();
  Sampler s(2);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const State12 x = s.state();
    const InertiaParams p = s.inertia();
    Vec6 w;
    for (int c = 0; c < 6; ++c) w(c) = s.uniform(-5, 5);
    const Wrench T = Wrench::from(w);
    worst = std::max(worst, (wrench_from_accel(x, generalized_accel(x, T, p), p).vec() - w).cwiseAbs().maxCoeff());
  }
  const double sec = seconds_since(t0);
  return {worst < 1e-10 && sec < 1.0, "max wrench error = " + fmt("%.2e", worst) + ", " + fmt("%.3f", sec) + " s"};
}

Outcome pd_dual_form() {
  Sampler s(3);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const InertiaParams p = s.inertia();
    PdGains k;
    k.kp_z = s.uniform(0.2, 2.0);
    k.kd_z = s.uniform(-1.0, 1.0);
    k.kp_phi = s.uniform(0.2, 2.0);
    k.kd_phi = s.uniform(0.0, 1.0);
    k.kp_theta = s.uniform(0.2, 2.0);
    k.kd_theta = s.uniform(0.0, 1.0);
    k.kp_psi = s.uniform(0.2, 2.0);
    k.kd_psi = s.uniform(0.0, 1.0);
    const State12 x = s.state();
    const ControlInput mu(s.input());
    Vec6 qdd;
    for (int c = 0; c < 6; ++c) qdd(c) = s.uniform(-5, 5);
    const Wrench a = pd_wrench(x, mu, p, k, qdd);
    const Wrench b = pd_wrench(x, mu, xi_from_gains(k, p), qdd);
    worst = std::max(worst, (a.vec() - b.vec()).cwiseAbs().maxCoeff());
  }
  return {worst < 1e-12, "max wrench difference = " + fmt("%.2e", worst)};
}

Outcome planted_pd_recovery() {
  const PdParams star = plant_reference_xi();
  Outcome out{true, ""};
  for (const double sigma : {0.0, 0.01}) {
    const auto t0 = Clock::now();
    SimulationConfig sc;
    sc.duration = 60.0;
    sc.x0(2) = 5.0;
    sc.noise_sigma.fill(sigma);
    sc.seed = 7;
    const SimulationResult sim = simulate(sc);
    // Noiseless data keeps the states and uses a short derivative window.
    const PreprocessConfig pp = sigma == 0.0 ? PreprocessConfig{11, 5, false} : PreprocessConfig{};
    const FlightDataset data = preprocess(sim.data, pp);
    IdentProblem pr;
    pr.samples = pd_samples(data);
    pr.dt = sc.sample_dt;
    pr.mass = sc.plant.mass;
    pr.g = sc.plant.g;
    pr.init = PdParams::from(1.2 * star.vec());
    pr.options.anchor = star;
    const IdentResult r = identify_pd(pr);
    const double sec = seconds_since(t0);
    double worst = 0.0;
    int at = 0, counted = 0;
    for (int k = 1; k <= PdParams::kSize; ++k) {
      if (pr.options.frozen[static_cast<std::size_t>(k - 1)]) continue;
      if (std::find(r.unidentifiable.begin(), r.unidentifiable.end(), k) != r.unidentifiable.end()) continue;
      ++counted;
      const double e = std::abs(r.xi_hat.value(k) / star.value(k) - 1.0);
      if (e > worst) worst = e, at = k;
    }
    const double tol = sigma == 0.0 ? 0.01 : 0.05;
    const bool ok = counted == 10 && worst <= tol && sec < 30.0;
    out.pass = out.pass && ok;
    out.detail += (out.detail.empty() ? "" : "; ") + std::string("sigma ") + fmt("%g", sigma) + ": " +
                  std::to_string(counted) + " entries, worst " + fmt("%.2e", worst) + " (xi_" + std::to_string(at) +
                  ", tol " + fmt("%g", tol) + "), " + fmt("%.1f", sec) + " s";
  }
  return out;
}

int term(const std::vector<std::string>& names, const std::string& n) {
  return static_cast<int>(std::find(names.begin(), names.end(), n) - names.begin());
}

FlightDataset planted_sindy_data(const SparseModel& planted, double sigma, const PreprocessConfig& pp) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<FlightDataset> parts;
  for (int s = 0; s < 40; ++s) {
    SimulationConfig sc;
    sc.duration = 10.0;
    sc.sample_dt = 0.005;
    sc.seed = static_cast<std::uint64_t>(100 + s);
    for (int i = 0; i < 12; ++i) sc.x0(i) = U(rng);
    sc.x0(3) *= 2.5;
    sc.excitation.f0 = 0.2;
    sc.excitation.f1 = 1.5;
    for (int c = 0; c < 4; ++c) {
      auto& ch = sc.excitation.channels[static_cast<std::size_t>(c)];
      ch.amplitude = 0.3 * InputBounds::upper()(c);
      ch.phase = 3.14 * U(rng);
      ch.offset = 0.3 * InputBounds::upper()(c) * U(rng);
      ch.descending = s % 2 == 1;
    }
    sc.noise_sigma.fill(sigma);
    const SimulationResult r = simulate_model([&](const Vec12& x, const Vec4& u) { return planted.derivative(x, u); }, sc);
    parts.push_back(preprocess(r.data, pp));
  }
  return concatenate(parts);
}

Outcome planted_sindy_recovery() {
  const LibrarySpec spec;
  const auto names = library_term_names(spec, 12, 4);
  Eigen::MatrixXd xi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(names.size()), 12);
  xi(term(names, "deta_x"), 0) = 1.0;
  xi(term(names, "eta_x"), 6) = -2.0;
  xi(term(names, "vz_d"), 6) = 1.5;
  xi(term(names, "dphi"), 3) = 1.0;
  xi(term(names, "sin(phi)"), 9) = -3.0;
  xi(term(names, "phi_d"), 9) = 0.8;
  xi(term(names, "eta_x*dpsi_d"), 1) = 0.6;
  xi(term(names, "psi*cos(theta)"), 2) = -0.9;
  const SparseModel planted(spec, xi);
  const auto support = (xi.array() != 0.0).eval();

  Outcome out{true, std::to_string((xi.array() != 0.0).count()) + " planted terms"};
  {
    const auto t0 = Clock::now();
    const FlightDataset data = planted_sindy_data(planted, 0.0, PreprocessConfig{11, 3, false});
    for (const SolverMethod m : {SolverMethod::kSr3, SolverMethod::kStlsq}) {
      SolverConfig cfg;
      cfg.method = m;
      const SindyFit fit = identify_sindy(data, spec, cfg);
      const bool same = ((fit.model.xi().array() != 0.0) == support).all();
      const double err = (fit.model.xi() - xi).cwiseAbs().maxCoeff();
      out.pass = out.pass && same && err < 1e-4;
      out.detail += std::string("; noiseless ") + (m == SolverMethod::kSr3 ? "sr3" : "stlsq") + ": support " +
                    (same ? "exact" : "wrong") + ", max coef error " + fmt("%.2e", err);
    }
    const double sec = seconds_since(t0);
    out.pass = out.pass && sec < 30.0;
    out.detail += " (" + fmt("%.1f", sec) + " s)";
  }
  {
    const auto t0 = Clock::now();
    const FlightDataset data = planted_sindy_data(planted, 0.01, PreprocessConfig{51, 3, true});
    SolverConfig cfg;
    cfg.method = SolverMethod::kSr3;
    cfg.lambda = 0.05;
    const SindyFit fit = identify_sindy(data, spec, cfg);
    const auto found = (fit.model.xi().array() != 0.0).eval();
    const auto extra = (found && !support).count(), missing = (!found && support).count();
    const double sec = seconds_since(t0);
    out.pass = out.pass && extra == 0 && missing == 0 && sec < 30.0;
    out.detail += "; sigma 0.01 sr3: " + std::to_string(extra) + " extra, " + std::to_string(missing) +
                  " missing, max coef error " + fmt("%.2e", (fit.model.xi() - xi).cwiseAbs().maxCoeff()) + " (" +
                  fmt("%.1f", sec) + " s)";
  }
  return out;
}

Outcome mpc_gradient() {
  Sampler s(6);
  const PdDynamics pd(PlantConfig{}.model());
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    OcpConfig cfg;
    cfg.N = 1 + trial % 5;
    Mat12 Q = Mat12::Zero();
    for (int i = 0; i < 12; ++i) Q(i, i) = s.uniform(0.0, 2.0);
    cfg.Q = Q;
    // Attitudes inside the commanded envelope; near-inverted states make the
    // closed loop arbitrarily stiff.
    State12 x = s.state();
    x.Omega.phi = s.uniform(-0.611, 0.611);
    x.Omega.theta = s.uniform(-0.611, 0.611);
    const Vec12 x0 = x.vec();
    ReferenceWindow refs;
    for (int k = 0; k <= cfg.N; ++k) {
      Vec12 r = x0;
      for (int i = 0; i < 12; ++i) r(i) += s.uniform(-1, 1);
      refs.push_back(r);
    }
    Eigen::VectorXd u(4 * cfg.N);
    for (int k = 0; k < cfg.N; ++k) u.segment<4>(4 * k) = 0.5 * s.input();
    const Eigen::VectorXd g = ocp_rollout_gradient(pd, cfg, x0, refs, u);
    Eigen::VectorXd fd(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      const double h = 1e-6 * std::max(1.0, std::abs(u(i)));
      Eigen::VectorXd up = u, dn = u;
      up(i) += h;
      dn(i) -= h;
      fd(i) = (ocp_rollout_cost(pd, cfg, x0, refs, up) - ocp_rollout_cost(pd, cfg, x0, refs, dn)) / (2 * h);
    }
    worst = std::max(worst, (g - fd).norm() / fd.norm());
  }
  return {worst <= 1e-5, "worst relative gradient error over 20 instances = " + fmt("%.2e", worst)};
}

struct TrackingRun {
  std::string model;
  TrajectoryKind kind;
  TrackingLog log;
  TrackingMetrics metrics;
  double seconds = 0.0;
};

struct TrackingStudy {
  std::vector<TrackingRun> runs;
  std::string setup;
};

TrackingStudy tracking_study(const PipelineConfig& cfg) {
  TrackingStudy study;
  auto t0 = Clock::now();
  // PD model from one chirp-excited flight.
  const FlightDataset flight = preprocess(simulate(cfg.simulation_config()).data, cfg.preprocess);
  IdentProblem pr;
  pr.samples = pd_samples(flight);
  pr.dt = flight.states.dt;
  pr.mass = cfg.simulation.plant.mass;
  pr.g = cfg.simulation.plant.g;
  pr.bounds = cfg.ident_pd.bounds;
  pr.init = cfg.ident_pd.init;
  pr.options = cfg.ident_pd.options;
  const IdentResult ident = identify_pd(pr);
  const PdDynamics pd(PdModel{ident.xi_hat, pr.mass, pr.g});
  const double pd_sec = seconds_since(t0);

  // SINDy model from closed-loop tracking flights.
  t0 = Clock::now();
  const auto training = collect_tracking_runs(PdDynamics(cfg.simulation.plant.model()), cfg.simulation.plant, cfg.mpc,
                                              cfg.training_config());
  std::vector<FlightDataset> parts;
  for (const auto& r : training) {
    FlightDataset d = preprocess(r.data, cfg.sindy.preprocess);
    parts.push_back(cfg.sindy.wrap_yaw ? wrap_yaw(d) : d);
  }
  const SindyFit fit = identify_sindy(concatenate(parts), cfg.sindy.library, cfg.sindy.solver);
  const SindyDynamics sindy(fit.model, cfg.sindy.wrap_yaw);
  const double sindy_sec = seconds_since(t0);
  study.setup = "pd identified in " + fmt("%.1f", pd_sec) + " s, sindy (" + std::to_string(fit.nonzeros) +
                " terms) in " + fmt("%.1f", sindy_sec) + " s";

  for (const DynamicsModel* model : {static_cast<const DynamicsModel*>(&pd), static_cast<const DynamicsModel*>(&sindy)}) {
    for (const TrajectoryKind kind : {TrajectoryKind::kSinusoidal, TrajectoryKind::kCircular, TrajectoryKind::kSpiral}) {
      QuadPlant plant(cfg.simulation.plant, State12::from(cfg.experiment.x_init));
      const PlantStep step = [&](const Vec4& u, double dt) { return plant.step(u, dt).vec(); };
      const auto ts = Clock::now();
      TrackingRun run{model->name(), kind, track(*model, step, kind, cfg.mpc, 60.0, cfg.experiment.x_init), {}, 0.0};
      run.seconds = seconds_since(ts);
      if (run.log.size() > 0) run.metrics = tracking_metrics(run.log.positions(), run.log.reference_positions());
      study.runs.push_back(std::move(run));
    }
  }
  return study;
}

Outcome tracking_accuracy(const TrackingStudy& study, const OcpConfig& mpc) {
  Outcome out{mpc.N == 30 && std::abs(mpc.dt - 1.0 / 30.0) < 1e-15, study.setup};
  for (const auto& r : study.runs) {
    const bool ok = !r.log.aborted && r.log.size() == 1800 && r.metrics.rmse_3d <= 0.6 &&
                    r.metrics.axes.concordance.aggregate >= 0.95 && r.seconds <= 120.0;
    out.pass = out.pass && ok;
    out.detail += "; " + r.model + "/" + std::string(trajectory_name(r.kind)) + " " + (ok ? "ok" : "FAIL") +
                  " rmse " + fmt("%.3f", r.metrics.rmse_3d) + " m, concordance " +
                  fmt("%.4f", r.metrics.axes.concordance.aggregate) + ", " + fmt("%.1f", r.seconds) + " s" +
                  (r.log.aborted ? ", aborted: " + r.log.abort_reason : "");
  }
  return out;
}

Outcome constraint_compliance(const TrackingStudy& study) {
  const double limits[4] = {5.0, 0.611, 0.611, 5.0 * std::numbers::pi / 6.0};
  std::size_t checked = 0, violations = 0;
  for (const auto& r : study.runs) {
    for (const Vec4& u : r.log.inputs) {
      ++checked;
      for (int c = 0; c < 4; ++c) {
        if (!(std::abs(u(c)) <= limits[c])) {
          ++violations;
          break;
        }
      }
    }
  }
  return {checked > 0 && violations == 0,
          std::to_string(checked) + " applied inputs in " + std::to_string(study.runs.size()) + " logs, " +
              std::to_string(violations) + " outside the box"};
}

std::string distribution(const std::vector<double>& v) {
  std::vector<double> s = v;
  std::sort(s.begin(), s.end());
  const auto q = [&](double p) { return s[static_cast<std::size_t>(std::ceil(p * static_cast<double>(s.size() - 1)))]; };
  double mean = 0.0;
  for (double x : s) mean += x / static_cast<double>(s.size());
  return "mean " + fmt("%.3f", mean) + " ms, median " + fmt("%.3f", q(0.5)) + ", p95 " + fmt("%.3f", q(0.95)) +
         ", min " + fmt("%.3f", s.front()) + ", max " + fmt("%.3f", s.back()) + ", n " + std::to_string(s.size());
}

Outcome solve_timing(const TrackingStudy& study) {
  std::map<std::string, std::vector<double>> times;
  for (const auto& r : study.runs) times[r.model].insert(times[r.model].end(), r.log.solve_ms.begin(), r.log.solve_ms.end());
  if (times["pd"].empty() || times["sindy"].empty()) return {false, "missing solve times"};
  auto mean = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x / static_cast<double>(v.size());
    return m;
  };
  const double ratio = mean(times["sindy"]) / mean(times["pd"]);
  return {ratio <= 2.0, "sindy/pd mean ratio " + fmt("%.3f", ratio) +
                            (ratio <= 1.0 ? " (sindy not slower)" : " (sindy slower, within 2x)") + "; pd: " +
                            distribution(times["pd"]) + "; sindy: " + distribution(times["sindy"])};
}

Outcome metric_sanity() {
  bool ok = true;
  std::ostringstream d;
  for (const TrajectoryKind kind : {TrajectoryKind::kSinusoidal, TrajectoryKind::kCircular, TrajectoryKind::kSpiral}) {
    Eigen::MatrixXd ref(600, 3);
    for (int k = 0; k < 600; ++k) ref.row(k) = reference_position(kind, k / 30.0).position.transpose();
    ok = ok && concordance_index(ref, ref).aggregate == 1.0 && rmse(ref, ref).aggregate == 0.0 &&
         mae(ref, ref).aggregate == 0.0;
  }
  Eigen::MatrixXd p(2, 1), r(2, 1);
  p << 0, 0;
  r << 1, -1;
  const double e1 = std::max(std::abs(rmse(p, r).aggregate - 1.0), std::abs(mae(p, r).aggregate - 1.0));
  Eigen::MatrixXd a(4, 2), b(4, 2);
  a << 1, 2, 3, 4, 5, 6, 7, 8;
  b << 1, 0, 1, 4, 6, 6, 7, 11;
  const ErrorMetric er = rmse(a, b), em = mae(a, b);
  const double e2 = std::max({std::abs(er.per_channel(0) - std::sqrt(1.25)), std::abs(er.per_channel(1) - std::sqrt(3.25)),
                              std::abs(er.aggregate - 1.5), std::abs(em.per_channel(0) - 0.75),
                              std::abs(em.per_channel(1) - 1.25), std::abs(em.aggregate - 1.0)});
  const Eigen::MatrixXd shifted = a.array() + 0.3;
  const double e3 = std::max(std::abs(rmse(shifted, a).aggregate - 0.3), std::abs(mae(shifted, a).aggregate - 0.3));
  const double worst = std::max({e1, e2, e3});
  ok = ok && worst <= 1e-12;
  d << "perfect-tracking concordance 1 on all trajectories: " << (ok ? "yes" : "no") << ", worst hand-fixture error "
    << fmt("%.2e", worst);
  return {ok, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quadid acceptance checks"};
  std::vector<int> known;
  std::vector<int> only;
  std::string config_path;
  app.add_option("--known-failure", known, "Criterion expected to fail (repeatable)");
  app.add_option("--only", only, "Run only these criteria (repeatable)");
  app.add_option("--config", config_path, "Pipeline config for the tracking criteria")->check(CLI::ExistingFile);
  CLI11_PARSE(app, argc, argv);

  try {
    const PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : load_config(config_path);
    cfg.validate();
    auto wanted = [&](int n) { return only.empty() || std::find(only.begin(), only.end(), n) != only.end(); };

    std::map<int, Outcome> results;
    auto record = [&](int n, const std::function<Outcome()>& check) {
      if (!wanted(n)) return;
      const auto t0 = Clock::now();
      Outcome o;
      try {
        o = check();
      } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
      }
      results[n] = o;
      std::cout << "criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << "  ["
                << fmt("%.1f", seconds_since(t0)) << " s]" << std::endl;
    };

    record(1, inertia_identity);
    record(2, dynamics_round_trip);
    record(3, pd_dual_form);
    record(4, planted_pd_recovery);
    record(5, planted_sindy_recovery);
    record(6, mpc_gradient);
    if (wanted(7) || wanted(8) || wanted(9)) {
      const auto t0 = Clock::now();
      TrackingStudy study;
      std::string failure;
      try {
        study = tracking_study(cfg);
      } catch (const std::exception& e) {
        failure = std::string("exception: ") + e.what();
      }
      std::cout << "tracking study finished in " << fmt("%.1f", seconds_since(t0)) << " s" << std::endl;
      auto from_study = [&](int n, const std::function<Outcome()>& check) {
        record(n, failure.empty() ? check : std::function<Outcome()>([&] { return Outcome{false, failure}; }));
      };
      from_study(7, [&] { return constraint_compliance(study); });
      from_study(8, [&] { return tracking_accuracy(study, cfg.mpc); });
      from_study(9, [&] { return solve_timing(study); });
    }
    record(10, metric_sanity);

    std::set<int> failed, expected;
    for (const auto& [n, o] : results) {
      if (!o.pass) failed.insert(n);
    }
    for (int n : known) {
      if (results.count(n)) expected.insert(n);
    }
    std::cout << "failed:";
    for (int n : failed) std::cout << ' ' << n;
    std::cout << " | expected to fail:";
    for (int n : expected) std::cout << ' ' << n;
    std::cout << std::endl;
    return failed == expected ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
