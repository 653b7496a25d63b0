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

// Identification of the 16 PD-model parameters from flight data by
// minimizing J = sum_k |r_k|^2 dt with r = T(xi) - T_PD(xi), the mismatch
// between the Euler-Lagrange wrench and the PD wrench.
#pragma once

#include <array>
#include <vector>

#include <json.hpp>

#include "quadid/pd_model.hpp"
#include "quadid/signals.hpp"

namespace quadid {

struct PdSample {
  State12 x;
  Vec6 q_ddot = Vec6::Zero();
  Vec4 mu = Vec4::Zero();
};

/// r = T(xi) - T_PD(xi) for one sample. The inertias xi_14..16 enter T.
Vec6 wrench_residual(const PdParams& xi, const PdSample& sample, double mass, double g);

/// The residual is affine in xi: r = A xi + c.
struct WrenchRegressor {
  Eigen::Matrix<double, 6, PdParams::kSize> A;
  Vec6 c;
};
WrenchRegressor wrench_regressor(const PdSample& sample, double mass, double g);

/// One sample per row; q_ddot is the last six columns of derivs, which must be
/// present. Throws InputError otherwise.
std::vector<PdSample> pd_samples(const FlightDataset& data);

struct IdentBounds {
  PdParams lo;
  PdParams hi;
  /// Gains in [-2, 2], inertias in [1e-6, 0.1].
  static IdentBounds defaults();
  void validate() const;
};

/// Entries that equal 1 in the reference values: 2, 4, 6, 7, 8, 12.
std::array<bool, PdParams::kSize> default_frozen();

struct IdentOptions {
  std::array<bool, PdParams::kSize> frozen = default_frozen();
  /// Values held by frozen entries.
  PdParams anchor = PdParams::identified_reference();
  /// Bandwidth of the first-order low-pass applied to the residual
  /// sequence before it enters J; 0 disables it.
  double lowpass_lambda = 0.0;
  int max_iter = 50;
  /// Stop when the projected gradient inf-norm drops below this.
  double grad_tol = 1e-9;
  double armijo_c = 1e-4;
  /// Relative eigenvalue cutoff of the scaled normal matrix.
  double svd_cutoff = 1e-8;

  void validate() const;
};

struct IdentProblem {
  std::vector<PdSample> samples;
  double dt = 0.01;
  double mass = 1.0;
  double g = 9.81;
  IdentBounds bounds = IdentBounds::defaults();
  PdParams init = PdParams::identified_reference();
  IdentOptions options;
};

struct IdentResult {
  PdParams xi_hat;
  /// J at the initial point followed by J after every accepted step.
  std::vector<double> cost_trajectory;
  /// RMS of the unfiltered residual per wrench channel at xi_hat.
  Vec6 residual_rms = Vec6::Zero();
  int iterations = 0;
  bool converged = false;
  bool rank_deficient = false;
  /// 1-based indices of free entries in the numerically null directions.
  std::vector<int> unidentifiable;
  double gradient_norm = 0.0;
  std::vector<std::string> warnings;
};

/// Box-constrained Gauss-Newton with Armijo backtracking. Throws InputError
/// when there are fewer than 10 samples per parameter or the options are
/// inconsistent. Non-convergence and rank deficiency are reported in the
/// result.
IdentResult identify_pd(const IdentProblem& problem);

/// J evaluated sample by sample through wrench_residual.
double ident_cost(const IdentProblem& problem, const PdParams& xi);

nlohmann::json to_json(const IdentResult& result);

}  // namespace quadid
