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

#pragma once

#include "quadid/common.hpp"

namespace quadid {

struct BoxQpResult {
  Eigen::VectorXd x;
  int iterations = 0;
  bool converged = false;
  /// -1 at the lower bound, +1 at the upper bound, 0 free.
  Eigen::VectorXi active;
};

/// Primal active-set solver for
///   minimize 0.5 x'Hx + g'x  subject to  lo <= x <= hi
/// with H symmetric positive definite on every free subspace visited.
/// x0 (optional, projected into the box) seeds the working set.
/// Throws InputError for mismatched sizes or crossing bounds and
/// SingularMatrixError if a reduced Hessian is not positive definite.
BoxQpResult solve_box_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::VectorXd& lo,
                         const Eigen::VectorXd& hi, const Eigen::VectorXd* x0 = nullptr, int max_iter = 500);

/// inf-norm of x - clamp(x - (Hx + g), lo, hi); zero exactly at a KKT point.
double box_qp_kkt_residual(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::VectorXd& lo,
                           const Eigen::VectorXd& hi, const Eigen::VectorXd& x);

}  // namespace quadid
