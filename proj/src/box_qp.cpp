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

#include "quadid/box_qp.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace quadid {

namespace {

void check_problem(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::VectorXd& lo,
                   const Eigen::VectorXd& hi) {
  const Eigen::Index n = g.size();
  if (H.rows() != n || H.cols() != n || lo.size() != n || hi.size() != n) {
    throw InputError("box QP: dimension mismatch");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(lo(i) <= hi(i))) throw InputError("box QP: lower bound exceeds upper bound");
  }
  if (!H.allFinite() || !g.allFinite()) throw NumericalError("box QP: non-finite problem data");
}

}  // namespace

BoxQpResult solve_box_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::VectorXd& lo,
                         const Eigen::VectorXd& hi, const Eigen::VectorXd* x0, int max_iter) {
  check_problem(H, g, lo, hi);
  const Eigen::Index n = g.size();
  BoxQpResult res;
  res.x = x0 ? x0->cwiseMax(lo).cwiseMin(hi) : Eigen::VectorXd(Eigen::VectorXd::Zero(n).cwiseMax(lo).cwiseMin(hi));
  res.active = Eigen::VectorXi::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (lo(i) == hi(i) || res.x(i) <= lo(i)) {
      res.active(i) = -1;
      res.x(i) = lo(i);
    } else if (res.x(i) >= hi(i)) {
      res.active(i) = 1;
      res.x(i) = hi(i);
    }
  }

  std::vector<Eigen::Index> free_idx;
  free_idx.reserve(static_cast<std::size_t>(n));
  Eigen::MatrixXd Hff;
  Eigen::VectorXd rhs;
  for (res.iterations = 0; res.iterations < max_iter; ++res.iterations) {
    const Eigen::VectorXd grad = H * res.x + g;
    free_idx.clear();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (res.active(i) == 0) free_idx.push_back(i);
    }
    const auto nf = static_cast<Eigen::Index>(free_idx.size());
    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    if (nf > 0) {
      Hff.resize(nf, nf);
      rhs.resize(nf);
      for (Eigen::Index a = 0; a < nf; ++a) {
        rhs(a) = -grad(free_idx[static_cast<std::size_t>(a)]);
        for (Eigen::Index b = 0; b < nf; ++b) {
          Hff(a, b) = H(free_idx[static_cast<std::size_t>(a)], free_idx[static_cast<std::size_t>(b)]);
        }
      }
      const Eigen::LLT<Eigen::MatrixXd> llt(Hff);
      if (llt.info() != Eigen::Success) {
        throw SingularMatrixError("box QP: reduced Hessian is not positive definite",
                                  std::numeric_limits<double>::infinity());
      }
      const Eigen::VectorXd pf = llt.solve(rhs);
      for (Eigen::Index a = 0; a < nf; ++a) p(free_idx[static_cast<std::size_t>(a)]) = pf(a);
    }

    // Longest feasible fraction of the Newton step on the free set.
    double alpha = 1.0;
    Eigen::Index blocking = -1;
    for (Eigen::Index i : free_idx) {
      if (p(i) < 0.0) {
        const double a = (lo(i) - res.x(i)) / p(i);
        if (a < alpha) alpha = a, blocking = i;
      } else if (p(i) > 0.0) {
        const double a = (hi(i) - res.x(i)) / p(i);
        if (a < alpha) alpha = a, blocking = i;
      }
    }
    res.x += std::max(alpha, 0.0) * p;
    if (blocking >= 0) {
      res.active(blocking) = p(blocking) < 0.0 ? -1 : 1;
      res.x(blocking) = p(blocking) < 0.0 ? lo(blocking) : hi(blocking);
      continue;
    }

    // Full step taken: release the bound with the most negative multiplier.
    const Eigen::VectorXd grad_new = H * res.x + g;
    Eigen::Index release = -1;
    double worst = 0.0;
    const double tol = 1e-14 * (1.0 + grad_new.lpNorm<Eigen::Infinity>());
    for (Eigen::Index i = 0; i < n; ++i) {
      if (res.active(i) == 0 || lo(i) == hi(i)) continue;
      const double multiplier = res.active(i) < 0 ? grad_new(i) : -grad_new(i);
      if (multiplier < -tol && multiplier < worst) worst = multiplier, release = i;
    }
    if (release < 0) {
      res.converged = true;
      ++res.iterations;
      return res;
    }
    res.active(release) = 0;
  }
  return res;
}

double box_qp_kkt_residual(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::VectorXd& lo,
                           const Eigen::VectorXd& hi, const Eigen::VectorXd& x) {
  check_problem(H, g, lo, hi);
  const Eigen::VectorXd step = (x - (H * x + g)).cwiseMax(lo).cwiseMin(hi);
  return (x - step).lpNorm<Eigen::Infinity>();
}

}  // namespace quadid
