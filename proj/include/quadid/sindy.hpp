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

// Sparse identification of nonlinear dynamics with control inputs:
// Xdot ~= Theta(X, U) Xi with a sparse coefficient matrix Xi (p x n).

#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "quadid/common.hpp"
#include "quadid/signals.hpp"

namespace quadid {

/// Candidate-library switches. Column order is fixed: constant, states,
/// controls, state monomials x_i x_j (i <= j), state-control products,
/// sin of each Euler angle, cos of each Euler angle, x_i sin(angle),
/// x_i cos(angle).
struct LibrarySpec {
  bool include_constant = true;
  int poly_degree = 2;
  bool include_control_linear = true;
  bool include_state_control_cross = true;
  bool include_trig = true;
  bool include_state_trig_cross = true;

  void validate() const;
  bool operator==(const LibrarySpec&) const = default;
};

/// One library column as a function of (x, u).
struct LibraryTerm {
  enum class Kind { kConstant, kState, kControl, kStateState, kStateControl, kSin, kCos, kStateSin, kStateCos };
  Kind kind = Kind::kConstant;
  int i = -1;  // state index (or control index for kControl)
  int j = -1;  // second state, control, or angle state index

  double value(const double* x, const double* u) const;
  /// Accumulates scale * d(value)/dx into dx and scale * d(value)/du into du.
  void accumulate_gradient(const double* x, const double* u, double scale, double* dx, double* du) const;
  std::string name(int state_dim, int control_dim) const;
};

/// Euler angles phi, theta, psi live at these state indices.
inline constexpr std::array<int, 3> kAngleStateIndices = {3, 4, 5};

std::vector<LibraryTerm> library_terms(const LibrarySpec& spec, int state_dim, int control_dim);
std::vector<std::string> library_term_names(const LibrarySpec& spec, int state_dim, int control_dim);

struct Library {
  Eigen::MatrixXd theta;  // m x p
  std::vector<std::string> names;
};

/// Evaluates the library on every row of X (m x n) and U (m x q).
Library build_library(const Eigen::MatrixXd& X, const Eigen::MatrixXd& U, const LibrarySpec& spec);

enum class SolverMethod { kSr3, kStlsq };
enum class ProxKind { kHard, kSoft };

struct SolverConfig {
  SolverMethod method = SolverMethod::kSr3;
  /// STLSQ: ridge weight. SR3: l1 weight for the soft prox.
  double lambda = 0.05;
  /// Coefficients with |xi| below this are zeroed (STLSQ, SR3 hard prox).
  double threshold = 0.05;
  int max_iter = 10000;
  double tol = 1e-12;
  /// SR3 relaxation nu in (1 / 2 nu) ||W - Xi||^2.
  double relaxation = 1.0;
  ProxKind prox = ProxKind::kHard;
  /// Least-squares refit on the selected support, re-thresholded until stable.
  bool unbias = true;
  /// Scale columns to unit RMS during the fit; stored coefficients are in raw units.
  bool normalize = false;

  void validate() const;
};

struct FitResult {
  Eigen::MatrixXd xi;  // p x n
  int iterations = 0;
  bool converged = false;
  bool rank_deficient = false;
  std::vector<std::string> warnings;
};

FitResult stlsq_fit(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& xdot, const SolverConfig& cfg);
FitResult sr3_fit(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& xdot, const SolverConfig& cfg);
/// Dispatches on cfg.method and applies cfg.normalize.
FitResult sparse_fit(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& xdot, const SolverConfig& cfg);

class SparseModel {
 public:
  SparseModel() = default;
  SparseModel(LibrarySpec spec, Eigen::MatrixXd xi, int state_dim = kStateDim, int control_dim = kControlDim);

  const LibrarySpec& spec() const { return spec_; }
  const Eigen::MatrixXd& xi() const { return xi_; }
  int state_dim() const { return state_dim_; }
  int control_dim() const { return control_dim_; }
  const std::vector<std::string>& term_names() const { return names_; }
  int active_terms() const;

  /// xdot = Theta(x, u) Xi for one sample; only nonzero rows of Xi are evaluated.
  Eigen::VectorXd predict(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;
  /// Row-wise prediction for X (m x n), U (m x q).
  Eigen::MatrixXd predict_batch(const Eigen::MatrixXd& X, const Eigen::MatrixXd& U) const;
  /// Analytic d(xdot)/dx (n x n) and d(xdot)/du (n x q).
  void jacobian(const Eigen::VectorXd& x, const Eigen::VectorXd& u, Eigen::MatrixXd& A, Eigen::MatrixXd& B) const;

  Vec12 derivative(const Vec12& x, const Vec4& u) const;
  void jacobian(const Vec12& x, const Vec4& u, Mat12& A, Mat12x4& B) const;

 private:
  struct ActiveTerm {
    LibraryTerm term;
    std::vector<std::pair<int, double>> coeffs;  // nonzero (column, value) of the Xi row
  };

  template <typename Out>
  void accumulate(const double* x, const double* u, Out& out) const;
  template <typename MatA, typename MatB>
  void accumulate_jacobian(const double* x, const double* u, MatA& A, MatB& B) const;

  LibrarySpec spec_;
  Eigen::MatrixXd xi_;
  int state_dim_ = kStateDim;
  int control_dim_ = kControlDim;
  std::vector<std::string> names_;
  std::vector<LibraryTerm> terms_;
  std::vector<ActiveTerm> active_;
};

/// Wraps a solver result as a model over the full state and control dimensions.
SparseModel sindy_model_from_fit(const LibrarySpec& spec, const FitResult& fit);

Eigen::VectorXd sindy_predict(const SparseModel& model, const Eigen::VectorXd& x, const Eigen::VectorXd& u);

struct SindyFit {
  SparseModel model;
  FitResult solver;
  Eigen::VectorXd residual_rmse;  // per state derivative
  int nonzeros = 0;
};

/// Builds Theta from the dataset's states/inputs and fits its derivs.
SindyFit identify_sindy(const FlightDataset& data, const LibrarySpec& spec, const SolverConfig& cfg);

}  // namespace quadid
