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

#include "quadid/sindy.hpp"

#include <cmath>
#include <sstream>

#include "quadid/kernels/kernels.hpp"

namespace quadid {

void LibrarySpec::validate() const {
  if (poly_degree != 1 && poly_degree != 2) {
    throw InputError("library poly_degree must be 1 or 2, got " + std::to_string(poly_degree));
  }
}

double LibraryTerm::value(const double* x, const double* u) const {
  switch (kind) {
    case Kind::kConstant: return 1.0;
    case Kind::kState: return x[i];
    case Kind::kControl: return u[i];
    case Kind::kStateState: return x[i] * x[j];
    case Kind::kStateControl: return x[i] * u[j];
    case Kind::kSin: return std::sin(x[j]);
    case Kind::kCos: return std::cos(x[j]);
    case Kind::kStateSin: return x[i] * std::sin(x[j]);
    case Kind::kStateCos: return x[i] * std::cos(x[j]);
  }
  return 0.0;
}

void LibraryTerm::accumulate_gradient(const double* x, const double* u, double s, double* dx, double* du) const {
  switch (kind) {
    case Kind::kConstant: break;
    case Kind::kState: dx[i] += s; break;
    case Kind::kControl: du[i] += s; break;
    case Kind::kStateState:
      dx[i] += s * x[j];
      dx[j] += s * x[i];
      break;
    case Kind::kStateControl:
      dx[i] += s * u[j];
      du[j] += s * x[i];
      break;
    case Kind::kSin: dx[j] += s * std::cos(x[j]); break;
    case Kind::kCos: dx[j] -= s * std::sin(x[j]); break;
    case Kind::kStateSin:
      dx[i] += s * std::sin(x[j]);
      dx[j] += s * x[i] * std::cos(x[j]);
      break;
    case Kind::kStateCos:
      dx[i] += s * std::cos(x[j]);
      dx[j] -= s * x[i] * std::sin(x[j]);
      break;
  }
}

namespace {

std::string state_name(int i, int n) {
  if (n == kStateDim) return std::string(kStateNames[static_cast<std::size_t>(i)]);
  return "x" + std::to_string(i);
}

std::string control_name(int j, int q) {
  if (q == kControlDim) return std::string(kInputNames[static_cast<std::size_t>(j)]);
  return "u" + std::to_string(j);
}

}  // namespace

std::string LibraryTerm::name(int n, int q) const {
  switch (kind) {
    case Kind::kConstant: return "1";
    case Kind::kState: return state_name(i, n);
    case Kind::kControl: return control_name(i, q);
    case Kind::kStateState: return i == j ? state_name(i, n) + "^2" : state_name(i, n) + "*" + state_name(j, n);
    case Kind::kStateControl: return state_name(i, n) + "*" + control_name(j, q);
    case Kind::kSin: return "sin(" + state_name(j, n) + ")";
    case Kind::kCos: return "cos(" + state_name(j, n) + ")";
    case Kind::kStateSin: return state_name(i, n) + "*sin(" + state_name(j, n) + ")";
    case Kind::kStateCos: return state_name(i, n) + "*cos(" + state_name(j, n) + ")";
  }
  return {};
}

std::vector<LibraryTerm> library_terms(const LibrarySpec& spec, int n, int q) {
  spec.validate();
  using K = LibraryTerm::Kind;
  const bool trig = spec.include_trig || spec.include_state_trig_cross;
  if (trig && n <= kAngleStateIndices.back()) {
    throw InputError("trigonometric library terms need the Euler angles at state indices 3..5");
  }
  std::vector<LibraryTerm> terms;
  if (spec.include_constant) terms.push_back({K::kConstant});
  for (int i = 0; i < n; ++i) terms.push_back({K::kState, i});
  if (spec.include_control_linear) {
    for (int j = 0; j < q; ++j) terms.push_back({K::kControl, j});
  }
  if (spec.poly_degree >= 2) {
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) terms.push_back({K::kStateState, i, j});
    }
  }
  if (spec.include_state_control_cross) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < q; ++j) terms.push_back({K::kStateControl, i, j});
    }
  }
  if (spec.include_trig) {
    for (int a : kAngleStateIndices) terms.push_back({K::kSin, -1, a});
    for (int a : kAngleStateIndices) terms.push_back({K::kCos, -1, a});
  }
  if (spec.include_state_trig_cross) {
    for (int a : kAngleStateIndices) {
      for (int i = 0; i < n; ++i) terms.push_back({K::kStateSin, i, a});
    }
    for (int a : kAngleStateIndices) {
      for (int i = 0; i < n; ++i) terms.push_back({K::kStateCos, i, a});
    }
  }
  return terms;
}

std::vector<std::string> library_term_names(const LibrarySpec& spec, int n, int q) {
  std::vector<std::string> names;
  for (const auto& t : library_terms(spec, n, q)) names.push_back(t.name(n, q));
  return names;
}

Library build_library(const Eigen::MatrixXd& X, const Eigen::MatrixXd& U, const LibrarySpec& spec) {
  if (X.rows() != U.rows()) {
    std::ostringstream msg;
    msg << "build_library: state rows " << X.rows() << " != input rows " << U.rows();
    throw InputError(msg.str());
  }
  if (!X.allFinite() || !U.allFinite()) throw InputError("build_library: non-finite data");
  const int n = static_cast<int>(X.cols());
  const int q = static_cast<int>(U.cols());
  const auto terms = library_terms(spec, n, q);
  const Eigen::Index m = X.rows();
  const auto len = static_cast<std::size_t>(m);

  Eigen::MatrixXd sines, cosines;
  if (spec.include_trig || spec.include_state_trig_cross) {
    sines.resize(m, X.cols());
    cosines.resize(m, X.cols());
    for (int a : kAngleStateIndices) {
      sines.col(a) = X.col(a).array().sin();
      cosines.col(a) = X.col(a).array().cos();
    }
  }

  Library lib;
  lib.theta.resize(m, static_cast<Eigen::Index>(terms.size()));
  lib.names.reserve(terms.size());
  auto col = [&](const Eigen::MatrixXd& M, int c) { return std::span<const double>(M.col(c).data(), len); };

  using K = LibraryTerm::Kind;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const LibraryTerm& term = terms[t];
    auto out = lib.theta.col(static_cast<Eigen::Index>(t));
    std::span<double> dst(out.data(), len);
    switch (term.kind) {
      case K::kConstant: out.setOnes(); break;
      case K::kState: out = X.col(term.i); break;
      case K::kControl: out = U.col(term.i); break;
      case K::kStateState: kernels::multiply(col(X, term.i), col(X, term.j), dst); break;
      case K::kStateControl: kernels::multiply(col(X, term.i), col(U, term.j), dst); break;
      case K::kSin: out = sines.col(term.j); break;
      case K::kCos: out = cosines.col(term.j); break;
      case K::kStateSin: kernels::multiply(col(X, term.i), col(sines, term.j), dst); break;
      case K::kStateCos: kernels::multiply(col(X, term.i), col(cosines, term.j), dst); break;
    }
    lib.names.push_back(term.name(n, q));
  }
  return lib;
}

void SolverConfig::validate() const {
  if (!(lambda >= 0.0) || !(threshold >= 0.0) || max_iter < 1 || !(tol >= 0.0) || !(relaxation > 0.0)) {
    throw InputError("solver config requires lambda >= 0, threshold >= 0, max_iter >= 1, relaxation > 0");
  }
}

namespace {

void check_fit_inputs(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& xdot, FitResult& result) {
  if (theta.rows() != xdot.rows()) throw InputError("sparse fit: Theta and Xdot row counts differ");
  if (theta.rows() == 0 || theta.cols() == 0) throw InputError("sparse fit: empty design matrix");
  if (!theta.allFinite() || !xdot.allFinite()) throw InputError("sparse fit: non-finite data");
  if (theta.rows() < theta.cols()) {
    result.warnings.push_back("fewer samples than library columns (" + std::to_string(theta.rows()) + " < " +
                              std::to_string(theta.cols()) + ")");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(theta);
  qr.setThreshold(1e-10);
  if (qr.rank() < theta.cols()) {
    result.rank_deficient = true;
    result.warnings.push_back("library matrix is rank deficient (rank " + std::to_string(qr.rank()) + " of " +
                              std::to_string(theta.cols()) + " columns)");
  }
}

std::vector<Eigen::Index> support_of(const Eigen::VectorXd& v) {
  std::vector<Eigen::Index> s;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (v(k) != 0.0) s.push_back(k);
  }
  return s;
}

// Ordinary least squares restricted to the columns in `support`.
Eigen::VectorXd refit_on_support(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y,
                                 const std::vector<Eigen::Index>& support);

/// Least-squares refit on the support, dropping entries that fall below the
/// threshold and refitting until the support is stable.
Eigen::VectorXd pruned_refit(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y, Eigen::VectorXd coef,
                             double threshold) {
  std::vector<Eigen::Index> support = support_of(coef);
  while (true) {
    coef = refit_on_support(theta, y, support);
    std::vector<Eigen::Index> kept;
    for (Eigen::Index k : support) {
      if (std::abs(coef(k)) >= threshold) kept.push_back(k);
    }
    if (kept.size() == support.size()) return coef;
    support = std::move(kept);
  }
}

Eigen::VectorXd refit_on_support(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y,
                                 const std::vector<Eigen::Index>& support) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(theta.cols());
  if (support.empty()) return out;
  Eigen::MatrixXd sub(theta.rows(), static_cast<Eigen::Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = theta.col(support[k]);
  const Eigen::VectorXd c = sub.completeOrthogonalDecomposition().solve(y);
  for (std::size_t k = 0; k < support.size(); ++k) out(support[k]) = c(static_cast<Eigen::Index>(k));
  return out;
}

}  // namespace

FitResult stlsq_fit(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& xdot, const SolverConfig& cfg) {
  cfg.validate();
  FitResult result;
  check_fit_inputs(theta, xdot, result);
  const Eigen::Index p = theta.cols();
  const Eigen::MatrixXd gram = theta.transpose() * theta;
  const Eigen::MatrixXd rhs = theta.transpose() * xdot;
  result.xi = Eigen::MatrixXd::Zero(p, xdot.cols());
  result.converged = true;

  for (Eigen::Index c = 0; c < xdot.cols(); ++c) {
    std::vector<Eigen::Index> active(static_cast<std::size_t>(p));
    for (Eigen::Index k = 0; k < p; ++k) active[static_cast<std::size_t>(k)] = k;
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(p);
    bool settled = false;
    int it = 0;
    while (it < cfg.max_iter && !active.empty()) {
      ++it;
      const auto na = static_cast<Eigen::Index>(active.size());
      Eigen::MatrixXd g(na, na);
      Eigen::VectorXd b(na);
      for (Eigen::Index r = 0; r < na; ++r) {
        b(r) = rhs(active[static_cast<std::size_t>(r)], c);
        for (Eigen::Index s = 0; s < na; ++s) {
          g(r, s) = gram(active[static_cast<std::size_t>(r)], active[static_cast<std::size_t>(s)]);
        }
      }
      g.diagonal().array() += cfg.lambda;
      const Eigen::VectorXd sol = g.ldlt().solve(b);
      coef.setZero();
      std::vector<Eigen::Index> next;
      for (Eigen::Index r = 0; r < na; ++r) {
        if (std::abs(sol(r)) >= cfg.threshold) {
          next.push_back(active[static_cast<std::size_t>(r)]);
          coef(active[static_cast<std::size_t>(r)]) = sol(r);
        }
      }
      if (next == active) {
        settled = true;
        break;
      }
      active = std::move(next);
    }
    if (active.empty()) settled = true;
    if (!settled) {
      result.converged = false;
      result.warnings.push_back("STLSQ did not settle for target " + std::to_string(c) + " after " +
                                std::to_string(it) + " iterations");
    }
    result.iterations = std::max(result.iterations, it);
    if (cfg.unbias) coef = pruned_refit(theta, xdot.col(c), coef, cfg.threshold);
    result.xi.col(c) = coef;
  }
  return result;
}

FitResult sr3_fit(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& xdot, const SolverConfig& cfg) {
  cfg.validate();
  FitResult result;
  check_fit_inputs(theta, xdot, result);
  const double inv_nu = 1.0 / cfg.relaxation;

  Eigen::MatrixXd H = theta.transpose() * theta;
  H.diagonal().array() += inv_nu;
  const Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() != Eigen::Success) throw NumericalError("SR3: relaxed normal matrix is not positive definite");
  const Eigen::MatrixXd rhs = theta.transpose() * xdot;

  auto prox = [&](const Eigen::MatrixXd& W) {
    Eigen::MatrixXd Z = W;
    if (cfg.prox == ProxKind::kHard) {
      Z = (W.array().abs() >= cfg.threshold).select(W, 0.0);
    } else {
      const double cut = cfg.lambda * cfg.relaxation;
      Z = W.array().sign() * (W.array().abs() - cut).max(0.0);
    }
    return Z;
  };

  Eigen::MatrixXd W = llt.solve(rhs);
  Eigen::MatrixXd Xi = prox(W);
  int it = 0;
  for (; it < cfg.max_iter; ++it) {
    const Eigen::MatrixXd W_next = llt.solve(rhs + inv_nu * Xi);
    const Eigen::MatrixXd Xi_next = prox(W_next);
    const double step = (W_next - W).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, W_next.cwiseAbs().maxCoeff());
    const bool same_support = ((Xi_next.array() != 0.0) == (Xi.array() != 0.0)).all();
    W = W_next;
    Xi = Xi_next;
    if (same_support && step <= cfg.tol * scale) {
      result.converged = true;
      ++it;
      break;
    }
  }
  result.iterations = it;
  if (!result.converged) {
    result.warnings.push_back("SR3 reached max_iter = " + std::to_string(cfg.max_iter) + " before converging");
  }
  if (cfg.unbias) {
    for (Eigen::Index c = 0; c < xdot.cols(); ++c) {
      Xi.col(c) = pruned_refit(theta, xdot.col(c), Xi.col(c), cfg.threshold);
    }
  }
  result.xi = Xi;
  return result;
}

FitResult sparse_fit(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& xdot, const SolverConfig& cfg) {
  auto run = [&](const Eigen::MatrixXd& th) {
    return cfg.method == SolverMethod::kSr3 ? sr3_fit(th, xdot, cfg) : stlsq_fit(th, xdot, cfg);
  };
  if (!cfg.normalize) return run(theta);

  Eigen::VectorXd scale(theta.cols());
  for (Eigen::Index k = 0; k < theta.cols(); ++k) {
    const double rms = theta.col(k).norm() / std::sqrt(static_cast<double>(std::max<Eigen::Index>(1, theta.rows())));
    scale(k) = rms > 0.0 ? rms : 1.0;
  }
  FitResult r = run(theta * scale.cwiseInverse().asDiagonal());
  r.xi = scale.cwiseInverse().asDiagonal() * r.xi;
  return r;
}

SparseModel::SparseModel(LibrarySpec spec, Eigen::MatrixXd xi, int state_dim, int control_dim)
    : spec_(spec), xi_(std::move(xi)), state_dim_(state_dim), control_dim_(control_dim) {
  terms_ = library_terms(spec_, state_dim_, control_dim_);
  names_ = library_term_names(spec_, state_dim_, control_dim_);
  if (xi_.rows() != static_cast<Eigen::Index>(terms_.size()) || xi_.cols() != state_dim_) {
    std::ostringstream msg;
    msg << "coefficient matrix is " << xi_.rows() << "x" << xi_.cols() << ", library expects " << terms_.size()
        << "x" << state_dim_;
    throw InputError(msg.str());
  }
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    ActiveTerm a{terms_[t], {}};
    for (int c = 0; c < state_dim_; ++c) {
      const double v = xi_(static_cast<Eigen::Index>(t), c);
      if (v != 0.0) a.coeffs.emplace_back(c, v);
    }
    if (!a.coeffs.empty()) active_.push_back(std::move(a));
  }
}

int SparseModel::active_terms() const { return static_cast<int>((xi_.array() != 0.0).count()); }

namespace {

/// Value and at most two partial derivatives of one term, with the trig of
/// the angle states precomputed. Slots index x when < n, u otherwise.
struct TermEval {
  double value = 0.0;
  int slot[2] = {-1, -1};
  double d[2] = {0.0, 0.0};
};

TermEval eval_term(const LibraryTerm& t, const double* x, const double* u, const double* sn, const double* cs,
                   int n) {
  TermEval e;
  switch (t.kind) {
    case LibraryTerm::Kind::kConstant:
      e.value = 1.0;
      break;
    case LibraryTerm::Kind::kState:
      e.value = x[t.i];
      e.slot[0] = t.i;
      e.d[0] = 1.0;
      break;
    case LibraryTerm::Kind::kControl:
      e.value = u[t.i];
      e.slot[0] = n + t.i;
      e.d[0] = 1.0;
      break;
    case LibraryTerm::Kind::kStateState:
      e.value = x[t.i] * x[t.j];
      e.slot[0] = t.i;
      e.d[0] = x[t.j];
      e.slot[1] = t.j;
      e.d[1] = x[t.i];
      break;
    case LibraryTerm::Kind::kStateControl:
      e.value = x[t.i] * u[t.j];
      e.slot[0] = t.i;
      e.d[0] = u[t.j];
      e.slot[1] = n + t.j;
      e.d[1] = x[t.i];
      break;
    case LibraryTerm::Kind::kSin:
      e.value = sn[t.j];
      e.slot[0] = t.j;
      e.d[0] = cs[t.j];
      break;
    case LibraryTerm::Kind::kCos:
      e.value = cs[t.j];
      e.slot[0] = t.j;
      e.d[0] = -sn[t.j];
      break;
    case LibraryTerm::Kind::kStateSin:
      e.value = x[t.i] * sn[t.j];
      e.slot[0] = t.i;
      e.d[0] = sn[t.j];
      e.slot[1] = t.j;
      e.d[1] = x[t.i] * cs[t.j];
      break;
    case LibraryTerm::Kind::kStateCos:
      e.value = x[t.i] * cs[t.j];
      e.slot[0] = t.i;
      e.d[0] = cs[t.j];
      e.slot[1] = t.j;
      e.d[1] = -x[t.i] * sn[t.j];
      break;
  }
  return e;
}

/// sin and cos of every state entry referenced as an angle; indexed by state.
void angle_trig(const double* x, int n, std::vector<double>& sn, std::vector<double>& cs) {
  sn.assign(static_cast<std::size_t>(n), 0.0);
  cs.assign(static_cast<std::size_t>(n), 1.0);
  for (int a : kAngleStateIndices) {
    if (a < n) {
      sn[static_cast<std::size_t>(a)] = std::sin(x[a]);
      cs[static_cast<std::size_t>(a)] = std::cos(x[a]);
    }
  }
}

}  // namespace

template <typename Out>
void SparseModel::accumulate(const double* x, const double* u, Out& out) const {
  double sn[kStateDim], cs[kStateDim];
  std::vector<double> snv, csv;
  const double* ps = sn;
  const double* pc = cs;
  if (state_dim_ == kStateDim) {
    for (int k = 0; k < kStateDim; ++k) {
      sn[k] = 0.0;
      cs[k] = 1.0;
    }
    for (int a : kAngleStateIndices) {
      sn[a] = std::sin(x[a]);
      cs[a] = std::cos(x[a]);
    }
  } else {
    angle_trig(x, state_dim_, snv, csv);
    ps = snv.data();
    pc = csv.data();
  }
  for (const auto& a : active_) {
    const double v = eval_term(a.term, x, u, ps, pc, state_dim_).value;
    for (const auto& [c, coef] : a.coeffs) out(c) += coef * v;
  }
}

template <typename MatA, typename MatB>
void SparseModel::accumulate_jacobian(const double* x, const double* u, MatA& A, MatB& B) const {
  std::vector<double> sn, cs;
  angle_trig(x, state_dim_, sn, cs);
  for (const auto& a : active_) {
    const TermEval e = eval_term(a.term, x, u, sn.data(), cs.data(), state_dim_);
    for (int s = 0; s < 2; ++s) {
      const int slot = e.slot[s];
      if (slot < 0) continue;
      for (const auto& [c, coef] : a.coeffs) {
        if (slot < state_dim_) {
          A(c, slot) += coef * e.d[s];
        } else {
          B(c, slot - state_dim_) += coef * e.d[s];
        }
      }
    }
  }
}

Eigen::VectorXd SparseModel::predict(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
  if (x.size() != state_dim_ || u.size() != control_dim_) throw InputError("sindy_predict: dimension mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(state_dim_);
  accumulate(x.data(), u.data(), out);
  return out;
}

Eigen::MatrixXd SparseModel::predict_batch(const Eigen::MatrixXd& X, const Eigen::MatrixXd& U) const {
  if (X.cols() != state_dim_ || U.cols() != control_dim_) throw InputError("sindy_predict: dimension mismatch");
  const Library lib = build_library(X, U, spec_);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(X.rows(), state_dim_);
  const auto len = static_cast<std::size_t>(X.rows());
  for (Eigen::Index t = 0; t < xi_.rows(); ++t) {
    for (Eigen::Index c = 0; c < xi_.cols(); ++c) {
      const double coef = xi_(t, c);
      if (coef == 0.0) continue;
      kernels::axpy(coef, {lib.theta.col(t).data(), len}, {out.col(c).data(), len});
    }
  }
  return out;
}

void SparseModel::jacobian(const Eigen::VectorXd& x, const Eigen::VectorXd& u, Eigen::MatrixXd& A,
                           Eigen::MatrixXd& B) const {
  if (x.size() != state_dim_ || u.size() != control_dim_) throw InputError("sindy jacobian: dimension mismatch");
  A = Eigen::MatrixXd::Zero(state_dim_, state_dim_);
  B = Eigen::MatrixXd::Zero(state_dim_, control_dim_);
  accumulate_jacobian(x.data(), u.data(), A, B);
}

Vec12 SparseModel::derivative(const Vec12& x, const Vec4& u) const {
  if (state_dim_ != kStateDim || control_dim_ != kControlDim) throw InputError("model is not a 12-state model");
  Vec12 out = Vec12::Zero();
  accumulate(x.data(), u.data(), out);
  return out;
}

void SparseModel::jacobian(const Vec12& x, const Vec4& u, Mat12& A, Mat12x4& B) const {
  if (state_dim_ != kStateDim || control_dim_ != kControlDim) throw InputError("model is not a 12-state model");
  A.setZero();
  B.setZero();
  accumulate_jacobian(x.data(), u.data(), A, B);
}

SparseModel sindy_model_from_fit(const LibrarySpec& spec, const FitResult& fit) {
  return SparseModel(spec, fit.xi, static_cast<int>(fit.xi.cols()), kControlDim);
}

Eigen::VectorXd sindy_predict(const SparseModel& model, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
  return model.predict(x, u);
}

SindyFit identify_sindy(const FlightDataset& data, const LibrarySpec& spec, const SolverConfig& cfg) {
  if (data.samples() == 0) throw InputError("identify_sindy: empty dataset");
  data.validate();
  if (!data.has_derivs()) throw InputError("identify_sindy: dataset has no state derivatives");
  const Library lib = build_library(data.states.values, data.inputs.values, spec);
  SindyFit out;
  out.solver = sparse_fit(lib.theta, data.derivs.values, cfg);
  out.model = SparseModel(spec, out.solver.xi, static_cast<int>(data.states.channels()),
                          static_cast<int>(data.inputs.channels()));
  const Eigen::MatrixXd resid = lib.theta * out.solver.xi - data.derivs.values;
  out.residual_rmse = (resid.colwise().squaredNorm() / static_cast<double>(resid.rows())).cwiseSqrt().transpose();
  out.nonzeros = out.model.active_terms();
  return out;
}

}  // namespace quadid
