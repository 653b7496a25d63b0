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

#include "quadid/signals.hpp"

#include <cmath>
#include <sstream>

#include "quadid/kernels/kernels.hpp"

namespace quadid {

Eigen::VectorXd TimeSeries::times() const {
  return Eigen::VectorXd::LinSpaced(samples(), 0.0, static_cast<double>(samples() - 1)).array() * dt + t0;
}

void TimeSeries::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw InputError("time series dt must be positive, got " + std::to_string(dt));
  }
  if (!values.allFinite()) {
    throw InputError("time series contains non-finite values");
  }
}

void FlightDataset::validate() const {
  states.validate();
  inputs.validate();
  if (states.channels() != kStateDim || inputs.channels() != kControlDim) {
    throw InputError("dataset must carry 12 state and 4 input channels");
  }
  auto aligned = [&](const TimeSeries& s) {
    return s.samples() == states.samples() && std::abs(s.dt - states.dt) <= 1e-12 * states.dt;
  };
  if (!aligned(inputs)) throw InputError("dataset inputs are not aligned with states");
  if (derivs.samples() != 0) {
    derivs.validate();
    if (!aligned(derivs) || derivs.channels() != kStateDim) {
      throw InputError("dataset derivatives are not aligned with states");
    }
  }
}

TimeSeries lowpass(const TimeSeries& series, double lambda) {
  if (!(lambda > 0.0)) throw InputError("lowpass: lambda must be positive");
  TimeSeries out = series;
  const double a = std::exp(-lambda * series.dt);
  const Eigen::Index n = series.samples();
  for (Eigen::Index c = 0; c < series.channels(); ++c) {
    const double* u = series.values.col(c).data();
    double* y = out.values.col(c).data();
    if (n == 0) continue;
    y[0] = u[0];
    for (Eigen::Index k = 0; k + 1 < n; ++k) y[k + 1] = a * y[k] + (1.0 - a) * u[k];
  }
  return out;
}

Eigen::VectorXd savitzky_golay_weights(int window, int poly_order, int deriv_order, int offset) {
  const int half = window / 2;
  Eigen::MatrixXd A(window, poly_order + 1);
  for (int i = 0; i < window; ++i) {
    double s = 1.0;
    for (int j = 0; j <= poly_order; ++j) {
      A(i, j) = s;
      s *= static_cast<double>(i - half);
    }
  }
  // pinv(A) maps window samples to polynomial coefficients.
  const Eigen::MatrixXd pinv = A.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(window, window));

  // Row that evaluates the deriv_order-th derivative at `offset`.
  Eigen::VectorXd e = Eigen::VectorXd::Zero(poly_order + 1);
  for (int j = deriv_order; j <= poly_order; ++j) {
    double falling = 1.0;
    for (int r = 0; r < deriv_order; ++r) falling *= static_cast<double>(j - r);
    e(j) = falling * std::pow(static_cast<double>(offset), j - deriv_order);
  }
  return pinv.transpose() * e;
}

TimeSeries savitzky_golay(const TimeSeries& series, int window, int poly_order, int deriv_order) {
  if (window < 1 || window % 2 == 0 || poly_order < 0 || poly_order >= window || deriv_order < 0 ||
      deriv_order > poly_order) {
    std::ostringstream msg;
    msg << "savitzky_golay: invalid parameters window=" << window << " poly_order=" << poly_order
        << " deriv_order=" << deriv_order;
    throw InputError(msg.str());
  }
  const Eigen::Index n = series.samples();
  if (n < window) {
    throw InputError("savitzky_golay: series shorter than the window");
  }
  const int half = window / 2;
  const double scale = 1.0 / std::pow(series.dt, deriv_order);

  std::vector<Eigen::VectorXd> weights;
  weights.reserve(static_cast<std::size_t>(window));
  for (int offset = -half; offset <= half; ++offset) {
    weights.push_back(savitzky_golay_weights(window, poly_order, deriv_order, offset) * scale);
  }
  const Eigen::VectorXd& centre = weights[static_cast<std::size_t>(half)];

  TimeSeries out = series;
  Eigen::VectorXd interior(n - window + 1);
  for (Eigen::Index c = 0; c < series.channels(); ++c) {
    const auto x = series.values.col(c);
    kernels::correlate({x.data(), static_cast<std::size_t>(n)},
                       {centre.data(), static_cast<std::size_t>(window)},
                       {interior.data(), static_cast<std::size_t>(interior.size())});
    out.values.col(c).segment(half, interior.size()) = interior;

    const std::span<const double> head(x.data(), static_cast<std::size_t>(window));
    const std::span<const double> tail(x.data() + (n - window), static_cast<std::size_t>(window));
    for (int i = 0; i < half; ++i) {
      const Eigen::VectorXd& w_head = weights[static_cast<std::size_t>(i)];
      const Eigen::VectorXd& w_tail = weights[static_cast<std::size_t>(half + 1 + i)];
      out.values(i, c) = kernels::dot(head, {w_head.data(), head.size()});
      out.values(n - half + i, c) = kernels::dot(tail, {w_tail.data(), tail.size()});
    }
  }
  return out;
}

TimeSeries differentiate(const TimeSeries& series) {
  const Eigen::Index n = series.samples();
  if (n < 3) throw InputError("differentiate: need at least 3 samples");
  TimeSeries out = series;
  const double inv2h = 1.0 / (2.0 * series.dt);
  const auto& v = series.values;
  out.values.middleRows(1, n - 2) = (v.bottomRows(n - 2) - v.topRows(n - 2)) * inv2h;
  out.values.row(0) = (-3.0 * v.row(0) + 4.0 * v.row(1) - v.row(2)) * inv2h;
  out.values.row(n - 1) = (3.0 * v.row(n - 1) - 4.0 * v.row(n - 2) + v.row(n - 3)) * inv2h;
  return out;
}

TimeSeries integrate(const TimeSeries& series) {
  TimeSeries out = series;
  const Eigen::Index n = series.samples();
  if (n == 0) return out;
  out.values.row(0).setZero();
  for (Eigen::Index k = 1; k < n; ++k) {
    out.values.row(k) = out.values.row(k - 1) + 0.5 * series.dt * (series.values.row(k - 1) + series.values.row(k));
  }
  return out;
}

void PreprocessConfig::validate() const {
  if (sg_window < 3 || sg_window % 2 == 0) throw InputError("sg_window must be odd and >= 3");
  if (sg_order < 1 || sg_order >= sg_window) throw InputError("sg_order must be in [1, sg_window)");
}

FlightDataset preprocess(const FlightDataset& raw, const PreprocessConfig& cfg) {
  raw.validate();
  cfg.validate();
  FlightDataset out = raw;
  out.derivs = savitzky_golay(raw.states, cfg.sg_window, cfg.sg_order, 1);
  if (cfg.smooth_states) out.states = savitzky_golay(raw.states, cfg.sg_window, cfg.sg_order, 0);
  return out;
}

double wrap_angle(double a) { return std::remainder(a, 2.0 * M_PI); }

FlightDataset wrap_yaw(const FlightDataset& data) {
  FlightDataset out = data;
  if (out.states.channels() != kStateDim) throw InputError("wrap_yaw: dataset must have 12 state channels");
  for (Eigen::Index k = 0; k < out.states.samples(); ++k) out.states.values(k, 5) = wrap_angle(out.states.values(k, 5));
  return out;
}

FlightDataset concatenate(const std::vector<FlightDataset>& parts) {
  if (parts.empty()) throw InputError("concatenate: no datasets");
  const bool derivs = parts.front().has_derivs();
  Eigen::Index rows = 0;
  for (const auto& p : parts) {
    p.validate();
    if (std::abs(p.states.dt - parts.front().states.dt) > 1e-12 * parts.front().states.dt) throw InputError("concatenate: datasets differ in sample spacing");
    if (p.has_derivs() != derivs) throw InputError("concatenate: datasets disagree on derivatives");
    rows += p.samples();
  }
  const double dt = parts.front().states.dt;
  const double t0 = parts.front().states.t0;
  FlightDataset out;
  out.states = {t0, dt, Eigen::MatrixXd(rows, kStateDim)};
  out.inputs = {t0, dt, Eigen::MatrixXd(rows, kControlDim)};
  if (derivs) out.derivs = {t0, dt, Eigen::MatrixXd(rows, kStateDim)};
  Eigen::Index r = 0;
  for (const auto& p : parts) {
    const Eigen::Index m = p.samples();
    out.states.values.middleRows(r, m) = p.states.values;
    out.inputs.values.middleRows(r, m) = p.inputs.values;
    if (derivs) out.derivs.values.middleRows(r, m) = p.derivs.values;
    r += m;
  }
  return out;
}

}  // namespace quadid
