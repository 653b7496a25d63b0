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

#include <array>
#include <string_view>
#include <vector>

#include "quadid/common.hpp"

namespace quadid {

/// Uniformly sampled multichannel series; values is samples x channels,
/// column-major so each channel is contiguous.
struct TimeSeries {
  double t0 = 0.0;
  double dt = 1.0;
  Eigen::MatrixXd values;

  Eigen::Index samples() const { return values.rows(); }
  Eigen::Index channels() const { return values.cols(); }
  double time(Eigen::Index k) const { return t0 + static_cast<double>(k) * dt; }
  Eigen::VectorXd times() const;

  /// Throws InputError if dt <= 0 or a value is not finite.
  void validate() const;
};

inline constexpr std::array<std::string_view, 12> kStateNames = {
    "eta_x", "eta_y", "eta_z", "phi", "theta", "psi", "deta_x", "deta_y", "deta_z", "dphi", "dtheta", "dpsi"};
inline constexpr std::array<std::string_view, 4> kInputNames = {"vz_d", "phi_d", "theta_d", "dpsi_d"};

/// States (12 channels), commanded inputs (4) and state derivatives (12,
/// empty until computed). All members share length and sampling.
struct FlightDataset {
  TimeSeries states;
  TimeSeries inputs;
  TimeSeries derivs;

  Eigen::Index samples() const { return states.samples(); }
  bool has_derivs() const { return derivs.samples() == states.samples() && derivs.channels() == kStateDim; }
  void validate() const;
};

/// First-order low-pass lambda / (s + lambda), zero-order-hold discretized:
/// y[k+1] = a y[k] + (1 - a) u[k] with a = exp(-lambda dt) and y[0] = u[0].
TimeSeries lowpass(const TimeSeries& series, double lambda);

/// Savitzky-Golay smoothing (deriv_order = 0) or differentiation. Interior
/// samples use the centered convolution; the first and last window/2 samples
/// are evaluated from the polynomial fitted to the one-sided edge window, so
/// the output has the input's length.
TimeSeries savitzky_golay(const TimeSeries& series, int window, int poly_order, int deriv_order);

/// Convolution weights that evaluate the deriv_order-th derivative (per unit
/// sample spacing) of the fitted polynomial at `offset` from the window centre.
Eigen::VectorXd savitzky_golay_weights(int window, int poly_order, int deriv_order, int offset);

/// Central differences in the interior, second-order one-sided at the edges.
TimeSeries differentiate(const TimeSeries& series);

/// Cumulative trapezoid integral starting at zero.
TimeSeries integrate(const TimeSeries& series);

struct PreprocessConfig {
  int sg_window = 201;
  int sg_order = 5;
  /// Replace the states by their Savitzky-Golay smoothed values.
  bool smooth_states = true;

  void validate() const;
  bool operator==(const PreprocessConfig&) const = default;
};

/// Fills derivs with the Savitzky-Golay derivative of the measured states and
/// optionally smooths the states with the same window. Inputs pass through.
FlightDataset preprocess(const FlightDataset& raw, const PreprocessConfig& cfg);

/// Maps an angle to [-pi, pi].
double wrap_angle(double a);

/// Copy of the dataset with the yaw state channel wrapped to [-pi, pi].
FlightDataset wrap_yaw(const FlightDataset& data);

/// Stacks datasets row-wise. All parts must share dt and carry derivs either
/// all or none; the result starts at the first part's t0.
FlightDataset concatenate(const std::vector<FlightDataset>& parts);

}  // namespace quadid
