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

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "quadid/common.hpp"
#include "quadid/signals.hpp"

namespace quadid {

enum class TrajectoryKind { kSinusoidal, kCircular, kSpiral };

std::string_view trajectory_name(TrajectoryKind kind);
/// Accepts "sinusoidal", "circular", "spiral" (case-sensitive).
TrajectoryKind parse_trajectory(std::string_view name);

struct ReferenceSample {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();
};

/// Closed-form desired position with analytic first and second derivatives.
/// Throws InputError for t < 0.
ReferenceSample reference_position(TrajectoryKind kind, double t);

enum class ConcordanceKind { kWillmott, kLin };

struct ErrorMetric {
  Eigen::VectorXd per_channel;
  double aggregate = 0.0;
};

/// Per-channel sqrt(mean((p - r)^2)); aggregate over the stacked error matrix.
ErrorMetric rmse(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& ref);
ErrorMetric rmse(const TimeSeries& pred, const TimeSeries& ref);
/// Per-channel mean |p - r|; aggregate over the stacked error matrix.
ErrorMetric mae(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& ref);
ErrorMetric mae(const TimeSeries& pred, const TimeSeries& ref);

/// Willmott's index of agreement d = 1 - sum (p - r)^2 / sum (|p - rbar| + |r - rbar|)^2,
/// in [0, 1]. A vanishing denominator (constant identical series) gives 1.
/// kLin computes Lin's concordance correlation coefficient instead, which may
/// be negative. The aggregate pools numerators and denominators of all
/// channels, each channel centred on its own reference mean.
ErrorMetric concordance_index(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& ref,
                              ConcordanceKind kind = ConcordanceKind::kWillmott);
ErrorMetric concordance_index(const TimeSeries& pred, const TimeSeries& ref,
                              ConcordanceKind kind = ConcordanceKind::kWillmott);

struct MetricReport {
  std::vector<std::string> channels;
  ErrorMetric rmse;
  ErrorMetric mae;
  ErrorMetric concordance;
  ConcordanceKind concordance_kind = ConcordanceKind::kWillmott;
};

MetricReport metric_report(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& ref, std::vector<std::string> channels,
                           ConcordanceKind kind = ConcordanceKind::kWillmott);

/// Position-tracking summary: per-axis report plus 3-D norm errors
/// rmse_3d = sqrt(mean |e_k|^2), mae_3d = mean |e_k|.
struct TrackingMetrics {
  MetricReport axes;
  double rmse_3d = 0.0;
  double mae_3d = 0.0;
};

TrackingMetrics tracking_metrics(const Eigen::MatrixXd& position, const Eigen::MatrixXd& reference,
                                 ConcordanceKind kind = ConcordanceKind::kWillmott);

nlohmann::json to_json(const MetricReport& report);
nlohmann::json to_json(const TrackingMetrics& metrics);

/// Aligned text table, one row per channel (plus the aggregate row) and one
/// RMSE/MAE/concordance column group per named report.
std::string render_state_table(const std::vector<std::pair<std::string, MetricReport>>& reports);

struct TrackingRow {
  std::string experiment;
  std::string model;
  double rmse = 0.0;
  double mae = 0.0;
  double concordance = 0.0;
};

/// Experiment/model rows with an average block per model.
std::string render_tracking_table(const std::vector<TrackingRow>& rows);

}  // namespace quadid
