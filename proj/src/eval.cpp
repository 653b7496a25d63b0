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

#include "quadid/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include "quadid/kernels/kernels.hpp"

namespace quadid {

std::string_view trajectory_name(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::kSinusoidal: return "sinusoidal";
    case TrajectoryKind::kCircular: return "circular";
    case TrajectoryKind::kSpiral: return "spiral";
  }
  return "unknown";
}

TrajectoryKind parse_trajectory(std::string_view name) {
  if (name == "sinusoidal") return TrajectoryKind::kSinusoidal;
  if (name == "circular") return TrajectoryKind::kCircular;
  if (name == "spiral") return TrajectoryKind::kSpiral;
  throw InputError("unknown trajectory '" + std::string(name) + "' (expected sinusoidal, circular or spiral)");
}

ReferenceSample reference_position(TrajectoryKind kind, double t) {
  if (!(t >= 0.0)) throw InputError("reference_position: t must be >= 0");
  ReferenceSample r;
  switch (kind) {
    case TrajectoryKind::kSinusoidal: {
      const double a = 0.32, b = 0.64;
      r.position = {4.0 * std::sin(a * t) + 3.0, 4.0 * std::sin(b * t), 2.0 * std::sin(b * t) + 6.0};
      r.velocity = {4.0 * a * std::cos(a * t), 4.0 * b * std::cos(b * t), 2.0 * b * std::cos(b * t)};
      r.acceleration = {-4.0 * a * a * std::sin(a * t), -4.0 * b * b * std::sin(b * t),
                        -2.0 * b * b * std::sin(b * t)};
      break;
    }
    case TrajectoryKind::kCircular: {
      const double c = std::cos(t), s = std::sin(t);
      r.position = {5.0 * c, 5.0 * s, 6.0};
      r.velocity = {-5.0 * s, 5.0 * c, 0.0};
      r.acceleration = {-5.0 * c, -5.0 * s, 0.0};
      break;
    }
    case TrajectoryKind::kSpiral: {
      const double k = 0.06;
      const double e = std::exp(k * t), c = std::cos(t), s = std::sin(t);
      r.position = {e * c, e * s, 0.1 * t + 5.0};
      r.velocity = {e * (k * c - s), e * (k * s + c), 0.1};
      r.acceleration = {e * ((k * k - 1.0) * c - 2.0 * k * s), e * ((k * k - 1.0) * s + 2.0 * k * c), 0.0};
      break;
    }
  }
  return r;
}

namespace {

void require_aligned(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& ref) {
  if (pred.rows() != ref.rows() || pred.cols() != ref.cols()) {
    std::ostringstream msg;
    msg << "metric inputs are not aligned: " << pred.rows() << "x" << pred.cols() << " vs " << ref.rows() << "x"
        << ref.cols();
    throw InputError(msg.str());
  }
  if (pred.rows() == 0) throw InputError("metric inputs are empty");
}

void require_aligned(const TimeSeries& pred, const TimeSeries& ref) {
  require_aligned(pred.values, ref.values);
  if (std::abs(pred.dt - ref.dt) > 1e-12 * std::max(pred.dt, ref.dt)) {
    throw InputError("metric inputs have different sample spacing");
  }
}

std::span<const double> column(const Eigen::MatrixXd& m, Eigen::Index c) {
  return {m.col(c).data(), static_cast<std::size_t>(m.rows())};
}

}  // namespace

ErrorMetric rmse(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& ref) {
  require_aligned(pred, ref);
  ErrorMetric out;
  out.per_channel.resize(pred.cols());
  double total = 0.0;
  for (Eigen::Index c = 0; c < pred.cols(); ++c) {
    const double ss = kernels::sum_sq_diff(column(pred, c), column(ref, c));
    total += ss;
    out.per_channel(c) = std::sqrt(ss / static_cast<double>(pred.rows()));
  }
  out.aggregate = std::sqrt(total / static_cast<double>(pred.size()));
  return out;
}

ErrorMetric mae(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& ref) {
  require_aligned(pred, ref);
  ErrorMetric out;
  out.per_channel.resize(pred.cols());
  double total = 0.0;
  for (Eigen::Index c = 0; c < pred.cols(); ++c) {
    const double sa = kernels::sum_abs_diff(column(pred, c), column(ref, c));
    total += sa;
    out.per_channel(c) = sa / static_cast<double>(pred.rows());
  }
  out.aggregate = total / static_cast<double>(pred.size());
  return out;
}

ErrorMetric rmse(const TimeSeries& pred, const TimeSeries& ref) {
  require_aligned(pred, ref);
  return rmse(pred.values, ref.values);
}

ErrorMetric mae(const TimeSeries& pred, const TimeSeries& ref) {
  require_aligned(pred, ref);
  return mae(pred.values, ref.values);
}

ErrorMetric concordance_index(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& ref, ConcordanceKind kind) {
  require_aligned(pred, ref);
  const auto n = static_cast<double>(pred.rows());
  ErrorMetric out;
  out.per_channel.resize(pred.cols());
  double num_total = 0.0, den_total = 0.0;
  for (Eigen::Index c = 0; c < pred.cols(); ++c) {
    const auto p = pred.col(c).array();
    const auto r = ref.col(c).array();
    double num = 0.0, den = 0.0;
    if (kind == ConcordanceKind::kWillmott) {
      const double rbar = r.mean();
      num = kernels::sum_sq_diff(column(pred, c), column(ref, c));
      den = ((p - rbar).abs() + (r - rbar).abs()).square().sum();
      out.per_channel(c) = den > 0.0 ? std::clamp(1.0 - num / den, 0.0, 1.0) : 1.0;
      num_total += num;
      den_total += den;
    } else {
      const double pbar = p.mean(), rbar = r.mean();
      const double cov = ((p - pbar) * (r - rbar)).sum() / n;
      const double vp = (p - pbar).square().sum() / n;
      const double vr = (r - rbar).square().sum() / n;
      num = 2.0 * cov;
      den = vp + vr + (pbar - rbar) * (pbar - rbar);
      out.per_channel(c) = den > 0.0 ? num / den : 1.0;
      num_total += num;
      den_total += den;
    }
  }
  if (kind == ConcordanceKind::kWillmott) {
    out.aggregate = den_total > 0.0 ? std::clamp(1.0 - num_total / den_total, 0.0, 1.0) : 1.0;
  } else {
    out.aggregate = den_total > 0.0 ? num_total / den_total : 1.0;
  }
  return out;
}

ErrorMetric concordance_index(const TimeSeries& pred, const TimeSeries& ref, ConcordanceKind kind) {
  require_aligned(pred, ref);
  return concordance_index(pred.values, ref.values, kind);
}

MetricReport metric_report(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& ref, std::vector<std::string> channels,
                           ConcordanceKind kind) {
  if (static_cast<Eigen::Index>(channels.size()) != pred.cols()) {
    throw InputError("metric_report: channel names do not match the column count");
  }
  MetricReport r;
  r.channels = std::move(channels);
  r.rmse = rmse(pred, ref);
  r.mae = mae(pred, ref);
  r.concordance = concordance_index(pred, ref, kind);
  r.concordance_kind = kind;
  return r;
}

TrackingMetrics tracking_metrics(const Eigen::MatrixXd& position, const Eigen::MatrixXd& reference,
                                 ConcordanceKind kind) {
  require_aligned(position, reference);
  TrackingMetrics m;
  m.axes = metric_report(position, reference, {"x", "y", "z"}, kind);
  const Eigen::VectorXd norms = (position - reference).rowwise().norm();
  m.rmse_3d = std::sqrt(norms.squaredNorm() / static_cast<double>(norms.size()));
  m.mae_3d = norms.mean();
  return m;
}

namespace {

nlohmann::json metric_json(const ErrorMetric& m, const std::vector<std::string>& channels) {
  nlohmann::json per = nlohmann::json::object();
  for (std::size_t c = 0; c < channels.size(); ++c) per[channels[c]] = m.per_channel(static_cast<Eigen::Index>(c));
  return {{"per_channel", per}, {"aggregate", m.aggregate}};
}

}  // namespace

nlohmann::json to_json(const MetricReport& r) {
  return {{"rmse", metric_json(r.rmse, r.channels)},
          {"mae", metric_json(r.mae, r.channels)},
          {"concordance", metric_json(r.concordance, r.channels)},
          {"concordance_kind", r.concordance_kind == ConcordanceKind::kWillmott ? "willmott" : "lin"}};
}

nlohmann::json to_json(const TrackingMetrics& m) {
  nlohmann::json j = to_json(m.axes);
  j["rmse_3d"] = m.rmse_3d;
  j["mae_3d"] = m.mae_3d;
  return j;
}

std::string render_state_table(const std::vector<std::pair<std::string, MetricReport>>& reports) {
  std::ostringstream os;
  if (reports.empty()) return {};
  const auto& channels = reports.front().second.channels;
  os << std::left << std::setw(10) << "state";
  for (const char* metric : {"RMSE", "MAE", "Concordance"}) {
    for (const auto& [name, r] : reports) {
      os << std::right << std::setw(14) << (std::string(metric) + " " + name).substr(0, 13);
    }
  }
  os << '\n';
  auto row = [&](const std::string& label, auto getter) {
    os << std::left << std::setw(10) << label << std::fixed << std::setprecision(4);
    for (int g = 0; g < 3; ++g) {
      for (const auto& entry : reports) os << std::right << std::setw(14) << getter(entry.second, g);
    }
    os << '\n';
  };
  for (std::size_t c = 0; c < channels.size(); ++c) {
    const auto idx = static_cast<Eigen::Index>(c);
    row(channels[c], [&](const MetricReport& r, int g) {
      return g == 0 ? r.rmse.per_channel(idx) : g == 1 ? r.mae.per_channel(idx) : r.concordance.per_channel(idx);
    });
  }
  row("x (all)", [](const MetricReport& r, int g) {
    return g == 0 ? r.rmse.aggregate : g == 1 ? r.mae.aggregate : r.concordance.aggregate;
  });
  return os.str();
}

std::string render_tracking_table(const std::vector<TrackingRow>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(14) << "Experiment" << std::setw(10) << "Model" << std::right << std::setw(10)
     << "RMSE" << std::setw(10) << "MAE" << std::setw(14) << "Concordance" << '\n';
  os << std::fixed << std::setprecision(4);
  std::vector<std::string> model_order;
  std::map<std::string, std::array<double, 4>> sums;
  for (const auto& r : rows) {
    os << std::left << std::setw(14) << r.experiment << std::setw(10) << r.model << std::right << std::setw(10)
       << r.rmse << std::setw(10) << r.mae << std::setw(14) << r.concordance << '\n';
    if (!sums.contains(r.model)) model_order.push_back(r.model);
    auto& s = sums[r.model];
    s[0] += r.rmse;
    s[1] += r.mae;
    s[2] += r.concordance;
    s[3] += 1.0;
  }
  for (const auto& model : model_order) {
    const auto& s = sums[model];
    os << std::left << std::setw(14) << "Average" << std::setw(10) << model << std::right << std::setw(10)
       << s[0] / s[3] << std::setw(10) << s[1] / s[3] << std::setw(14) << s[2] / s[3] << '\n';
  }
  return os.str();
}

}  // namespace quadid
