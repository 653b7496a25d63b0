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

#include "quadid/io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace quadid {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return in;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  return out;
}

double parse_number(const std::string& cell, const std::string& path, long line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw InputError(path + ":" + std::to_string(line) + ": not a number: '" + cell + "'");
  }
}

std::vector<std::string> dataset_header() {
  std::vector<std::string> h{"t"};
  for (auto n : kStateNames) h.emplace_back(n);
  for (auto n : kInputNames) h.emplace_back(n);
  return h;
}

std::vector<std::string> log_header() {
  std::vector<std::string> h{"t"};
  for (auto n : kStateNames) h.emplace_back(n);
  for (auto n : kInputNames) h.emplace_back(n);
  for (const char* n : {"ref_x", "ref_y", "ref_z", "cost", "kkt", "solve_ms"}) h.emplace_back(n);
  return h;
}

void write_row(std::ostream& out, const double* v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out << ',';
    out << fmt(v[i]);
  }
  out << '\n';
}

json library_json(const LibrarySpec& s) {
  return {{"include_constant", s.include_constant},
          {"poly_degree", s.poly_degree},
          {"include_control_linear", s.include_control_linear},
          {"include_state_control_cross", s.include_state_control_cross},
          {"include_trig", s.include_trig},
          {"include_state_trig_cross", s.include_state_trig_cross}};
}

template <typename T>
T field(const json& j, const char* key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) throw InputError(where + ": missing key '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw InputError(where + ": key '" + std::string(key) + "' has the wrong type");
  }
}

}  // namespace

void write_dataset_csv(const std::string& path, const FlightDataset& data) {
  data.validate();
  auto out = open_out(path);
  const auto header = dataset_header();
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  std::array<double, 17> row{};
  for (Eigen::Index k = 0; k < data.samples(); ++k) {
    row[0] = data.states.time(k);
    for (int c = 0; c < kStateDim; ++c) row[static_cast<std::size_t>(1 + c)] = data.states.values(k, c);
    for (int c = 0; c < kControlDim; ++c) row[static_cast<std::size_t>(13 + c)] = data.inputs.values(k, c);
    write_row(out, row.data(), row.size());
  }
  if (!out) throw InputError("failed writing " + path);
}

FlightDataset read_dataset_csv(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw InputError(path + ": empty file");
  if (split(line) != dataset_header()) throw InputError(path + ": unexpected dataset header");
  std::vector<std::array<double, 17>> rows;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() != 17) throw InputError(path + ":" + std::to_string(lineno) + ": expected 17 columns");
    std::array<double, 17> r{};
    for (std::size_t i = 0; i < 17; ++i) r[i] = parse_number(cells[i], path, lineno);
    rows.push_back(r);
  }
  if (rows.size() < 2) throw InputError(path + ": need at least two samples");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const double t0 = rows.front()[0];
  const double dt = (rows.back()[0] - t0) / static_cast<double>(n - 1);
  if (!(dt > 0.0)) throw InputError(path + ": time column must increase");
  FlightDataset d;
  d.states = {t0, dt, Eigen::MatrixXd(n, kStateDim)};
  d.inputs = {t0, dt, Eigen::MatrixXd(n, kControlDim)};
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& r = rows[static_cast<std::size_t>(k)];
    if (std::abs(r[0] - (t0 + static_cast<double>(k) * dt)) > 1e-6 * dt) {
      throw InputError(path + ": samples are not uniformly spaced");
    }
    for (int c = 0; c < kStateDim; ++c) d.states.values(k, c) = r[static_cast<std::size_t>(1 + c)];
    for (int c = 0; c < kControlDim; ++c) d.inputs.values(k, c) = r[static_cast<std::size_t>(13 + c)];
  }
  d.validate();
  return d;
}

json pd_model_json(const PdModel& model) {
  return {{"type", "pd"}, {"xi", json(model.xi.xi)}, {"mass", model.mass}, {"g", model.g}};
}

PdModel pd_model_from_json(const json& j) {
  const std::string where = "pd model";
  if (!j.is_object()) throw InputError(where + ": expected an object");
  PdModel m;
  const auto xi = field<std::vector<double>>(j, "xi", where);
  if (xi.size() != PdParams::kSize) throw InputError(where + ": xi must have 16 entries");
  std::copy(xi.begin(), xi.end(), m.xi.xi.begin());
  m.mass = field<double>(j, "mass", where);
  m.g = field<double>(j, "g", where);
  m.xi.validate();
  if (!(m.mass > 0.0) || !(m.g > 0.0)) throw InputError(where + ": mass and g must be positive");
  return m;
}

json sindy_model_json(const SparseModel& model, bool wrap_yaw) {
  json xi = json::array();
  for (Eigen::Index r = 0; r < model.xi().rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < model.xi().cols(); ++c) row.push_back(model.xi()(r, c));
    xi.push_back(row);
  }
  return {{"type", "sindy"},
          {"spec", library_json(model.spec())},
          {"state_dim", model.state_dim()},
          {"control_dim", model.control_dim()},
          {"terms", model.term_names()},
          {"xi", xi},
          {"wrap_yaw", wrap_yaw}};
}

SparseModel sindy_model_from_json(const json& j, bool* wrap_yaw) {
  const std::string where = "sindy model";
  if (!j.is_object()) throw InputError(where + ": expected an object");
  const json spec_j = field<json>(j, "spec", where);
  LibrarySpec spec;
  spec.include_constant = field<bool>(spec_j, "include_constant", where + " spec");
  spec.poly_degree = field<int>(spec_j, "poly_degree", where + " spec");
  spec.include_control_linear = field<bool>(spec_j, "include_control_linear", where + " spec");
  spec.include_state_control_cross = field<bool>(spec_j, "include_state_control_cross", where + " spec");
  spec.include_trig = field<bool>(spec_j, "include_trig", where + " spec");
  spec.include_state_trig_cross = field<bool>(spec_j, "include_state_trig_cross", where + " spec");
  spec.validate();
  const int n = j.contains("state_dim") ? field<int>(j, "state_dim", where) : kStateDim;
  const int q = j.contains("control_dim") ? field<int>(j, "control_dim", where) : kControlDim;
  const auto terms = field<std::vector<std::string>>(j, "terms", where);
  if (terms != library_term_names(spec, n, q)) {
    throw InputError(where + ": term list does not match the library spec");
  }
  const auto rows = field<std::vector<std::vector<double>>>(j, "xi", where);
  if (rows.size() != terms.size()) throw InputError(where + ": xi must have one row per term");
  Eigen::MatrixXd xi(static_cast<Eigen::Index>(rows.size()), n);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != static_cast<std::size_t>(n)) throw InputError(where + ": xi rows must have state_dim entries");
    for (int c = 0; c < n; ++c) xi(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
  }
  if (!xi.allFinite()) throw InputError(where + ": xi must be finite");
  if (wrap_yaw) *wrap_yaw = j.contains("wrap_yaw") ? field<bool>(j, "wrap_yaw", where) : false;
  return SparseModel(spec, xi, n, q);
}

void write_json(const std::string& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw InputError("failed writing " + path);
}

json read_json(const std::string& path) {
  auto in = open_in(path);
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw InputError(path + " is not valid JSON: " + e.what());
  }
}

std::unique_ptr<DynamicsModel> load_model(const std::string& path) {
  const json j = read_json(path);
  const std::string type = j.is_object() && j.contains("type") && j["type"].is_string() ? j["type"].get<std::string>() : "";
  if (type == "pd") return std::make_unique<PdDynamics>(pd_model_from_json(j));
  if (type == "sindy") {
    bool wrap = false;
    SparseModel m = sindy_model_from_json(j, &wrap);
    return std::make_unique<SindyDynamics>(std::move(m), wrap);
  }
  throw InputError(path + ": model type must be \"pd\" or \"sindy\"");
}

void write_tracking_log(const std::string& path, const TrackingLog& log) {
  auto out = open_out(path);
  out << "# model=" << log.model << '\n' << "# trajectory=" << log.trajectory << '\n';
  if (log.aborted) out << "# aborted=" << log.abort_reason << '\n';
  const auto header = log_header();
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  std::array<double, 23> row{};
  for (std::size_t k = 0; k < log.size(); ++k) {
    row[0] = log.t[k];
    for (int c = 0; c < kStateDim; ++c) row[static_cast<std::size_t>(1 + c)] = log.states[k](c);
    for (int c = 0; c < kControlDim; ++c) row[static_cast<std::size_t>(13 + c)] = log.inputs[k](c);
    for (int c = 0; c < 3; ++c) row[static_cast<std::size_t>(17 + c)] = log.reference[k](c);
    row[20] = log.cost[k];
    row[21] = log.kkt[k];
    row[22] = log.solve_ms[k];
    write_row(out, row.data(), row.size());
  }
  if (!out) throw InputError("failed writing " + path);
}

TrackingLog read_tracking_log(const std::string& path) {
  auto in = open_in(path);
  TrackingLog log;
  std::string line;
  long lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2), value = line.substr(eq + 1);
      if (key == "model") log.model = value;
      if (key == "trajectory") log.trajectory = value;
      if (key == "aborted") {
        log.aborted = true;
        log.abort_reason = value;
      }
      continue;
    }
    header = split(line);
    break;
  }
  if (header.empty()) throw InputError(path + ": missing header");
  std::vector<int> col;
  for (const auto& name : log_header()) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InputError(path + ": missing column '" + name + "'");
    col.push_back(static_cast<int>(it - header.begin()));
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw InputError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) + " columns");
    }
    auto v = [&](std::size_t i) { return parse_number(cells[static_cast<std::size_t>(col[i])], path, lineno); };
    log.t.push_back(v(0));
    Vec12 x;
    for (int c = 0; c < kStateDim; ++c) x(c) = v(static_cast<std::size_t>(1 + c));
    Vec4 u;
    for (int c = 0; c < kControlDim; ++c) u(c) = v(static_cast<std::size_t>(13 + c));
    log.states.push_back(x);
    log.inputs.push_back(u);
    log.reference.emplace_back(v(17), v(18), v(19));
    log.cost.push_back(v(20));
    log.kkt.push_back(v(21));
    log.solve_ms.push_back(v(22));
  }
  return log;
}

void write_matrix_csv(const std::string& path, const std::vector<std::string>& header, const Eigen::MatrixXd& values) {
  if (static_cast<Eigen::Index>(header.size()) != values.cols()) throw InputError("write_matrix_csv: header width mismatch");
  auto out = open_out(path);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  std::vector<double> row(static_cast<std::size_t>(values.cols()));
  for (Eigen::Index k = 0; k < values.rows(); ++k) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) row[static_cast<std::size_t>(c)] = values(k, c);
    write_row(out, row.data(), row.size());
  }
  if (!out) throw InputError("failed writing " + path);
}

}  // namespace quadid
