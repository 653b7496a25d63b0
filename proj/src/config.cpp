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

#include "quadid/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace quadid {

using nlohmann::json;

namespace {

class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw InputError(path_ + ": expected an object");
  }

  const json* find(const std::string& key) {
    const auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    used_.insert(key);
    return &*it;
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw InputError(at(key) + ": expected a number");
      out = v->get<double>();
    }
  }

  void integer(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) throw InputError(at(key) + ": expected an integer");
      out = v->get<int>();
    }
  }

  void flag(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw InputError(at(key) + ": expected true or false");
      out = v->get<bool>();
    }
  }

  void text(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw InputError(at(key) + ": expected a string");
      out = v->get<std::string>();
    }
  }

  /// Fixed-length numeric array.
  template <typename Vec>
  void vector(const std::string& key, Vec& out, std::size_t n) {
    if (const json* v = find(key)) {
      if (!v->is_array() || v->size() != n) {
        throw InputError(at(key) + ": expected an array of " + std::to_string(n) + " numbers");
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (!(*v)[i].is_number()) throw InputError(at(key) + ": expected an array of numbers");
        out[static_cast<decltype(out.size())>(i)] = (*v)[i].template get<double>();
      }
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw InputError(at(it.key()) + ": unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

template <typename Fn>
void section(Section& parent, const std::string& key, Fn&& fn) {
  if (const json* v = parent.find(key)) {
    Section s(*v, parent.at(key));
    fn(s);
    s.finish();
  }
}

json array_of(const PdParams& p) { return json(p.xi); }

template <typename Vec>
json array_of(const Vec& v, Eigen::Index n) {
  json a = json::array();
  for (Eigen::Index i = 0; i < n; ++i) a.push_back(v(i));
  return a;
}

std::string feedback_name(AccelFeedback f) { return f == AccelFeedback::kImplicit ? "implicit" : "delayed"; }
std::string method_name(SolverMethod m) { return m == SolverMethod::kSr3 ? "sr3" : "stlsq"; }
std::string prox_name(ProxKind p) { return p == ProxKind::kHard ? "hard" : "soft"; }
std::string concordance_name(ConcordanceKind k) { return k == ConcordanceKind::kWillmott ? "willmott" : "lin"; }

json preprocess_json(const PreprocessConfig& p) {
  return {{"sg_window", p.sg_window}, {"sg_order", p.sg_order}, {"smooth_states", p.smooth_states}};
}

void read_preprocess(Section& s, PreprocessConfig& p) {
  s.integer("sg_window", p.sg_window);
  s.integer("sg_order", p.sg_order);
  s.flag("smooth_states", p.smooth_states);
}

json trajectories_json(const std::vector<TrajectoryKind>& kinds) {
  json a = json::array();
  for (auto k : kinds) a.push_back(std::string(trajectory_name(k)));
  return a;
}

void read_trajectories(Section& s, const std::string& key, std::vector<TrajectoryKind>& out) {
  if (const json* v = s.find(key)) {
    if (!v->is_array()) throw InputError(s.at(key) + ": expected an array of trajectory names");
    out.clear();
    for (const auto& e : *v) {
      if (!e.is_string()) throw InputError(s.at(key) + ": expected an array of trajectory names");
      out.push_back(parse_trajectory(e.get<std::string>()));
    }
  }
}

}  // namespace

void PipelineConfig::validate() const {
  simulation_config().validate();
  preprocess.validate();
  ident_pd.bounds.validate();
  ident_pd.init.validate();
  ident_pd.options.validate();
  sindy.library.validate();
  sindy.solver.validate();
  sindy.preprocess.validate();
  training_config().validate();
  mpc.validate();
  if (experiment.trajectories.empty()) throw InputError("experiment.trajectories must not be empty");
  if (!(experiment.duration > 0.0) || !std::isfinite(experiment.duration)) {
    throw InputError("experiment.duration must be > 0");
  }
  if (!experiment.x_init.allFinite()) throw InputError("experiment.x_init must be finite");
  if (!(experiment.prediction_horizon > 0.0)) throw InputError("experiment.prediction_horizon must be > 0");
}

SimulationConfig PipelineConfig::simulation_config() const {
  SimulationConfig s = simulation;
  s.seed = seed;
  return s;
}

TrackingDataConfig PipelineConfig::training_config() const {
  TrackingDataConfig t = sindy.training;
  t.x_init = experiment.x_init;
  t.seed = seed;
  return t;
}

json to_json(const PipelineConfig& cfg) {
  const SimulationConfig& sim = cfg.simulation;
  json channels = json::array();
  for (const auto& c : sim.excitation.channels) {
    channels.push_back({{"amplitude", c.amplitude}, {"offset", c.offset}, {"phase", c.phase}, {"descending", c.descending}});
  }
  json frozen = json::array();
  for (int k = 0; k < PdParams::kSize; ++k) {
    if (cfg.ident_pd.options.frozen[static_cast<std::size_t>(k)]) frozen.push_back(k + 1);
  }
  const IdentOptions& io = cfg.ident_pd.options;
  const SolverConfig& sc = cfg.sindy.solver;
  const LibrarySpec& lib = cfg.sindy.library;
  const TrackingDataConfig& tr = cfg.sindy.training;
  const OcpConfig& m = cfg.mpc;
  return {
      {"seed", cfg.seed},
      {"plant",
       {{"xi", array_of(sim.plant.xi)},
        {"mass", sim.plant.mass},
        {"g", sim.plant.g},
        {"substep", sim.plant.substep},
        {"feedback", feedback_name(sim.plant.feedback)}}},
      {"excitation", {{"f0", sim.excitation.f0}, {"f1", sim.excitation.f1}, {"channels", channels}}},
      {"simulation",
       {{"duration", sim.duration},
        {"sample_dt", sim.sample_dt},
        {"x0", array_of(sim.x0, kStateDim)},
        {"noise_sigma", json(sim.noise_sigma)}}},
      {"preprocess", preprocess_json(cfg.preprocess)},
      {"ident_pd",
       {{"lower", array_of(cfg.ident_pd.bounds.lo)},
        {"upper", array_of(cfg.ident_pd.bounds.hi)},
        {"init", array_of(cfg.ident_pd.init)},
        {"frozen", frozen},
        {"anchor", array_of(io.anchor)},
        {"lowpass_lambda", io.lowpass_lambda},
        {"max_iter", io.max_iter},
        {"grad_tol", io.grad_tol},
        {"armijo_c", io.armijo_c},
        {"svd_cutoff", io.svd_cutoff}}},
      {"sindy",
       {{"library",
         {{"include_constant", lib.include_constant},
          {"poly_degree", lib.poly_degree},
          {"include_control_linear", lib.include_control_linear},
          {"include_state_control_cross", lib.include_state_control_cross},
          {"include_trig", lib.include_trig},
          {"include_state_trig_cross", lib.include_state_trig_cross}}},
        {"solver",
         {{"method", method_name(sc.method)},
          {"lambda", sc.lambda},
          {"threshold", sc.threshold},
          {"max_iter", sc.max_iter},
          {"tol", sc.tol},
          {"relaxation", sc.relaxation},
          {"prox", prox_name(sc.prox)},
          {"unbias", sc.unbias},
          {"normalize", sc.normalize}}},
        {"preprocess", preprocess_json(cfg.sindy.preprocess)},
        {"wrap_yaw", cfg.sindy.wrap_yaw},
        {"training",
         {{"duration", tr.duration},
          {"sample_dt", tr.sample_dt},
          {"dither_scale", tr.dither_scale},
          {"trajectories", trajectories_json(tr.trajectories)},
          {"noise_sigma", json(tr.noise_sigma)}}}}},
      {"mpc",
       {{"N", m.N},
        {"dt", m.dt},
        {"q_diag", array_of(Vec12(m.Q.diagonal()), kStateDim)},
        {"r_diag", array_of(Vec4(m.R.diagonal()), kControlDim)},
        {"lower", array_of(m.lower, kControlDim)},
        {"upper", array_of(m.upper, kControlDim)},
        {"max_sqp_iter", m.max_sqp_iter},
        {"rti", m.rti},
        {"substeps", m.substeps},
        {"velocity_feedforward", m.velocity_feedforward},
        {"psi_ref", m.psi_ref}}},
      {"experiment",
       {{"trajectories", trajectories_json(cfg.experiment.trajectories)},
        {"duration", cfg.experiment.duration},
        {"x_init", array_of(cfg.experiment.x_init, kStateDim)},
        {"prediction_horizon", cfg.experiment.prediction_horizon},
        {"concordance", concordance_name(cfg.experiment.concordance)}}},
  };
}

PipelineConfig pipeline_config_from_json(const json& j) {
  PipelineConfig cfg;
  Section root(j, "");
  if (const json* v = root.find("seed")) {
    if (!v->is_number_integer() || (!v->is_number_unsigned() && v->get<std::int64_t>() < 0)) {
      throw InputError("seed: expected a non-negative integer");
    }
    cfg.seed = v->get<std::uint64_t>();
  }
  SimulationConfig& sim = cfg.simulation;
  section(root, "plant", [&](Section& s) {
    s.vector("xi", sim.plant.xi.xi, PdParams::kSize);
    s.number("mass", sim.plant.mass);
    s.number("g", sim.plant.g);
    s.number("substep", sim.plant.substep);
    std::string fb = feedback_name(sim.plant.feedback);
    s.text("feedback", fb);
    if (fb == "implicit") {
      sim.plant.feedback = AccelFeedback::kImplicit;
    } else if (fb == "delayed") {
      sim.plant.feedback = AccelFeedback::kDelayed;
    } else {
      throw InputError(s.at("feedback") + ": expected \"implicit\" or \"delayed\"");
    }
  });
  section(root, "excitation", [&](Section& s) {
    s.number("f0", sim.excitation.f0);
    s.number("f1", sim.excitation.f1);
    if (const json* v = s.find("channels")) {
      if (!v->is_array() || v->size() != 4) throw InputError(s.at("channels") + ": expected an array of 4 objects");
      for (std::size_t i = 0; i < 4; ++i) {
        Section c((*v)[i], s.at("channels") + "[" + std::to_string(i) + "]");
        ChirpChannel& ch = sim.excitation.channels[i];
        c.number("amplitude", ch.amplitude);
        c.number("offset", ch.offset);
        c.number("phase", ch.phase);
        c.flag("descending", ch.descending);
        c.finish();
      }
    }
  });
  section(root, "simulation", [&](Section& s) {
    s.number("duration", sim.duration);
    s.number("sample_dt", sim.sample_dt);
    s.vector("x0", sim.x0, kStateDim);
    s.vector("noise_sigma", sim.noise_sigma, kStateDim);
  });
  section(root, "preprocess", [&](Section& s) { read_preprocess(s, cfg.preprocess); });
  section(root, "ident_pd", [&](Section& s) {
    IdentPdConfig& p = cfg.ident_pd;
    s.vector("lower", p.bounds.lo.xi, PdParams::kSize);
    s.vector("upper", p.bounds.hi.xi, PdParams::kSize);
    s.vector("init", p.init.xi, PdParams::kSize);
    if (const json* v = s.find("frozen")) {
      if (!v->is_array()) throw InputError(s.at("frozen") + ": expected an array of 1-based indices");
      p.options.frozen.fill(false);
      for (const auto& e : *v) {
        if (!e.is_number_integer() || e.get<int>() < 1 || e.get<int>() > PdParams::kSize) {
          throw InputError(s.at("frozen") + ": indices must be integers in [1, 16]");
        }
        p.options.frozen[static_cast<std::size_t>(e.get<int>() - 1)] = true;
      }
    }
    s.vector("anchor", p.options.anchor.xi, PdParams::kSize);
    s.number("lowpass_lambda", p.options.lowpass_lambda);
    s.integer("max_iter", p.options.max_iter);
    s.number("grad_tol", p.options.grad_tol);
    s.number("armijo_c", p.options.armijo_c);
    s.number("svd_cutoff", p.options.svd_cutoff);
  });
  section(root, "sindy", [&](Section& s) {
    SindyConfig& sc = cfg.sindy;
    section(s, "library", [&](Section& l) {
      l.flag("include_constant", sc.library.include_constant);
      l.integer("poly_degree", sc.library.poly_degree);
      l.flag("include_control_linear", sc.library.include_control_linear);
      l.flag("include_state_control_cross", sc.library.include_state_control_cross);
      l.flag("include_trig", sc.library.include_trig);
      l.flag("include_state_trig_cross", sc.library.include_state_trig_cross);
    });
    section(s, "solver", [&](Section& o) {
      std::string method = method_name(sc.solver.method);
      o.text("method", method);
      if (method == "sr3") {
        sc.solver.method = SolverMethod::kSr3;
      } else if (method == "stlsq") {
        sc.solver.method = SolverMethod::kStlsq;
      } else {
        throw InputError(o.at("method") + ": expected \"sr3\" or \"stlsq\"");
      }
      o.number("lambda", sc.solver.lambda);
      o.number("threshold", sc.solver.threshold);
      o.integer("max_iter", sc.solver.max_iter);
      o.number("tol", sc.solver.tol);
      o.number("relaxation", sc.solver.relaxation);
      std::string prox = prox_name(sc.solver.prox);
      o.text("prox", prox);
      if (prox == "hard") {
        sc.solver.prox = ProxKind::kHard;
      } else if (prox == "soft") {
        sc.solver.prox = ProxKind::kSoft;
      } else {
        throw InputError(o.at("prox") + ": expected \"hard\" or \"soft\"");
      }
      o.flag("unbias", sc.solver.unbias);
      o.flag("normalize", sc.solver.normalize);
    });
    section(s, "preprocess", [&](Section& p) { read_preprocess(p, sc.preprocess); });
    s.flag("wrap_yaw", sc.wrap_yaw);
    section(s, "training", [&](Section& t) {
      t.number("duration", sc.training.duration);
      t.number("sample_dt", sc.training.sample_dt);
      t.number("dither_scale", sc.training.dither_scale);
      read_trajectories(t, "trajectories", sc.training.trajectories);
      t.vector("noise_sigma", sc.training.noise_sigma, kStateDim);
    });
  });
  section(root, "mpc", [&](Section& s) {
    OcpConfig& m = cfg.mpc;
    s.integer("N", m.N);
    s.number("dt", m.dt);
    Vec12 q = m.Q.diagonal();
    s.vector("q_diag", q, kStateDim);
    m.Q = q.asDiagonal();
    Vec4 r = m.R.diagonal();
    s.vector("r_diag", r, kControlDim);
    m.R = r.asDiagonal();
    s.vector("lower", m.lower, kControlDim);
    s.vector("upper", m.upper, kControlDim);
    s.integer("max_sqp_iter", m.max_sqp_iter);
    s.flag("rti", m.rti);
    s.integer("substeps", m.substeps);
    s.flag("velocity_feedforward", m.velocity_feedforward);
    s.number("psi_ref", m.psi_ref);
  });
  section(root, "experiment", [&](Section& s) {
    ExperimentConfig& e = cfg.experiment;
    read_trajectories(s, "trajectories", e.trajectories);
    s.number("duration", e.duration);
    s.vector("x_init", e.x_init, kStateDim);
    s.number("prediction_horizon", e.prediction_horizon);
    std::string kind = concordance_name(e.concordance);
    s.text("concordance", kind);
    if (kind == "willmott") {
      e.concordance = ConcordanceKind::kWillmott;
    } else if (kind == "lin") {
      e.concordance = ConcordanceKind::kLin;
    } else {
      throw InputError(s.at("concordance") + ": expected \"willmott\" or \"lin\"");
    }
  });
  root.finish();
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError("config file " + path + " is not valid JSON: " + e.what());
  }
  return pipeline_config_from_json(j);
}

void save_config(const PipelineConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write config file " + path);
  out << to_json(cfg).dump(2) << "\n";
  if (!out) throw InputError("failed writing config file " + path);
}

}  // namespace quadid
