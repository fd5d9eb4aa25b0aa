#include "statemap/config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace statemap {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ValidationError(where + ": expected a JSON object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ValidationError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read_opt(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(where + ": key '" + key + "' has the wrong type");
  }
}

Vector to_vector(const json& arr, const std::string& where) {
  if (!arr.is_array()) throw ValidationError(where + ": expected an array of numbers");
  Vector v(static_cast<Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) throw ValidationError(where + ": expected an array of numbers");
    v(static_cast<Index>(i)) = arr[i].get<double>();
  }
  return v;
}

Matrix to_matrix(const json& arr, const std::string& where) {
  if (!arr.is_array() || arr.empty()) throw ValidationError(where + ": expected a non-empty array of rows");
  const Index rows = static_cast<Index>(arr.size());
  const Vector first = to_vector(arr[0], where);
  Matrix m(rows, first.size());
  for (Index i = 0; i < rows; ++i) {
    const Vector r = to_vector(arr[static_cast<std::size_t>(i)], where);
    if (r.size() != m.cols()) throw ValidationError(where + ": rows have different lengths");
    m.row(i) = r.transpose();
  }
  return m;
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(what + ": invalid JSON: " + e.what());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ScenarioConfig scenario_from_json(const json& j) {
  const std::string where = "scenario";
  if (!j.is_object() || !j.contains("kind")) throw ValidationError(where + ": missing key 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  ScenarioConfig sc;
  if (kind == "three_group") {
    check_keys(j, {"kind", "seed"}, where);
    sc.kind = ScenarioConfig::Kind::ThreeGroup;
    read_opt(j, "seed", sc.seed, where);
    return sc;
  }
  if (kind == "dbs") {
    check_keys(j, {"kind", "seed", "lengths", "before_start", "before_end", "dlor", "vmnr", "after",
                   "eta_low", "eta_high", "eps", "sigma", "dt", "n_steps", "edt_start", "edt_step"},
               where);
    sc.kind = ScenarioConfig::Kind::Dbs;
    auto& d = sc.dbs;
    read_opt(j, "seed", sc.seed, where);
    d.seed = sc.seed;
    if (j.contains("lengths")) {
      const auto v = j.at("lengths").get<std::vector<int>>();
      if (v.size() != 4) throw ValidationError(where + ": 'lengths' needs 4 entries");
      std::copy(v.begin(), v.end(), d.lengths.begin());
    }
    read_opt(j, "before_start", d.before_start, where);
    read_opt(j, "before_end", d.before_end, where);
    read_opt(j, "dlor", d.dlor, where);
    read_opt(j, "vmnr", d.vmnr, where);
    read_opt(j, "after", d.after, where);
    read_opt(j, "eta_low", d.eta_low, where);
    read_opt(j, "eta_high", d.eta_high, where);
    read_opt(j, "eps", d.eps, where);
    read_opt(j, "sigma", d.sigma, where);
    read_opt(j, "dt", d.dt, where);
    read_opt(j, "n_steps", d.n_steps, where);
    read_opt(j, "edt_start", d.edt_start, where);
    read_opt(j, "edt_step", d.edt_step, where);
    d.validate();
    return sc;
  }
  if (kind == "two_mass") {
    check_keys(j, {"kind", "seed", "m1_values", "m2_values", "k1", "k2", "amplitude", "period",
                   "duration", "sample_rate", "noise_std", "amplitude_log_range",
                   "amplitude_log_diffusion", "mass_log_diffusion"},
               where);
    sc.kind = ScenarioConfig::Kind::TwoMass;
    auto& g = sc.grid;
    read_opt(j, "seed", sc.seed, where);
    read_opt(j, "m1_values", g.m1_values, where);
    read_opt(j, "m2_values", g.m2_values, where);
    read_opt(j, "k1", g.base.k1, where);
    read_opt(j, "k2", g.base.k2, where);
    read_opt(j, "amplitude", g.base.forcing.amplitude, where);
    read_opt(j, "period", g.base.forcing.period, where);
    read_opt(j, "duration", g.base.duration, where);
    read_opt(j, "sample_rate", g.base.sample_rate, where);
    read_opt(j, "noise_std", g.base.noise_std, where);
    read_opt(j, "amplitude_log_range", g.amplitude_log_baseline_range, where);
    read_opt(j, "amplitude_log_diffusion", g.base.amplitude_log_diffusion, where);
    read_opt(j, "mass_log_diffusion", g.base.mass_log_diffusion, where);
    g.base.validate();
    return sc;
  }
  if (kind == "ou") {
    check_keys(j, {"kind", "seed", "dims", "baselines", "eps", "sigma", "dt", "n_steps", "observation"},
               where);
    sc.kind = ScenarioConfig::Kind::Ou;
    auto& o = sc.ou;
    read_opt(j, "seed", sc.seed, where);
    if (!j.contains("dims")) throw ValidationError(where + ": missing key 'dims'");
    const json& dims = j.at("dims");
    check_keys(dims, {"state", "noise"}, where + ".dims");
    read_opt(dims, "state", o.state_dim, where + ".dims");
    o.noise_dim = 0;
    read_opt(dims, "noise", o.noise_dim, where + ".dims");
    if (!j.contains("baselines")) throw ValidationError(where + ": missing key 'baselines'");
    const Matrix b = to_matrix(j.at("baselines"), where + ".baselines");
    for (Index i = 0; i < b.rows(); ++i) sc.baselines.push_back(b.row(i).transpose());
    read_opt(j, "eps", o.timescale_eps, where);
    read_opt(j, "sigma", o.diffusion_scale, where);
    read_opt(j, "dt", o.dt, where);
    read_opt(j, "n_steps", o.n_steps, where);
    if (sc.baselines.size() < 2) throw ValidationError(where + ": need at least 2 baselines");
    o.baseline = sc.baselines.front();
    o.validate();
    if (j.contains("observation")) {
      const json& obs = j.at("observation");
      check_keys(obs, {"kind", "matrix"}, where + ".observation");
      const std::string ok = obs.value("kind", "identity");
      if (ok == "identity") {
        sc.observation = ObservationFn::identity(o.dim());
      } else if (ok == "quadratic2d") {
        sc.observation = ObservationFn::quadratic2d();
      } else if (ok == "linear") {
        if (!obs.contains("matrix")) throw ValidationError(where + ".observation: linear needs 'matrix'");
        sc.observation = ObservationFn::linear(to_matrix(obs.at("matrix"), where + ".observation.matrix"));
      } else {
        throw ValidationError(where + ".observation: unknown kind '" + ok + "'");
      }
    }
    return sc;
  }
  throw ValidationError(where + ": unknown kind '" + kind + "'");
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& json_text) {
  try {
    return scenario_from_json(parse_json(json_text, "scenario"));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("scenario: ") + e.what());
  }
}

ScenarioConfig load_scenario(const fs::path& path) {
  try {
    return parse_scenario(read_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

Dataset simulate_scenario(const ScenarioConfig& sc) {
  Dataset ds;
  auto from_traj = [&ds](SimulatedTrajectory traj) {
    ds.states = std::move(traj.states);
    ds.edt = traj.edt;
    ds.labels = traj.region_labels;
    ds.seeds = traj.seeds;
    ds.latent_baselines = traj.baselines;
    if (traj.borders) {
      ds.truth = TruthIndices{traj.borders->entry, traj.borders->dlor_exit, traj.borders->exit};
    }
  };
  switch (sc.kind) {
    case ScenarioConfig::Kind::ThreeGroup:
      from_traj(build_three_group_scenario(sc.seed));
      break;
    case ScenarioConfig::Kind::Dbs: {
      DbsFixtureConfig cfg = sc.dbs;
      cfg.seed = sc.seed;
      from_traj(build_synthetic_dbs_trajectory(cfg));
      break;
    }
    case ScenarioConfig::Kind::Ou: {
      const ObservationFn f = sc.observation ? *sc.observation : ObservationFn::identity(sc.ou.dim());
      from_traj(simulate_states(sc.baselines, sc.ou, f, sc.seed));
      break;
    }
    case ScenarioConfig::Kind::TwoMass: {
      const auto trials = simulate_two_mass_grid(sc.grid, sc.seed);
      ds.sample_kind = SampleKind::Series;
      ds.edt.resize(static_cast<Index>(trials.size()));
      for (std::size_t i = 0; i < trials.size(); ++i) {
        ds.states.push_back(trials[i].series);
        ds.edt(static_cast<Index>(i)) = static_cast<double>(i);
        ds.seeds.push_back(trials[i].seed);
        ds.latent_baselines.push_back(Vector{{trials[i].m1, trials[i].m2}});
      }
      break;
    }
  }
  ds.validate();
  return ds;
}

PipelineConfig parse_pipeline_config(const std::string& json_text, const fs::path& base_dir) {
  const json j = parse_json(json_text, "config");
  PipelineConfig cfg;
  try {
    check_keys(j, {"dataset", "scenario", "preprocess", "features", "geometry", "spectral", "detect",
                   "output_dir"},
               "config");
    if (j.contains("dataset") && j.contains("scenario")) {
      throw ValidationError("config: give either 'dataset' or 'scenario', not both");
    }
    if (j.contains("dataset")) {
      fs::path p = j.at("dataset").get<std::string>();
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      cfg.dataset = p;
    }
    if (j.contains("scenario")) cfg.scenario = scenario_from_json(j.at("scenario"));

    if (j.contains("preprocess")) {
      const json& p = j.at("preprocess");
      check_keys(p, {"kind", "window_len", "hop", "n_bands", "log_compress"}, "config.preprocess");
      const std::string kind = p.value("kind", "none");
      if (kind == "none") {
        cfg.preprocess.enabled = false;
      } else if (kind == "spectrogram") {
        cfg.preprocess.enabled = true;
        cfg.preprocess.spec.kind = FrameFeatureSpec::Kind::Spectrogram;
      } else if (kind == "scattering") {
        cfg.preprocess.enabled = true;
        cfg.preprocess.spec.kind = FrameFeatureSpec::Kind::ScatteringOrder1;
      } else {
        throw ValidationError("config.preprocess: unknown kind '" + kind + "'");
      }
      read_opt(p, "window_len", cfg.preprocess.spec.window_len, "config.preprocess");
      read_opt(p, "hop", cfg.preprocess.spec.hop, "config.preprocess");
      read_opt(p, "n_bands", cfg.preprocess.spec.n_bands, "config.preprocess");
      read_opt(p, "log_compress", cfg.preprocess.spec.log_compress, "config.preprocess");
      if (cfg.preprocess.enabled) cfg.preprocess.spec.validate();
    }
    if (j.contains("features")) {
      const json& f = j.at("features");
      check_keys(f, {"rel_tol", "abs_tol"}, "config.features");
      read_opt(f, "rel_tol", cfg.features.rel_tol, "config.features");
      read_opt(f, "abs_tol", cfg.features.abs_tol, "config.features");
      if (!(cfg.features.rel_tol >= 0.0) || !(cfg.features.abs_tol >= 0.0)) {
        throw ValidationError("config.features: tolerances must be >= 0");
      }
    }
    if (j.contains("geometry")) {
      const json& g = j.at("geometry");
      check_keys(g, {"metric"}, "config.geometry");
      if (g.contains("metric")) cfg.metric = metric_from_string(g.at("metric").get<std::string>());
    }
    if (j.contains("spectral")) {
      const json& s = j.at("spectral");
      check_keys(s, {"kernel_scale", "temporal_scale", "n_coords"}, "config.spectral");
      if (s.contains("kernel_scale")) {
        const json& ks = s.at("kernel_scale");
        if (ks.is_number()) {
          cfg.spectral.kernel_scale = KernelScale::fixed(ks.get<double>());
          if (!(ks.get<double>() > 0.0)) throw ValidationError("config.spectral: kernel_scale must be > 0");
        } else if (ks == "median") {
          cfg.spectral.kernel_scale = KernelScale::median();
        } else if (ks == "mean") {
          cfg.spectral.kernel_scale = KernelScale::mean();
        } else {
          throw ValidationError("config.spectral: kernel_scale must be 'median', 'mean' or a number");
        }
      }
      if (s.contains("temporal_scale")) {
        const json& ts = s.at("temporal_scale");
        if (ts.is_number()) {
          if (!(ts.get<double>() > 0.0)) throw ValidationError("config.spectral: temporal_scale must be > 0");
          cfg.spectral.temporal_scale = ts.get<double>();
        } else if (ts != "auto") {
          throw ValidationError("config.spectral: temporal_scale must be 'auto' or a number");
        }
      }
      read_opt(s, "n_coords", cfg.spectral.n_coords, "config.spectral");
      if (cfg.spectral.n_coords < 1) throw ValidationError("config.spectral: n_coords must be >= 1");
    }
    if (j.contains("detect")) {
      const json& d = j.at("detect");
      check_keys(d, {"enabled", "ma_window", "median_window", "kmeans_max_iter", "kmeans_tol"},
                 "config.detect");
      read_opt(d, "enabled", cfg.detect.enabled, "config.detect");
      read_opt(d, "ma_window", cfg.detect.transition.ma_window, "config.detect");
      read_opt(d, "median_window", cfg.detect.transition.median_window, "config.detect");
      read_opt(d, "kmeans_max_iter", cfg.detect.subregion.max_iter, "config.detect");
      read_opt(d, "kmeans_tol", cfg.detect.subregion.tol, "config.detect");
      cfg.detect.transition.validate();
      if (cfg.detect.subregion.max_iter < 1) {
        throw ValidationError("config.detect: kmeans_max_iter must be >= 1");
      }
    }
    if (j.contains("output_dir")) {
      cfg.output_dir = j.at("output_dir").get<std::string>();
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  if (!cfg.dataset && !cfg.scenario) {
    throw ValidationError("config: one of 'dataset' or 'scenario' is required");
  }
  return cfg;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  try {
    return parse_pipeline_config(read_file(path), path.parent_path());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace statemap
