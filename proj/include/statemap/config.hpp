#pragma once

// JSON configuration for scenarios and for the pipeline. Every tunable default
// of the pipeline has a key; unknown keys are rejected so typos do not pass
// silently.
//
// Pipeline config:
// {
//   "dataset": "dir"            or  "scenario": { ...scenario... },
//   "preprocess": {"kind": "none" | "spectrogram" | "scattering",
//                  "window_len": 1000, "hop": 500, "n_bands": 8, "log_compress": true},
//   "features":   {"rel_tol": 1e-6, "abs_tol": 1e-12},
//   "geometry":   {"metric": "mahalanobis" | "euclidean"},
//   "spectral":   {"kernel_scale": "median" | "mean" | <number>,
//                  "temporal_scale": "auto" | <number>, "n_coords": 3},
//   "detect":     {"enabled": true, "ma_window": 3, "median_window": 5,
//                  "kmeans_max_iter": 100, "kmeans_tol": 1e-10},
//   "output_dir": "out"
// }
//
// Scenario config, "kind" selects the generator:
//   "ou":          dims {state, noise}, baselines [[...], ...], eps, sigma, dt,
//                  n_steps, seed, observation {kind identity|linear|quadratic2d, matrix}
//   "three_group": seed
//   "dbs":         seed, lengths, before_start, before_end, dlor, vmnr, after,
//                  eta_low, eta_high, eps, sigma, dt, n_steps, edt_start, edt_step
//   "two_mass":    seed, m1_values, m2_values, k1, k2, amplitude, period, duration,
//                  sample_rate, noise_std, amplitude_log_range, amplitude_log_diffusion,
//                  mass_log_diffusion

#include "statemap/dataset_io.hpp"
#include "statemap/detect.hpp"
#include "statemap/features.hpp"
#include "statemap/geometry.hpp"
#include "statemap/preprocess.hpp"
#include "statemap/sde_sim.hpp"
#include "statemap/spectral.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace statemap {

struct ScenarioConfig {
  enum class Kind { Ou, ThreeGroup, Dbs, TwoMass };
  Kind kind = Kind::ThreeGroup;
  std::uint64_t seed = 0;

  // ou
  OUSpec ou;
  std::vector<Vector> baselines;
  std::optional<ObservationFn> observation;

  // dbs
  DbsFixtureConfig dbs;

  // two_mass
  TwoMassGrid grid;
};

ScenarioConfig parse_scenario(const std::string& json_text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Runs the generator. Two-mass scenarios give a series dataset with
/// latent_baselines = (m1, m2) and EDT = trial index.
Dataset simulate_scenario(const ScenarioConfig& sc);

struct PreprocessConfig {
  bool enabled = false;
  FrameFeatureSpec spec;
};

struct SpectralConfig {
  KernelScale kernel_scale = KernelScale::median();
  std::optional<double> temporal_scale;  // nullopt = default rule
  int n_coords = 3;
};

struct DetectConfig {
  bool enabled = true;
  TransitionOptions transition;
  SubRegionOptions subregion;
};

struct PipelineConfig {
  std::optional<std::filesystem::path> dataset;
  std::optional<ScenarioConfig> scenario;
  PreprocessConfig preprocess;
  InverseOptions features;
  Metric metric = Metric::ModifiedMahalanobis;
  SpectralConfig spectral;
  DetectConfig detect;
  std::filesystem::path output_dir = "out";
};

/// A relative dataset path is resolved against base_dir; output_dir is left as given.
PipelineConfig parse_pipeline_config(const std::string& json_text,
                                     const std::filesystem::path& base_dir = {});
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

}  // namespace statemap
