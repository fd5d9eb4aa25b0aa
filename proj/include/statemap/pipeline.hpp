#pragma once

// preprocess -> features -> distances -> diffusion embedding -> detection -> score.
// Errors leaving run_pipeline carry the failing stage as a message prefix
// ("features: ...") and keep their type (ValidationError / NumericalError).

#include "statemap/config.hpp"
#include "statemap/metrics.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace statemap {

struct DetectionOutcome {
  BorderDetection borders;
  SubRegionDetection sub;
  DiffusionOperator temporal;  // K^t
  Embedding temporal_embedding;  // 3 coordinates, psi2/psi3 are columns 1 and 2
};

struct PipelineResult {
  Vector edt;
  std::vector<StateFeatures> features;
  DistanceMatrix distances;
  DiffusionOperator plain;
  Embedding embedding;
  std::optional<DetectionOutcome> detection;
  std::optional<ErrorReport> report;
  std::vector<std::string> warnings;
};

/// Loads config.dataset or simulates config.scenario.
Dataset resolve_input(const PipelineConfig& config);

PipelineResult run_pipeline(const Dataset& dataset, const PipelineConfig& config);

/// Writes embedding.csv, eigenvalues.json, distances.csv, kernel.csv and,
/// when present, detection.json, temporal_kernel.csv and report.json.
void save_results(const PipelineResult& result, const std::filesystem::path& dir);

std::string detection_json(const PipelineResult& result);
std::string report_json(const ErrorReport& report);

struct DetectedIndices {
  Index entry_idx = 0;
  Index exit_idx = 0;
  Index dlor_exit_idx = -1;  // -1 when the sub-region detection failed
};

/// Reads the indices back from a detection.json file.
DetectedIndices load_detection(const std::filesystem::path& path);

}  // namespace statemap
