#pragma once

// Multi-seed experiments behind the demo-* and sweep commands.

#include "statemap/pipeline.hpp"

#include <vector>

namespace statemap {

std::vector<std::uint64_t> seed_range(std::uint64_t first, int count);

// --- three-group simulation -------------------------------------------------

struct ThreeGroupOptions {
  std::vector<std::uint64_t> seeds = seed_range(1, 20);
  /// The two near groups (-5 and 10) sit inside the median pairwise distance
  /// and merge under the median rule; the mean keeps them apart.
  KernelScale kernel_scale = KernelScale::mean();
  int threads = 0;  // 0 = hardware concurrency
};

struct ThreeGroupSeedResult {
  std::uint64_t seed = 0;
  double corr_mahalanobis = 0.0;  // |pearson(psi1, theta baseline)|
  double corr_euclidean = 0.0;
  double corr_mahalanobis_median_scale = 0.0;
  int misassigned = 0;  // 1-D 3-means on psi1 vs. the true groups, best label matching
  Vector psi1;
  Vector theta;
};

struct ThreeGroupResult {
  std::vector<ThreeGroupSeedResult> seeds;
  double median_corr_mahalanobis = 0.0;
  double median_corr_euclidean = 0.0;
  double median_corr_mahalanobis_median_scale = 0.0;
  int seeds_without_misassignment = 0;
};

ThreeGroupSeedResult run_three_group_seed(std::uint64_t seed, const KernelScale& scale);
ThreeGroupResult run_three_group_demo(const ThreeGroupOptions& opts = {});

/// Misassignments of a 1-D 3-means (initialized at min, median, max) against
/// labels in {0, 1, 2}, minimized over label permutations. An empty cluster
/// counts every point as misassigned.
int three_means_misassignments(const Vector& x, const std::vector<int>& labels);

// --- two-mass grid -------------------------------------------------------------

struct TwoMassOptions {
  std::vector<std::uint64_t> seeds = seed_range(1, 5);
  TwoMassGrid grid;
  FrameFeatureSpec frames = default_frames();
  KernelScale kernel_scale = KernelScale::median();
  int threads = 0;

  static FrameFeatureSpec default_frames();
};

struct TwoMassSeedResult {
  std::uint64_t seed = 0;
  double spearman_mahalanobis = 0.0;  // |rank corr(psi1, m1 + m2)|
  double pearson_mahalanobis = 0.0;
  double spearman_euclidean = 0.0;
  double pearson_euclidean = 0.0;
  Vector psi1_mahalanobis;
  Vector psi1_euclidean;
  Vector mass_sum;
  Vector m1;
  Vector m2;
};

struct TwoMassResult {
  std::vector<TwoMassSeedResult> seeds;
  double median_spearman_mahalanobis = 0.0;
  double median_spearman_euclidean = 0.0;
  double median_pearson_mahalanobis = 0.0;
  double median_pearson_euclidean = 0.0;
};

TwoMassSeedResult run_two_mass_seed(std::uint64_t seed, const TwoMassOptions& opts);
TwoMassResult run_two_mass_demo(const TwoMassOptions& opts = {});

// --- detection sweep on the synthetic four-region trajectory -------------------

struct SweepOptions {
  std::vector<std::uint64_t> seeds = seed_range(1, 20);
  DbsFixtureConfig fixture;
  PipelineConfig pipeline;  // dataset/scenario fields are ignored
  int tolerance = 1;        // states
  int threads = 0;
};

struct SweepSeedResult {
  std::uint64_t seed = 0;
  Index entry_idx = 0;
  Index exit_idx = 0;
  Index dlor_exit_idx = -1;
  TruthIndices truth;
  bool entry_ok = false;
  bool exit_ok = false;
  bool dlor_ok = false;
  bool monotone_ok = false;  // only meaningful when the sub-region detection succeeded
  bool dlor_success = false;
  ErrorReport report;
};

struct SweepResult {
  std::vector<SweepSeedResult> seeds;
  double entry_rate = 0.0;
  double exit_rate = 0.0;
  double dlor_rate = 0.0;
  int dlor_successes = 0;
  int monotone_violations = 0;
};

SweepSeedResult run_sweep_seed(std::uint64_t seed, const SweepOptions& opts);
/// Seeds run concurrently; results keep the seed order.
SweepResult run_sweep(const SweepOptions& opts = {});

}  // namespace statemap
