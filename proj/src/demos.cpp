#include "statemap/demos.hpp"

#include "statemap/stats.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace statemap {

std::vector<std::uint64_t> seed_range(std::uint64_t first, int count) {
  std::vector<std::uint64_t> out;
  for (int i = 0; i < count; ++i) out.push_back(first + static_cast<std::uint64_t>(i));
  return out;
}

namespace {

// Runs fn(i) for i in [0, n) on a small worker pool. The first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn fn) {
  unsigned hw = std::thread::hardware_concurrency();
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads) : (hw > 0 ? hw : 1);
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

Vector leading_coordinate(const std::vector<StateFeatures>& feats, Metric metric,
                          const KernelScale& scale) {
  const DistanceMatrix d = pairwise_distances(feats, metric);
  const DiffusionOperator op = normalize(build_affinity(d, scale));
  return eigen_embed(op, 1).coords.col(0);
}

}  // namespace

// ---------------------------------------------------------------------------

int three_means_misassignments(const Vector& x, const std::vector<int>& labels) {
  const Index n = x.size();
  if (static_cast<Index>(labels.size()) != n || n < 3) {
    throw ValidationError("three_means_misassignments: need matching sizes and N >= 3");
  }
  std::vector<double> v(x.data(), x.data() + n);
  Matrix pts = x;
  Matrix init(3, 1);
  init << x.minCoeff(), median(v), x.maxCoeff();
  const KMeansResult km = lloyd_kmeans(pts, init, 100, 1e-12);
  if (km.empty_cluster) return static_cast<int>(n);

  std::array<int, 3> perm{0, 1, 2};
  int best = static_cast<int>(n);
  do {
    int miss = 0;
    for (Index i = 0; i < n; ++i) {
      if (perm[static_cast<std::size_t>(km.labels[static_cast<std::size_t>(i)])] !=
          labels[static_cast<std::size_t>(i)]) {
        ++miss;
      }
    }
    best = std::min(best, miss);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

ThreeGroupSeedResult run_three_group_seed(std::uint64_t seed, const KernelScale& scale) {
  const SimulatedTrajectory traj = build_three_group_scenario(seed);
  const auto feats = compute_all_features(traj.states);
  ThreeGroupSeedResult r;
  r.seed = seed;
  r.theta.resize(traj.size());
  for (Index i = 0; i < traj.size(); ++i) r.theta(i) = traj.baselines[static_cast<std::size_t>(i)](0);
  r.psi1 = leading_coordinate(feats, Metric::ModifiedMahalanobis, scale);
  r.corr_mahalanobis = std::abs(pearson(r.psi1, r.theta));
  r.corr_euclidean =
      std::abs(pearson(leading_coordinate(feats, Metric::Euclidean, scale), r.theta));
  r.corr_mahalanobis_median_scale = std::abs(
      pearson(leading_coordinate(feats, Metric::ModifiedMahalanobis, KernelScale::median()), r.theta));
  r.misassigned = three_means_misassignments(r.psi1, traj.region_labels);
  return r;
}

ThreeGroupResult run_three_group_demo(const ThreeGroupOptions& opts) {
  if (opts.seeds.empty()) throw ValidationError("three-group demo: no seeds");
  ThreeGroupResult res;
  res.seeds.resize(opts.seeds.size());
  parallel_for(opts.seeds.size(), opts.threads, [&](std::size_t i) {
    res.seeds[i] = run_three_group_seed(opts.seeds[i], opts.kernel_scale);
  });
  std::vector<double> mah, euc, med;
  for (const auto& s : res.seeds) {
    mah.push_back(s.corr_mahalanobis);
    euc.push_back(s.corr_euclidean);
    med.push_back(s.corr_mahalanobis_median_scale);
    if (s.misassigned == 0) ++res.seeds_without_misassignment;
  }
  res.median_corr_mahalanobis = median(mah);
  res.median_corr_euclidean = median(euc);
  res.median_corr_mahalanobis_median_scale = median(med);
  return res;
}

// ---------------------------------------------------------------------------

FrameFeatureSpec TwoMassOptions::default_frames() {
  FrameFeatureSpec f;
  f.kind = FrameFeatureSpec::Kind::Spectrogram;
  f.window_len = 200;
  f.hop = 100;
  f.log_compress = true;
  return f;
}

TwoMassSeedResult run_two_mass_seed(std::uint64_t seed, const TwoMassOptions& opts) {
  const auto trials = simulate_two_mass_grid(opts.grid, seed);
  std::vector<Matrix> frames;
  TwoMassSeedResult r;
  r.seed = seed;
  const auto n = static_cast<Index>(trials.size());
  r.mass_sum.resize(n);
  r.m1.resize(n);
  r.m2.resize(n);
  for (Index i = 0; i < n; ++i) {
    const auto& t = trials[static_cast<std::size_t>(i)];
    frames.push_back(frame_features(t.series, opts.frames));
    r.m1(i) = t.m1;
    r.m2(i) = t.m2;
    r.mass_sum(i) = t.m1 + t.m2;
  }
  const auto feats = compute_all_features(frames);
  r.psi1_mahalanobis = leading_coordinate(feats, Metric::ModifiedMahalanobis, opts.kernel_scale);
  r.psi1_euclidean = leading_coordinate(feats, Metric::Euclidean, opts.kernel_scale);
  r.spearman_mahalanobis = std::abs(spearman(r.psi1_mahalanobis, r.mass_sum));
  r.pearson_mahalanobis = std::abs(pearson(r.psi1_mahalanobis, r.mass_sum));
  r.spearman_euclidean = std::abs(spearman(r.psi1_euclidean, r.mass_sum));
  r.pearson_euclidean = std::abs(pearson(r.psi1_euclidean, r.mass_sum));
  return r;
}

TwoMassResult run_two_mass_demo(const TwoMassOptions& opts) {
  if (opts.seeds.empty()) throw ValidationError("two-mass demo: no seeds");
  TwoMassResult res;
  res.seeds.resize(opts.seeds.size());
  parallel_for(opts.seeds.size(), opts.threads,
               [&](std::size_t i) { res.seeds[i] = run_two_mass_seed(opts.seeds[i], opts); });
  std::vector<double> sm, se, pm, pe;
  for (const auto& s : res.seeds) {
    sm.push_back(s.spearman_mahalanobis);
    se.push_back(s.spearman_euclidean);
    pm.push_back(s.pearson_mahalanobis);
    pe.push_back(s.pearson_euclidean);
  }
  res.median_spearman_mahalanobis = median(sm);
  res.median_spearman_euclidean = median(se);
  res.median_pearson_mahalanobis = median(pm);
  res.median_pearson_euclidean = median(pe);
  return res;
}

// ---------------------------------------------------------------------------

SweepSeedResult run_sweep_seed(std::uint64_t seed, const SweepOptions& opts) {
  DbsFixtureConfig fc = opts.fixture;
  fc.seed = seed;
  ScenarioConfig sc;
  sc.kind = ScenarioConfig::Kind::Dbs;
  sc.seed = seed;
  sc.dbs = fc;
  const Dataset ds = simulate_scenario(sc);

  PipelineConfig cfg = opts.pipeline;
  cfg.detect.enabled = true;
  const PipelineResult pr = run_pipeline(ds, cfg);

  SweepSeedResult r;
  r.seed = seed;
  r.truth = *ds.truth;
  const auto& b = pr.detection->borders;
  const auto& s = pr.detection->sub;
  r.entry_idx = b.i_en;
  r.exit_idx = b.i_ex;
  r.dlor_success = s.success;
  r.dlor_exit_idx = s.success ? s.i_d : Index{-1};
  const auto within = [&](Index a, Index t) { return std::abs(a - t) <= opts.tolerance; };
  r.entry_ok = within(r.entry_idx, r.truth.entry_idx);
  r.exit_ok = within(r.exit_idx, r.truth.exit_idx);
  r.dlor_ok = s.success && within(r.dlor_exit_idx, r.truth.dlor_exit_idx);
  r.monotone_ok = s.success && b.i_en < s.i_d && s.i_d <= b.i_ex;
  r.report = *pr.report;
  return r;
}

SweepResult run_sweep(const SweepOptions& opts) {
  if (opts.seeds.empty()) throw ValidationError("sweep: no seeds");
  if (opts.tolerance < 0) throw ValidationError("sweep: tolerance must be >= 0");
  SweepResult res;
  res.seeds.resize(opts.seeds.size());
  parallel_for(opts.seeds.size(), opts.threads,
               [&](std::size_t i) { res.seeds[i] = run_sweep_seed(opts.seeds[i], opts); });
  int entry = 0, exit = 0, dlor = 0;
  for (const auto& s : res.seeds) {
    entry += s.entry_ok;
    exit += s.exit_ok;
    dlor += s.dlor_ok;
    if (s.dlor_success) {
      ++res.dlor_successes;
      if (!s.monotone_ok) ++res.monotone_violations;
    }
  }
  const double n = static_cast<double>(res.seeds.size());
  res.entry_rate = entry / n;
  res.exit_rate = exit / n;
  res.dlor_rate = dlor / n;
  return res;
}

}  // namespace statemap
