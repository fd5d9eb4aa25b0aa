#include "statemap/preprocess.hpp"
#include "statemap/sde_sim.hpp"
#include "statemap/stats.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace statemap;

namespace {

OUSpec make_spec(Vector baseline, int d1, int d2, double eps, double sigma, double dt, int m) {
  OUSpec s;
  s.baseline = std::move(baseline);
  s.state_dim = d1;
  s.noise_dim = d2;
  s.timescale_eps = eps;
  s.diffusion_scale = sigma;
  s.dt = dt;
  s.n_steps = m;
  return s;
}

Matrix increments(const Matrix& x) { return x.bottomRows(x.rows() - 1) - x.topRows(x.rows() - 1); }

Matrix sample_cov(const Matrix& x) {
  const Matrix c = x.rowwise() - x.colwise().mean();
  return c.transpose() * c / static_cast<double>(x.rows() - 1);
}

// Angular frequencies sqrt(lambda) of the generalized problem K v = lambda M v.
Vector mode_frequencies(double m1, double m2, double k1, double k2) {
  Matrix k(2, 2);
  k << 2 * k1 + k2, -k2, -k2, 2 * k1 + k2;
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = m1;
  m(1, 1) = m2;
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(k, m);
  return es.eigenvalues().cwiseSqrt();
}

// Frequencies (Hz) of the two largest local maxima of the periodogram, ascending.
std::pair<double, double> two_peaks(const Vector& x, double fs, int skip_bins) {
  Eigen::FFT<double> fft;
  std::vector<double> in(x.data(), x.data() + x.size());
  std::vector<std::complex<double>> out;
  fft.fwd(out, in);
  const int half = static_cast<int>(x.size() / 2);
  std::vector<std::pair<double, int>> peaks;
  for (int k = skip_bins; k < half - 1; ++k) {
    const double a = std::abs(out[k]);
    if (a > std::abs(out[k - 1]) && a >= std::abs(out[k + 1])) peaks.push_back({a, k});
  }
  std::sort(peaks.rbegin(), peaks.rend());
  double f0 = peaks.at(0).second * fs / x.size();
  double f1 = peaks.at(1).second * fs / x.size();
  if (f0 > f1) std::swap(f0, f1);
  return {f0, f1};
}

// Frequency (Hz) of the lowest local maximum reaching rel * the global maximum.
double lowest_peak(const Vector& x, double fs, int skip_bins, double rel) {
  Eigen::FFT<double> fft;
  std::vector<double> in(x.data(), x.data() + x.size());
  std::vector<std::complex<double>> out;
  fft.fwd(out, in);
  const int half = static_cast<int>(x.size() / 2);
  double top = 0.0;
  for (int k = skip_bins; k < half; ++k) top = std::max(top, std::abs(out[k]));
  for (int k = skip_bins; k < half - 1; ++k) {
    const double a = std::abs(out[k]);
    if (a >= rel * top && a > std::abs(out[k - 1]) && a >= std::abs(out[k + 1])) {
      return k * fs / x.size();
    }
  }
  return -1.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Ornstein-Uhlenbeck simulation

TEST(SimulateOU, ZeroDiffusionStaysAtBaseline) {
  const OUSpec s = make_spec(Vector::Constant(1, 5.0), 1, 0, 1.0, 0.0, 0.3, 50);
  const Matrix x = simulate_ou(s, 7);
  ASSERT_EQ(x.rows(), 50);
  ASSERT_EQ(x.cols(), 1);
  for (Index j = 0; j < x.rows(); ++j) EXPECT_EQ(x(j, 0), 5.0);
}

TEST(SimulateOU, StartsAtBaselineAndHasRequestedShape) {
  const OUSpec s = make_spec(Vector{{1.0, -2.0, 3.0}}, 2, 1, 0.5, 1.0, 0.01, 17);
  const Matrix x = simulate_ou(s, 3);
  EXPECT_EQ(x.rows(), 17);
  EXPECT_EQ(x.cols(), 3);
  EXPECT_EQ(x.row(0), s.baseline.transpose());
}

TEST(SimulateOU, DeterministicGivenSeed) {
  const OUSpec s = make_spec(Vector{{0.0, 1.0}}, 1, 1, 0.1, 0.3, 0.05, 500);
  EXPECT_EQ(simulate_ou(s, 42), simulate_ou(s, 42));
  EXPECT_NE(simulate_ou(s, 42), simulate_ou(s, 43));
}

TEST(SimulateOU, ThreeGroupRegimeSampleMeanNearBaseline) {
  // sigma^2 = 0.09, M = 250, dt = 0.05; bound 3 sigma / sqrt(2 M dt) = 0.18.
  const double sigma = 0.3;
  const int m = 250;
  const double dt = 0.05;
  const double bound = 3.0 * sigma / std::sqrt(2.0 * m * dt);
  for (double theta : {-5.0, 10.0, 50.0}) {
    int inside = 0;
    double grand = 0.0;
    for (int seed = 0; seed < 100; ++seed) {
      const Matrix x = simulate_ou(make_spec(Vector::Constant(1, theta), 1, 0, 1.0, sigma, dt, m),
                                   static_cast<std::uint64_t>(seed));
      const double mean = x.col(0).mean();
      inside += std::abs(mean - theta) <= bound;
      grand += mean / 100.0;
    }
    EXPECT_GE(inside, 95) << "theta = " << theta;
    EXPECT_LT(std::abs(grand - theta), bound / 10.0) << "theta = " << theta;
  }
}

TEST(SimulateOU, NoiseIncrementVarianceMatchesClosedForm) {
  // Var(d eta) = dt * sigma^2 / eps^2 = 0.05 * 0.09 / 0.01 = 0.45
  const OUSpec s = make_spec(Vector::Constant(1, 0.0), 0, 1, 0.1, 0.3, 0.05, 10001);
  const Matrix inc = increments(simulate_ou(s, 11));
  const double var = sample_cov(inc)(0, 0);
  EXPECT_NEAR(var / 0.45, 1.0, 0.10);
}

TEST(SimulateOU, LongRunMeanConvergesToBaseline) {
  const OUSpec s = make_spec(Vector{{10.0, 50.0}}, 1, 1, 0.1, 1.0, 0.05, 100000);
  const Matrix x = simulate_ou(s, 5);
  const Vector mean = x.colwise().mean().transpose();
  EXPECT_LT((mean - s.baseline).norm() / s.baseline.norm(), 0.02);
}

TEST(SimulateOU, IncrementCovarianceMatchesDiagonalClosedForm) {
  const double dt = 0.05, sigma = 1.0, eps = 0.1;
  const OUSpec s = make_spec(Vector{{3.0, 4.0}}, 1, 1, eps, sigma, dt, 100000);
  const Matrix c = sample_cov(increments(simulate_ou(s, 9)));
  const double c11 = dt * sigma * sigma;
  const double c22 = dt * sigma * sigma / (eps * eps);
  EXPECT_NEAR(c(0, 0) / c11, 1.0, 0.05);
  EXPECT_NEAR(c(1, 1) / c22, 1.0, 0.05);
  EXPECT_LT(std::abs(c(0, 1)) / std::sqrt(c11 * c22), 0.05);
}

TEST(SimulateOU, BlowupIsReported) {
  // |1 - dt| > 1 makes the Euler map unstable.
  const OUSpec s = make_spec(Vector::Constant(1, 1.0), 1, 0, 1.0, 1.0, 3.5, 5000);
  EXPECT_THROW(simulate_ou(s, 1), NumericalError);
}

TEST(SimulateOU, InvalidSpecsRejected) {
  EXPECT_THROW(simulate_ou(make_spec(Vector::Constant(1, 0.0), 0, 0, 1.0, 1.0, 0.1, 10), 0),
               ValidationError);
  EXPECT_THROW(simulate_ou(make_spec(Vector::Constant(1, 0.0), 1, 0, 1.0, 1.0, 0.0, 10), 0),
               ValidationError);
  EXPECT_THROW(simulate_ou(make_spec(Vector::Constant(1, 0.0), 1, 0, 0.0, 1.0, 0.1, 10), 0),
               ValidationError);
  EXPECT_THROW(simulate_ou(make_spec(Vector::Constant(1, 0.0), 1, 0, 1.0, 1.0, 0.1, 1), 0),
               ValidationError);
  EXPECT_THROW(simulate_ou(make_spec(Vector::Constant(2, 0.0), 1, 0, 1.0, 1.0, 0.1, 10), 0),
               ValidationError);
}

// ---------------------------------------------------------------------------
// Observation

TEST(Observe, Identity) {
  const auto f = ObservationFn::identity(2);
  EXPECT_EQ(f(Vector{{1.0, 2.0}}), (Vector{{1.0, 2.0}}));
}

TEST(Observe, Quadratic2D) {
  const auto f = ObservationFn::quadratic2d();
  EXPECT_EQ(f(Vector{{2.0, 1.0}}), (Vector{{7.0, 3.0}}));
}

TEST(Observe, Linear) {
  const auto f = ObservationFn::linear(2.0 * Matrix::Identity(2, 2));
  EXPECT_EQ(f(Vector{{1.0, -1.0}}), (Vector{{2.0, -2.0}}));
}

TEST(Observe, LinearRequiresFullColumnRank) {
  Matrix a(3, 2);
  a << 1, 2, 2, 4, 3, 6;
  EXPECT_THROW(ObservationFn::linear(a), ValidationError);
}

TEST(Observe, AppliesRowwise) {
  Matrix x(3, 2);
  x << 2, 1, 0, 1, 1, 0;
  const Matrix y = observe(x, ObservationFn::quadratic2d());
  ASSERT_EQ(y.rows(), 3);
  EXPECT_EQ(y.row(0), (Eigen::RowVector2d{7.0, 3.0}));
  EXPECT_EQ(y.row(1), (Eigen::RowVector2d{3.0, -1.0}));
  EXPECT_EQ(y.row(2), (Eigen::RowVector2d{1.0, 1.0}));
}

TEST(Observe, CustomCallable) {
  const auto f = ObservationFn::custom(
      2, 1, [](const Vector& x) { return Vector::Constant(1, x.sum()); }, "sum");
  Matrix x(2, 2);
  x << 1, 2, 3, 4;
  const Matrix y = observe(x, f);
  EXPECT_EQ(y(0, 0), 3.0);
  EXPECT_EQ(y(1, 0), 7.0);
}

TEST(Observe, DimensionMismatch) {
  EXPECT_THROW(observe(Matrix::Zero(4, 3), ObservationFn::quadratic2d()), ValidationError);
  EXPECT_THROW(ObservationFn::identity(2)(Vector::Zero(3)), ValidationError);
}

// ---------------------------------------------------------------------------
// Scenarios

TEST(ThreeGroupScenario, Shape) {
  const SimulatedTrajectory t = build_three_group_scenario(4);
  ASSERT_EQ(t.size(), 30);
  for (const auto& s : t.states) {
    EXPECT_EQ(s.rows(), 250);
    EXPECT_EQ(s.cols(), 2);
  }
  for (const auto& x : t.latents) EXPECT_EQ(x.rows(), 250);
  ASSERT_EQ(t.region_labels.size(), 30u);
  for (int g = 0; g < 3; ++g) {
    EXPECT_EQ(std::count(t.region_labels.begin(), t.region_labels.end(), g), 10);
  }
}

TEST(ThreeGroupScenario, BaselinePattern) {
  const SimulatedTrajectory t = build_three_group_scenario(4);
  for (int i = 0; i < 30; ++i) {
    const double expected = i < 10 ? -5.0 : (i < 20 ? 10.0 : 50.0);
    EXPECT_EQ(t.baselines[static_cast<std::size_t>(i)](0), expected);
    const double eta = t.baselines[static_cast<std::size_t>(i)](1);
    EXPECT_GE(eta, 0.0);
    EXPECT_LE(eta, 100.0);
  }
}

TEST(ThreeGroupScenario, ObservedThroughQuadratic) {
  const SimulatedTrajectory t = build_three_group_scenario(2);
  const auto f = ObservationFn::quadratic2d();
  for (Index j = 0; j < 250; j += 37) {
    const Vector y = f(t.latents[5].row(j).transpose());
    EXPECT_EQ(t.states[5].row(j), y.transpose());
  }
}

TEST(ThreeGroupScenario, Deterministic) {
  const auto a = build_three_group_scenario(8);
  const auto b = build_three_group_scenario(8);
  for (std::size_t i = 0; i < a.states.size(); ++i) EXPECT_EQ(a.states[i], b.states[i]);
  EXPECT_EQ(a.edt, b.edt);
}

TEST(DbsFixture, BordersByConstruction) {
  DbsFixtureConfig c;
  c.lengths = {10, 8, 8, 10};
  const auto t = build_synthetic_dbs_trajectory(c);
  EXPECT_EQ(t.size(), 36);
  ASSERT_TRUE(t.borders.has_value());
  EXPECT_EQ(t.borders->entry, 10);
  EXPECT_EQ(t.borders->dlor_exit, 18);
  EXPECT_EQ(t.borders->exit, 26);
  for (int i = 0; i < 36; ++i) {
    const int expected = i < 10 ? 0 : (i < 18 ? 1 : (i < 26 ? 2 : 3));
    EXPECT_EQ(t.region_labels[static_cast<std::size_t>(i)], expected);
  }
  for (Index i = 1; i < t.edt.size(); ++i) EXPECT_LT(t.edt(i), t.edt(i - 1));
}

TEST(DbsFixture, RejectsShortRegions) {
  DbsFixtureConfig c;
  c.lengths = {10, 2, 8, 10};
  EXPECT_THROW(build_synthetic_dbs_trajectory(c), ValidationError);
}

// ---------------------------------------------------------------------------
// Two-mass system

TEST(TwoMass, EquilibriumStaysZero) {
  TwoMassSpec s;
  s.forcing.amplitude = 0.0;
  s.duration = 5.0;
  s.sample_rate = 50.0;
  const Vector x = simulate_two_mass(s, 1);
  EXPECT_EQ(x.size(), 250);
  EXPECT_EQ(x.cwiseAbs().maxCoeff(), 0.0);
}

TEST(TwoMass, LengthAndDeterminism) {
  TwoMassSpec s;
  s.duration = 3.0;
  s.sample_rate = 40.0;
  s.noise_std = 0.1;
  s.amplitude_log_diffusion = 0.3;
  EXPECT_EQ(simulate_two_mass(s, 5).size(), 120);
  EXPECT_EQ(simulate_two_mass(s, 5), simulate_two_mass(s, 5));
}

TEST(TwoMass, EnergyConservedWithoutDampingOrForcing) {
  TwoMassSpec s;
  s.m1 = 1.0;
  s.m2 = 2.0;
  s.k1 = 1.0;
  s.k2 = 1.5;
  s.damping_fraction = 0.0;
  s.forcing = SquareWave{0.0, 1.0};
  std::array<double, 4> state{1.0, -0.5, 0.0, 0.3};
  const double e0 = two_mass_energy(s, state);
  const double fs = 200.0;
  const double h = 1.0 / (fs * s.substeps);
  const int steps_per_period = static_cast<int>(fs * s.substeps * s.forcing.period);
  for (int period = 0; period < 20; ++period) {
    const double before = two_mass_energy(s, state);
    for (int k = 0; k < steps_per_period; ++k) state = two_mass_rk4_step(state, s.m1, s.m2, s, 0.0, h);
    const double after = two_mass_energy(s, state);
    EXPECT_LT(std::abs(after - before) / before, 1e-3) << "period " << period;
  }
  EXPECT_LT(std::abs(two_mass_energy(s, state) - e0) / e0, 1e-3);
}

TEST(TwoMass, SpectralPeaksAtModeFrequencies) {
  TwoMassSpec s;
  s.forcing.amplitude = 0.0;
  s.initial_state = {1.0, 0.0, 0.0, 0.0};
  s.sample_rate = 10.0;
  s.duration = 1638.4;  // 16384 samples
  const Vector x = simulate_two_mass(s, 0);
  const Vector w = mode_frequencies(1.0, 1.0, 1.0, 1.0) / (2.0 * std::numbers::pi);
  const auto [f_lo, f_hi] = two_peaks(x, s.sample_rate, 2);
  EXPECT_NEAR(f_lo / w(0), 1.0, 0.02);
  EXPECT_NEAR(f_hi / w(1), 1.0, 0.02);
}

TEST(TwoMass, LowestModeAcrossMassGrid) {
  std::vector<double> sums, lows;
  for (double m1 : {1.0, 2.0, 3.0, 4.0}) {
    double prev = INFINITY;
    for (double m2 : {1.0, 2.0, 3.0, 4.0, 5.0}) {
      const double w0 = mode_frequencies(m1, m2, 1.0, 1.0)(0);
      EXPECT_LT(w0, prev);
      prev = w0;
      sums.push_back(m1 + m2);
      lows.push_back(w0);

      TwoMassSpec s;
      s.m1 = m1;
      s.m2 = m2;
      s.forcing.amplitude = 0.0;
      s.initial_state = {1.0, 0.0, 0.0, 0.0};
      s.sample_rate = 5.0;
      s.duration = 3276.8;  // 16384 samples
      const Vector x = simulate_two_mass(s, 0);
      const double f_lo = lowest_peak(x, s.sample_rate, 2, 0.05);
      EXPECT_NEAR(f_lo * 2.0 * std::numbers::pi / w0, 1.0, 0.02) << m1 << "," << m2;
    }
  }
  const Vector sv = Eigen::Map<Vector>(sums.data(), static_cast<Index>(sums.size()));
  const Vector lv = Eigen::Map<Vector>(lows.data(), static_cast<Index>(lows.size()));
  EXPECT_LT(spearman(sv, lv), -0.95);
}

TEST(TwoMass, GridSkipsZeroMasses) {
  TwoMassGrid g;
  g.m1_values = {0.0, 1.0, 2.0};
  g.m2_values = {0.0, 1.0};
  g.base.duration = 2.0;
  g.base.sample_rate = 20.0;
  const auto trials = simulate_two_mass_grid(g, 3);
  ASSERT_EQ(trials.size(), 2u);
  EXPECT_EQ(trials[0].m1, 1.0);
  EXPECT_EQ(trials[1].m1, 2.0);
  for (const auto& t : trials) EXPECT_EQ(t.m2, 1.0);
}

TEST(TwoMass, InvalidSpecRejected) {
  TwoMassSpec s;
  s.m1 = 0.0;
  EXPECT_THROW(simulate_two_mass(s, 0), ValidationError);
  s.m1 = 1.0;
  s.noise_std = -1.0;
  EXPECT_THROW(simulate_two_mass(s, 0), ValidationError);
}
