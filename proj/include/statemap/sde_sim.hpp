#pragma once

// Synthetic data: multiscale Ornstein-Uhlenbeck states observed through a
// measurement function, and a forced two-mass spring system.

#include "statemap/common.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace statemap {

/// Quadratic-potential Ito process dx = -(x - baseline) dt + Lambda dw, with
/// Lambda = diag(I_{state_dim}, I_{noise_dim} / timescale_eps) and per-step
/// Brownian increments of standard deviation diffusion_scale * sqrt(dt).
struct OUSpec {
  Vector baseline;
  int state_dim = 1;
  int noise_dim = 0;
  double timescale_eps = 1.0;
  double diffusion_scale = 1.0;
  double dt = 0.05;
  int n_steps = 2;

  int dim() const { return state_dim + noise_dim; }
  /// Diagonal of Lambda.
  Vector diffusion_diag() const;
  void validate() const;
};

/// Euler-Maruyama path started at the baseline. Rows are time steps (n_steps x d).
/// Throws NumericalError if the path leaves the finite range.
Matrix simulate_ou(const OUSpec& spec, std::uint64_t seed);

class ObservationFn {
 public:
  enum class Kind { Identity, Linear, Quadratic2D, Custom };

  static ObservationFn identity(int dim);
  /// y = A x. A must have full column rank.
  static ObservationFn linear(Matrix a);
  /// (theta, eta) -> (theta^2 + 3 eta^2, theta^2 - eta^2).
  static ObservationFn quadratic2d();
  static ObservationFn custom(int in_dim, int out_dim,
                              std::function<Vector(const Vector&)> fn,
                              std::string description);

  Kind kind() const { return kind_; }
  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }
  const Matrix& matrix() const { return a_; }
  const std::string& description() const { return description_; }

  Vector operator()(const Vector& x) const;

 private:
  ObservationFn() = default;

  Kind kind_ = Kind::Identity;
  int in_dim_ = 0;
  int out_dim_ = 0;
  Matrix a_;
  std::function<Vector(const Vector&)> custom_;
  std::string description_;
};

/// Applies f to every row of a latent block.
Matrix observe(const Matrix& latents, const ObservationFn& f);

/// First state index of the DLOR, VMNR and After regions (0-based).
struct RegionBorders {
  Index entry = 0;
  Index dlor_exit = 0;
  Index exit = 0;
};

struct SimulatedTrajectory {
  std::vector<Matrix> states;
  std::vector<Matrix> latents;
  std::vector<Vector> baselines;
  Vector edt;
  std::vector<int> region_labels;
  std::vector<std::uint64_t> seeds;
  std::optional<RegionBorders> borders;

  Index size() const { return static_cast<Index>(states.size()); }
};

/// Simulates one state per baseline. Each state gets its own seed derived from
/// `seed`, so results do not depend on evaluation order.
SimulatedTrajectory simulate_states(const std::vector<Vector>& baselines,
                                    const OUSpec& spec, const ObservationFn& f,
                                    std::uint64_t seed);

/// Thirty states in three groups of ten with theta baselines -5, 10 and 50,
/// noise baselines uniform on [0, 100], eps = 0.1, dt = 0.05, sigma^2 = 0.09,
/// 250 steps, quadratic observation.
SimulatedTrajectory build_three_group_scenario(std::uint64_t seed);

/// Ordered four-region trajectory (Before, DLOR, VMNR, After) used as a
/// stand-in for a labelled recording track. The Before region ramps linearly
/// from before_start to before_end; the other regions are flat.
struct DbsFixtureConfig {
  std::array<int, 4> lengths{10, 8, 8, 10};
  double before_start = 0.0;
  double before_end = 3.0;
  double dlor = 14.0;
  double vmnr = 9.0;
  double after = 0.0;
  double eta_low = 0.0;
  double eta_high = 10.0;
  double eps = 0.1;
  double sigma = 0.3;
  double dt = 0.05;
  int n_steps = 250;
  double edt_start = 10.0;
  double edt_step = -0.4;
  std::uint64_t seed = 0;

  void validate() const;
};

SimulatedTrajectory build_synthetic_dbs_trajectory(const DbsFixtureConfig& config);

struct SquareWave {
  double amplitude = 1.0;
  double period = 1.0;
};

/// Two masses coupled by a spring k2, each tied to ground by two springs k1,
/// force applied to m1:
///   m1 x1'' = F(t) - 2 k1 x1 - k2 (x1 - x2) - c1 x1'
///   m2 x2'' =      - 2 k1 x2 - k2 (x2 - x1) - c2 x2'
/// with c_i = damping_fraction * sqrt(k1 * m_i).
///
/// Two optional within-trial fluctuations are held constant over each half
/// period of the forcing and follow a discrete OU recursion
/// u <- u - rate (u - baseline) + diffusion sqrt(rate) N(0, 1):
/// the log forcing amplitude (a fast nuisance) and the log of each mass (a
/// small perturbation of the intrinsic state).
struct TwoMassSpec {
  double m1 = 1.0;
  double m2 = 1.0;
  double k1 = 1.0;
  double k2 = 1.0;
  SquareWave forcing;
  double duration = 10.0;
  double sample_rate = 100.0;
  double noise_std = 0.0;
  double damping_fraction = 0.01;
  int substeps = 16;
  std::array<double, 4> initial_state{0.0, 0.0, 0.0, 0.0};  // x1, x2, v1, v2

  double amplitude_log_baseline = 0.0;
  double amplitude_log_diffusion = 0.0;
  double mass_log_diffusion = 0.0;
  double fluctuation_rate = 0.5;

  Index n_samples() const;
  void validate() const;
};

/// RK4 integration; returns samples of x2 plus Gaussian measurement noise.
Vector simulate_two_mass(const TwoMassSpec& spec, std::uint64_t seed);

/// Total mechanical energy of a state (x1, x2, v1, v2) for the given spec.
double two_mass_energy(const TwoMassSpec& spec, const std::array<double, 4>& state);

/// Advances (x1, x2, v1, v2) by one RK4 step with constant forcing and masses.
std::array<double, 4> two_mass_rk4_step(const std::array<double, 4>& state, double m1,
                                        double m2, const TwoMassSpec& spec,
                                        double force, double h);

struct TwoMassGrid {
  std::vector<double> m1_values{1.0, 2.0, 3.0, 4.0};
  std::vector<double> m2_values{1.0, 2.0, 3.0, 4.0, 5.0};
  TwoMassSpec base = default_base();
  /// Per-trial log amplitude baselines are drawn uniformly from [-range, range].
  double amplitude_log_baseline_range = 1.0;

  static TwoMassSpec default_base();
};

struct TwoMassTrial {
  double m1 = 0.0;
  double m2 = 0.0;
  double amplitude_log_baseline = 0.0;
  std::uint64_t seed = 0;
  Vector series;
};

/// One trial per (m1, m2) grid point; grid points with a non-positive mass are
/// skipped since they make the equations of motion singular.
std::vector<TwoMassTrial> simulate_two_mass_grid(const TwoMassGrid& grid, std::uint64_t seed);

}  // namespace statemap
