#include "statemap/sde_sim.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace statemap {

Vector OUSpec::diffusion_diag() const {
  Vector lambda(dim());
  lambda.head(state_dim).setOnes();
  lambda.tail(noise_dim).setConstant(1.0 / timescale_eps);
  return lambda;
}

void OUSpec::validate() const {
  if (state_dim < 0 || noise_dim < 0 || dim() < 1) {
    throw ValidationError("OUSpec: need state_dim >= 0, noise_dim >= 0 and at least one dimension");
  }
  if (baseline.size() != dim()) {
    std::ostringstream os;
    os << "OUSpec: baseline has " << baseline.size() << " entries, expected " << dim();
    throw ValidationError(os.str());
  }
  if (!baseline.allFinite()) throw ValidationError("OUSpec: baseline must be finite");
  if (!(timescale_eps > 0.0)) throw ValidationError("OUSpec: timescale_eps must be > 0");
  if (!(dt > 0.0)) throw ValidationError("OUSpec: dt must be > 0");
  if (!(diffusion_scale >= 0.0)) throw ValidationError("OUSpec: diffusion_scale must be >= 0");
  if (n_steps < 2) throw ValidationError("OUSpec: n_steps must be >= 2");
}

Matrix simulate_ou(const OUSpec& spec, std::uint64_t seed) {
  spec.validate();
  const Index d = spec.dim();
  const Vector step_scale = spec.diffusion_diag() * std::sqrt(spec.dt);
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Matrix x(spec.n_steps, d);
  Vector cur = spec.baseline;
  x.row(0) = cur.transpose();
  for (int j = 1; j < spec.n_steps; ++j) {
    for (Index k = 0; k < d; ++k) {
      const double w = spec.diffusion_scale * gauss(rng);
      cur(k) += -(cur(k) - spec.baseline(k)) * spec.dt + step_scale(k) * w;
    }
    if (!cur.allFinite()) {
      std::ostringstream os;
      os << "simulate_ou: integration blowup at step " << j << " (dt = " << spec.dt
         << " is too large for the unit drift)";
      throw NumericalError(os.str());
    }
    x.row(j) = cur.transpose();
  }
  return x;
}

// ---------------------------------------------------------------------------
// Observation functions

ObservationFn ObservationFn::identity(int dim) {
  if (dim < 1) throw ValidationError("identity observation: dim must be >= 1");
  ObservationFn f;
  f.kind_ = Kind::Identity;
  f.in_dim_ = f.out_dim_ = dim;
  f.description_ = "identity";
  return f;
}

ObservationFn ObservationFn::linear(Matrix a) {
  if (a.rows() < 1 || a.cols() < 1) throw ValidationError("linear observation: empty matrix");
  if (!a.allFinite()) throw ValidationError("linear observation: non-finite matrix");
  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  if (qr.rank() != a.cols()) {
    throw ValidationError("linear observation: matrix must have full column rank");
  }
  ObservationFn f;
  f.kind_ = Kind::Linear;
  f.in_dim_ = static_cast<int>(a.cols());
  f.out_dim_ = static_cast<int>(a.rows());
  f.a_ = std::move(a);
  f.description_ = "linear";
  return f;
}

ObservationFn ObservationFn::quadratic2d() {
  ObservationFn f;
  f.kind_ = Kind::Quadratic2D;
  f.in_dim_ = f.out_dim_ = 2;
  f.description_ = "quadratic2d";
  return f;
}

ObservationFn ObservationFn::custom(int in_dim, int out_dim,
                                    std::function<Vector(const Vector&)> fn,
                                    std::string description) {
  if (in_dim < 1 || out_dim < 1 || !fn) throw ValidationError("custom observation: invalid definition");
  ObservationFn f;
  f.kind_ = Kind::Custom;
  f.in_dim_ = in_dim;
  f.out_dim_ = out_dim;
  f.custom_ = std::move(fn);
  f.description_ = std::move(description);
  return f;
}

Vector ObservationFn::operator()(const Vector& x) const {
  if (x.size() != in_dim_) {
    std::ostringstream os;
    os << "observation '" << description_ << "': input has dimension " << x.size()
       << ", expected " << in_dim_;
    throw ValidationError(os.str());
  }
  switch (kind_) {
    case Kind::Identity:
      return x;
    case Kind::Linear:
      return a_ * x;
    case Kind::Quadratic2D: {
      const double t2 = x(0) * x(0);
      const double e2 = x(1) * x(1);
      return Vector{{t2 + 3.0 * e2, t2 - e2}};
    }
    case Kind::Custom: {
      Vector y = custom_(x);
      if (y.size() != out_dim_) throw ValidationError("custom observation returned wrong dimension");
      return y;
    }
  }
  return x;
}

Matrix observe(const Matrix& latents, const ObservationFn& f) {
  if (latents.cols() != f.in_dim()) {
    std::ostringstream os;
    os << "observe: latent dimension " << latents.cols() << " does not match observation input "
       << f.in_dim();
    throw ValidationError(os.str());
  }
  if (f.kind() == ObservationFn::Kind::Identity) return latents;
  if (f.kind() == ObservationFn::Kind::Linear) return latents * f.matrix().transpose();
  Matrix y(latents.rows(), f.out_dim());
  for (Index j = 0; j < latents.rows(); ++j) {
    y.row(j) = f(latents.row(j).transpose()).transpose();
  }
  return y;
}

// ---------------------------------------------------------------------------
// Scenarios

SimulatedTrajectory simulate_states(const std::vector<Vector>& baselines, const OUSpec& spec,
                                    const ObservationFn& f, std::uint64_t seed) {
  if (baselines.empty()) throw ValidationError("simulate_states: no baselines");
  SimulatedTrajectory traj;
  const auto n = baselines.size();
  traj.states.reserve(n);
  traj.latents.reserve(n);
  traj.edt.resize(static_cast<Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    OUSpec s = spec;
    s.baseline = baselines[i];
    const std::uint64_t state_seed = derive_seed(seed, i);
    Matrix x = simulate_ou(s, state_seed);
    traj.states.push_back(observe(x, f));
    traj.latents.push_back(std::move(x));
    traj.baselines.push_back(baselines[i]);
    traj.seeds.push_back(state_seed);
    traj.edt(static_cast<Index>(i)) = static_cast<double>(i);
  }
  return traj;
}

SimulatedTrajectory build_three_group_scenario(std::uint64_t seed) {
  constexpr int kPerGroup = 10;
  constexpr std::array<double, 3> kTheta{-5.0, 10.0, 50.0};

  Rng rng(derive_seed(seed, 0xB45E11));
  std::uniform_real_distribution<double> eta_dist(0.0, 100.0);
  std::vector<Vector> baselines;
  std::vector<int> labels;
  for (int g = 0; g < 3; ++g) {
    for (int i = 0; i < kPerGroup; ++i) {
      baselines.push_back(Vector{{kTheta[static_cast<std::size_t>(g)], eta_dist(rng)}});
      labels.push_back(g);
    }
  }

  OUSpec spec;
  spec.state_dim = 1;
  spec.noise_dim = 1;
  spec.timescale_eps = 0.1;
  spec.diffusion_scale = 0.3;  // variance 0.09
  spec.dt = 0.05;
  spec.n_steps = 250;
  spec.baseline = baselines.front();

  SimulatedTrajectory traj = simulate_states(baselines, spec, ObservationFn::quadratic2d(), seed);
  traj.region_labels = std::move(labels);
  return traj;
}

void DbsFixtureConfig::validate() const {
  for (int len : lengths) {
    if (len < 3) throw ValidationError("dbs fixture: every region needs at least 3 states");
  }
  if (!(eta_high >= eta_low)) throw ValidationError("dbs fixture: eta_high < eta_low");
  if (!(eps > 0.0) || !(dt > 0.0) || !(sigma >= 0.0) || n_steps < 3) {
    throw ValidationError("dbs fixture: invalid process parameters");
  }
  if (edt_step == 0.0 || !std::isfinite(edt_step)) {
    throw ValidationError("dbs fixture: edt_step must be non-zero");
  }
}

SimulatedTrajectory build_synthetic_dbs_trajectory(const DbsFixtureConfig& config) {
  config.validate();
  const auto& len = config.lengths;
  const int n = len[0] + len[1] + len[2] + len[3];

  Rng rng(derive_seed(config.seed, 0xDB5));
  std::uniform_real_distribution<double> eta_dist(config.eta_low, config.eta_high);

  std::vector<Vector> baselines;
  std::vector<int> labels;
  for (int r = 0; r < 4; ++r) {
    for (int i = 0; i < len[static_cast<std::size_t>(r)]; ++i) {
      double theta = 0.0;
      switch (r) {
        case 0: {
          const double frac = len[0] > 1 ? static_cast<double>(i) / (len[0] - 1) : 0.0;
          theta = config.before_start + frac * (config.before_end - config.before_start);
          break;
        }
        case 1: theta = config.dlor; break;
        case 2: theta = config.vmnr; break;
        default: theta = config.after; break;
      }
      const double eta = config.eta_high > config.eta_low ? eta_dist(rng) : config.eta_low;
      baselines.push_back(Vector{{theta, eta}});
      labels.push_back(r);
    }
  }

  OUSpec spec;
  spec.state_dim = 1;
  spec.noise_dim = 1;
  spec.timescale_eps = config.eps;
  spec.diffusion_scale = config.sigma;
  spec.dt = config.dt;
  spec.n_steps = config.n_steps;
  spec.baseline = baselines.front();

  SimulatedTrajectory traj =
      simulate_states(baselines, spec, ObservationFn::identity(2), config.seed);
  for (int i = 0; i < n; ++i) traj.edt(i) = config.edt_start + config.edt_step * i;
  traj.region_labels = std::move(labels);
  traj.borders = RegionBorders{len[0], len[0] + len[1], len[0] + len[1] + len[2]};
  return traj;
}

// ---------------------------------------------------------------------------
// Two-mass system

Index TwoMassSpec::n_samples() const {
  return static_cast<Index>(std::llround(duration * sample_rate));
}

void TwoMassSpec::validate() const {
  if (!(m1 > 0.0) || !(m2 > 0.0)) throw ValidationError("two-mass: masses must be > 0");
  if (!(k1 > 0.0) || !(k2 > 0.0)) throw ValidationError("two-mass: spring constants must be > 0");
  if (!(forcing.period > 0.0)) throw ValidationError("two-mass: forcing period must be > 0");
  if (!std::isfinite(forcing.amplitude)) throw ValidationError("two-mass: forcing amplitude must be finite");
  if (!(duration > 0.0) || !(sample_rate > 0.0)) {
    throw ValidationError("two-mass: duration and sample_rate must be > 0");
  }
  if (!(noise_std >= 0.0)) throw ValidationError("two-mass: noise_std must be >= 0");
  if (!(damping_fraction >= 0.0)) throw ValidationError("two-mass: damping_fraction must be >= 0");
  if (substeps < 1) throw ValidationError("two-mass: substeps must be >= 1");
  if (!(amplitude_log_diffusion >= 0.0) || !(mass_log_diffusion >= 0.0)) {
    throw ValidationError("two-mass: fluctuation diffusions must be >= 0");
  }
  if (!(fluctuation_rate > 0.0 && fluctuation_rate < 2.0)) {
    throw ValidationError("two-mass: fluctuation_rate must lie in (0, 2)");
  }
  if (n_samples() < 1) throw ValidationError("two-mass: duration * sample_rate < 1 sample");
}

namespace {

using State4 = std::array<double, 4>;

State4 derivative(const State4& s, double m1, double m2, double c1, double c2,
                  const TwoMassSpec& spec, double force) {
  const double x1 = s[0], x2 = s[1], v1 = s[2], v2 = s[3];
  const double a1 = (force - 2.0 * spec.k1 * x1 - spec.k2 * (x1 - x2) - c1 * v1) / m1;
  const double a2 = (-2.0 * spec.k1 * x2 - spec.k2 * (x2 - x1) - c2 * v2) / m2;
  return {v1, v2, a1, a2};
}

State4 axpy(const State4& s, double h, const State4& k) {
  return {s[0] + h * k[0], s[1] + h * k[1], s[2] + h * k[2], s[3] + h * k[3]};
}

}  // namespace

std::array<double, 4> two_mass_rk4_step(const std::array<double, 4>& state, double m1, double m2,
                                        const TwoMassSpec& spec, double force, double h) {
  const double c1 = spec.damping_fraction * std::sqrt(spec.k1 * spec.m1);
  const double c2 = spec.damping_fraction * std::sqrt(spec.k1 * spec.m2);
  const State4 k1 = derivative(state, m1, m2, c1, c2, spec, force);
  const State4 k2 = derivative(axpy(state, 0.5 * h, k1), m1, m2, c1, c2, spec, force);
  const State4 k3 = derivative(axpy(state, 0.5 * h, k2), m1, m2, c1, c2, spec, force);
  const State4 k4 = derivative(axpy(state, h, k3), m1, m2, c1, c2, spec, force);
  State4 out;
  for (std::size_t i = 0; i < 4; ++i) {
    out[i] = state[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return out;
}

double two_mass_energy(const TwoMassSpec& spec, const std::array<double, 4>& s) {
  const double x1 = s[0], x2 = s[1], v1 = s[2], v2 = s[3];
  const double kinetic = 0.5 * spec.m1 * v1 * v1 + 0.5 * spec.m2 * v2 * v2;
  const double potential =
      spec.k1 * x1 * x1 + spec.k1 * x2 * x2 + 0.5 * spec.k2 * (x1 - x2) * (x1 - x2);
  return kinetic + potential;
}

Vector simulate_two_mass(const TwoMassSpec& spec, std::uint64_t seed) {
  spec.validate();
  const Index n = spec.n_samples();
  const double dt = 1.0 / spec.sample_rate;
  const double h = dt / spec.substeps;
  const double half_period = 0.5 * spec.forcing.period;

  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double rate = spec.fluctuation_rate;
  const double sqrt_rate = std::sqrt(rate);

  State4 state = spec.initial_state;
  double log_amp = spec.amplitude_log_baseline;
  double log_m1 = 0.0;
  double log_m2 = 0.0;
  long segment = 0;

  Vector out(n);
  for (Index j = 0; j < n; ++j) {
    out(j) = state[1];
    const double t = static_cast<double>(j) * dt;
    const long seg = static_cast<long>(std::floor(t / half_period));
    while (segment < seg) {
      log_amp += -rate * (log_amp - spec.amplitude_log_baseline) +
                 spec.amplitude_log_diffusion * sqrt_rate * gauss(rng);
      log_m1 += -rate * log_m1 + spec.mass_log_diffusion * sqrt_rate * gauss(rng);
      log_m2 += -rate * log_m2 + spec.mass_log_diffusion * sqrt_rate * gauss(rng);
      ++segment;
    }
    const double sign = (segment % 2 == 0) ? 1.0 : -1.0;
    const double force = sign * spec.forcing.amplitude * std::exp(log_amp);
    const double m1 = spec.m1 * std::exp(log_m1);
    const double m2 = spec.m2 * std::exp(log_m2);
    for (int s = 0; s < spec.substeps; ++s) {
      state = two_mass_rk4_step(state, m1, m2, spec, force, h);
    }
    if (!std::isfinite(state[0]) || !std::isfinite(state[1]) || !std::isfinite(state[2]) ||
        !std::isfinite(state[3])) {
      std::ostringstream os;
      os << "simulate_two_mass: integration blowup at sample " << j
         << "; reduce 1/(sample_rate * substeps)";
      throw NumericalError(os.str());
    }
  }
  if (spec.noise_std > 0.0) {
    for (Index j = 0; j < n; ++j) out(j) += spec.noise_std * gauss(rng);
  }
  return out;
}

TwoMassSpec TwoMassGrid::default_base() {
  TwoMassSpec s;
  s.k1 = 2.0e4;
  s.k2 = 2.0e4;
  s.forcing = SquareWave{2.0e4, 1.0};
  s.duration = 600.0;
  s.sample_rate = 200.0;
  s.noise_std = 1.0e-2;
  s.damping_fraction = 0.01;
  s.substeps = 16;
  s.amplitude_log_diffusion = 0.5;
  s.mass_log_diffusion = 0.1;
  s.fluctuation_rate = 0.5;
  return s;
}

std::vector<TwoMassTrial> simulate_two_mass_grid(const TwoMassGrid& grid, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x2A55));
  std::uniform_real_distribution<double> amp_dist(-grid.amplitude_log_baseline_range,
                                                  grid.amplitude_log_baseline_range);
  std::vector<TwoMassTrial> trials;
  std::uint64_t stream = 0;
  for (double m1 : grid.m1_values) {
    for (double m2 : grid.m2_values) {
      if (m1 <= 0.0 || m2 <= 0.0) continue;
      TwoMassSpec spec = grid.base;
      spec.m1 = m1;
      spec.m2 = m2;
      spec.amplitude_log_baseline =
          grid.amplitude_log_baseline_range > 0.0 ? amp_dist(rng) : 0.0;
      TwoMassTrial trial;
      trial.m1 = m1;
      trial.m2 = m2;
      trial.amplitude_log_baseline = spec.amplitude_log_baseline;
      trial.seed = derive_seed(seed, stream++);
      trial.series = simulate_two_mass(spec, trial.seed);
      trials.push_back(std::move(trial));
    }
  }
  if (trials.empty()) throw ValidationError("two-mass grid: no grid point with positive masses");
  return trials;
}

}  // namespace statemap
