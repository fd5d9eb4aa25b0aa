#pragma once

// Diffusion maps: Gaussian affinity, row normalization, the EDT proximity
// kernel, and the eigenvector embedding.

#include "statemap/geometry.hpp"

#include <optional>
#include <string>

namespace statemap {

/// How the Gaussian kernel scale is chosen when no explicit value is given.
struct KernelScale {
  enum class Rule { Median, Mean, Fixed };
  Rule rule = Rule::Median;
  double value = 0.0;  // used by Fixed

  static KernelScale median() { return {Rule::Median, 0.0}; }
  static KernelScale mean() { return {Rule::Mean, 0.0}; }
  static KernelScale fixed(double v) { return {Rule::Fixed, v}; }
  std::string describe() const;
};

/// Median / mean over the strict upper triangle.
double median_offdiagonal(const Matrix& d);
double mean_offdiagonal(const Matrix& d);

struct Affinity {
  Matrix w;
  double scale = 0.0;
};

/// W = exp(-d / scale). Without an explicit scale, the median off-diagonal
/// distance is used; a zero median throws NumericalError.
Affinity build_affinity(const DistanceMatrix& d, std::optional<double> scale = std::nullopt);
Affinity build_affinity(const DistanceMatrix& d, const KernelScale& rule);

enum class OperatorKind { Plain, Temporal };

struct DiffusionOperator {
  Matrix w;
  Matrix k;
  Vector row_sums;
  double kernel_scale = 0.0;
  OperatorKind kind = OperatorKind::Plain;

  Index size() const { return k.rows(); }
};

/// K = D^-1 W, D = diag(row sums).
DiffusionOperator normalize(const Affinity& affinity);
DiffusionOperator normalize(const Matrix& w, double kernel_scale = 0.0);

/// Row-normalized exp(-(EDT_i - EDT_j)^2 / scale_s). EDT must be strictly
/// monotone (either direction). Default scale_s = 2 * median(adjacent gap^2).
DiffusionOperator build_temporal_kernel(const Vector& edt,
                                        std::optional<double> scale_s = std::nullopt);

/// K^t = K + K^s (rows sum to 2). K^t is generally not symmetric.
DiffusionOperator combine(const DiffusionOperator& k, const DiffusionOperator& ks);

struct EigenOptions {
  double imag_tol = 1e-8;
  double gap_tol = 1e-12;
  double trivial_eig_tol = 1e-8;
  double trivial_vec_tol = 1e-6;
};

struct Embedding {
  Matrix coords;     // N x P, columns psi^1..psi^P
  Vector eigvals;    // lambda^0..lambda^P
  Vector spectrum;   // real parts of all eigenvalues, descending
  Vector psi0;
  bool trivial_checked = false;  // lambda^0 == 1 and psi^0 constant
  bool degenerate_gap = false;   // lambda^P - lambda^(P+1) below gap_tol

  Index p() const { return coords.cols(); }
};

/// General eigendecomposition, eigenpairs ordered by descending real part,
/// psi^0 dropped from coords, unit 2-norm vectors with their largest-magnitude
/// entry positive. Throws NumericalError when a retained eigenpair is complex.
Embedding eigen_embed(const DiffusionOperator& op, int p, const EigenOptions& opts = {});

}  // namespace statemap
