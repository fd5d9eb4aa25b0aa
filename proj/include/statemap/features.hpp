#pragma once

// Per-state features: mean of the measurements and covariance of their
// increments, with a spectrally truncated pseudo-inverse.

#include "statemap/common.hpp"

#include <vector>

namespace statemap {

struct InverseOptions {
  double rel_tol = 1e-6;
  double abs_tol = 1e-12;
  /// Max |A - A^T| allowed, relative to max |A| (absolute when A is zero).
  double symmetry_tol = 1e-10;
};

struct PseudoInverse {
  Matrix inverse;
  /// W with inverse = W W^T; columns are retained eigenvectors scaled by 1/sqrt(lambda).
  Matrix whitener;
  int rank = 0;
};

/// Eigenvalues below max(rel_tol * lambda_max, abs_tol) are dropped.
/// Throws ValidationError for non-square, non-finite or asymmetric input.
PseudoInverse regularized_inverse(const Matrix& cov, const InverseOptions& opts = {});

struct StateFeatures {
  Vector z;
  Matrix cov;
  Matrix cov_inv;
  Matrix whitener;
  Index n_frames = 0;
  int rank = 0;

  Index dim() const { return z.size(); }
};

/// block is M x s with M >= 3. cov is the unbiased covariance of the M - 1
/// increments (mean subtracted, divisor M - 2).
StateFeatures compute_features(const Matrix& block, const InverseOptions& opts = {});

std::vector<StateFeatures> compute_all_features(const std::vector<Matrix>& blocks,
                                                const InverseOptions& opts = {});

}  // namespace statemap
