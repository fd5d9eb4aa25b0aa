#include "statemap/features.hpp"

#include <Eigen/Eigenvalues>

#include <sstream>

namespace statemap {

PseudoInverse regularized_inverse(const Matrix& cov, const InverseOptions& opts) {
  if (cov.rows() != cov.cols()) throw ValidationError("regularized_inverse: matrix is not square");
  if (!cov.allFinite()) throw ValidationError("regularized_inverse: non-finite entries");
  const Index s = cov.rows();
  PseudoInverse out;
  out.inverse = Matrix::Zero(s, s);
  out.whitener = Matrix::Zero(s, 0);
  if (s == 0) return out;

  const double scale = cov.cwiseAbs().maxCoeff();
  const double asym = (cov - cov.transpose()).cwiseAbs().maxCoeff();
  if (asym > opts.symmetry_tol * (scale > 0.0 ? scale : 1.0)) {
    std::ostringstream os;
    os << "regularized_inverse: input is not symmetric (max |A - A^T| = " << asym << ")";
    throw ValidationError(os.str());
  }
  if (scale == 0.0) return out;

  const Matrix sym = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success) throw NumericalError("regularized_inverse: eigensolver failed");
  const Vector& lambda = es.eigenvalues();
  const double lmax = lambda.maxCoeff();
  const double tau = std::max(opts.rel_tol * lmax, opts.abs_tol);

  std::vector<Index> keep;
  for (Index k = 0; k < s; ++k) {
    if (lambda(k) >= tau && lambda(k) > 0.0) keep.push_back(k);
  }
  out.rank = static_cast<int>(keep.size());
  out.whitener.resize(s, static_cast<Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    const Index k = keep[c];
    out.whitener.col(static_cast<Index>(c)) = es.eigenvectors().col(k) / std::sqrt(lambda(k));
  }
  out.inverse = out.whitener * out.whitener.transpose();
  return out;
}

StateFeatures compute_features(const Matrix& block, const InverseOptions& opts) {
  const Index m = block.rows();
  if (m < 3) {
    std::ostringstream os;
    os << "compute_features: need at least 3 frames, got " << m;
    throw ValidationError(os.str());
  }
  if (block.cols() < 1) throw ValidationError("compute_features: block has no columns");
  if (!block.allFinite()) throw ValidationError("compute_features: block contains non-finite values");

  StateFeatures f;
  f.n_frames = m;
  f.z = block.colwise().mean().transpose();

  const Matrix inc = block.bottomRows(m - 1) - block.topRows(m - 1);
  const Eigen::RowVectorXd inc_mean = inc.colwise().mean();
  const Matrix centered = inc.rowwise() - inc_mean;
  // unbiased over the m - 1 increments
  f.cov = centered.transpose() * centered / static_cast<double>(m - 2);
  f.cov = 0.5 * (f.cov + f.cov.transpose());

  PseudoInverse pinv = regularized_inverse(f.cov, opts);
  f.cov_inv = std::move(pinv.inverse);
  f.whitener = std::move(pinv.whitener);
  f.rank = pinv.rank;
  return f;
}

std::vector<StateFeatures> compute_all_features(const std::vector<Matrix>& blocks,
                                                const InverseOptions& opts) {
  std::vector<StateFeatures> out;
  out.reserve(blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    try {
      out.push_back(compute_features(blocks[i], opts));
    } catch (const ValidationError& e) {
      std::ostringstream os;
      os << "state " << i << ": " << e.what();
      throw ValidationError(os.str());
    }
  }
  return out;
}

}  // namespace statemap
