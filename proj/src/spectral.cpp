#include "statemap/spectral.hpp"

#include "statemap/stats.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace statemap {

std::string KernelScale::describe() const {
  switch (rule) {
    case Rule::Median: return "median";
    case Rule::Mean: return "mean";
    case Rule::Fixed: {
      std::ostringstream os;
      os << value;
      return os.str();
    }
  }
  return "median";
}

namespace {

std::vector<double> upper_triangle(const Matrix& d) {
  std::vector<double> v;
  const Index n = d.rows();
  v.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index i = 0; i < n; ++i) {
    for (Index l = i + 1; l < n; ++l) v.push_back(d(i, l));
  }
  return v;
}

}  // namespace

double median_offdiagonal(const Matrix& d) {
  if (d.rows() < 2) throw ValidationError("kernel scale: need at least 2 states");
  return median(upper_triangle(d));
}

double mean_offdiagonal(const Matrix& d) {
  if (d.rows() < 2) throw ValidationError("kernel scale: need at least 2 states");
  const auto v = upper_triangle(d);
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

Affinity build_affinity(const DistanceMatrix& d, std::optional<double> scale) {
  const Index n = d.size();
  if (n < 2 || d.d.cols() != n) throw ValidationError("build_affinity: need a square matrix with N >= 2");
  if (!d.d.allFinite()) throw ValidationError("build_affinity: non-finite distances");
  double eps = 0.0;
  if (scale) {
    eps = *scale;
    if (!(eps > 0.0) || !std::isfinite(eps)) {
      throw ValidationError("build_affinity: kernel scale must be finite and > 0");
    }
  } else {
    eps = median_offdiagonal(d.d);
    if (!(eps > 0.0)) {
      throw NumericalError(
          "build_affinity: median pairwise distance is 0, kernel scale is degenerate");
    }
  }
  Affinity a;
  a.scale = eps;
  a.w = (-d.d.array() / eps).exp().matrix();
  a.w.diagonal().setOnes();
  return a;
}

Affinity build_affinity(const DistanceMatrix& d, const KernelScale& rule) {
  switch (rule.rule) {
    case KernelScale::Rule::Median:
      return build_affinity(d, std::nullopt);
    case KernelScale::Rule::Mean: {
      const double m = mean_offdiagonal(d.d);
      if (!(m > 0.0)) {
        throw NumericalError("build_affinity: mean pairwise distance is 0, kernel scale is degenerate");
      }
      return build_affinity(d, m);
    }
    case KernelScale::Rule::Fixed:
      return build_affinity(d, rule.value);
  }
  return build_affinity(d, std::nullopt);
}

DiffusionOperator normalize(const Matrix& w, double kernel_scale) {
  if (w.rows() != w.cols() || w.rows() < 1) throw ValidationError("normalize: W must be square");
  if ((w.array() < 0.0).any()) throw ValidationError("normalize: W has negative entries");
  DiffusionOperator op;
  op.w = w;
  op.row_sums = w.rowwise().sum();
  for (Index i = 0; i < op.row_sums.size(); ++i) {
    if (!(op.row_sums(i) > 0.0)) {
      std::ostringstream os;
      os << "normalize: row " << i << " of W sums to zero";
      throw NumericalError(os.str());
    }
  }
  op.k = op.row_sums.cwiseInverse().asDiagonal() * w;
  op.kernel_scale = kernel_scale;
  op.kind = OperatorKind::Plain;
  return op;
}

DiffusionOperator normalize(const Affinity& affinity) {
  return normalize(affinity.w, affinity.scale);
}

DiffusionOperator build_temporal_kernel(const Vector& edt, std::optional<double> scale_s) {
  const Index n = edt.size();
  if (n < 2) throw ValidationError("temporal kernel: need at least 2 states");
  if (!edt.allFinite()) throw ValidationError("temporal kernel: non-finite EDT");
  const bool inc = edt(1) > edt(0);
  std::vector<double> gaps2;
  for (Index i = 1; i < n; ++i) {
    const double g = edt(i) - edt(i - 1);
    if (inc ? !(g > 0.0) : !(g < 0.0)) {
      std::ostringstream os;
      os << "temporal kernel: EDT is not strictly monotone at index " << i;
      throw ValidationError(os.str());
    }
    gaps2.push_back(g * g);
  }
  double eps = 0.0;
  if (scale_s) {
    eps = *scale_s;
    if (!(eps > 0.0) || !std::isfinite(eps)) {
      throw ValidationError("temporal kernel: scale must be finite and > 0");
    }
  } else {
    eps = 2.0 * median(gaps2);
  }
  Matrix w(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const double g = edt(i) - edt(j);
      w(i, j) = std::exp(-g * g / eps);
    }
  }
  return normalize(w, eps);
}

DiffusionOperator combine(const DiffusionOperator& k, const DiffusionOperator& ks) {
  if (k.size() != ks.size()) throw ValidationError("combine: operator sizes differ");
  DiffusionOperator out;
  out.w = k.w;
  out.k = k.k + ks.k;
  out.row_sums = out.k.rowwise().sum();
  out.kernel_scale = k.kernel_scale;
  out.kind = OperatorKind::Temporal;
  return out;
}

Embedding eigen_embed(const DiffusionOperator& op, int p, const EigenOptions& opts) {
  const Index n = op.size();
  if (p < 1 || p >= n) {
    std::ostringstream os;
    os << "eigen_embed: need 1 <= p < N (p = " << p << ", N = " << n << ")";
    throw ValidationError(os.str());
  }
  if (!op.k.allFinite()) throw NumericalError("eigen_embed: operator has non-finite entries");

  Eigen::EigenSolver<Matrix> es(op.k, true);
  if (es.info() != Eigen::Success) throw NumericalError("eigen_embed: eigensolver did not converge");
  const Eigen::VectorXcd lambda = es.eigenvalues();
  const Eigen::MatrixXcd vecs = es.eigenvectors();

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return lambda(a).real() > lambda(b).real();
  });

  Embedding emb;
  emb.spectrum.resize(n);
  for (Index r = 0; r < n; ++r) emb.spectrum(r) = lambda(order[static_cast<std::size_t>(r)]).real();
  emb.eigvals = emb.spectrum.head(p + 1);
  emb.coords.resize(n, p);

  for (Index r = 0; r <= p; ++r) {
    const Index idx = order[static_cast<std::size_t>(r)];
    if (std::abs(lambda(idx).imag()) >= opts.imag_tol) {
      std::ostringstream os;
      os << "eigen_embed: eigenvalue " << r << " is complex (imaginary part "
         << lambda(idx).imag() << ")";
      throw NumericalError(os.str());
    }
    Eigen::VectorXcd v = vecs.col(idx);
    const double vn = v.norm();
    if (!(vn > 0.0)) throw NumericalError("eigen_embed: zero eigenvector");
    v /= vn;
    // Rotate the phase so the largest entry is real before dropping the imaginary part.
    Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    v *= std::conj(v(arg)) / std::abs(v(arg));
    if (v.imag().norm() >= opts.imag_tol) {
      std::ostringstream os;
      os << "eigen_embed: eigenvector " << r << " is complex";
      throw NumericalError(os.str());
    }
    Vector re = v.real();
    re /= re.norm();
    Index big = 0;
    re.cwiseAbs().maxCoeff(&big);
    if (re(big) < 0.0) re = -re;
    if (r == 0) {
      emb.psi0 = re;
    } else {
      emb.coords.col(r - 1) = re;
    }
  }

  const double mean0 = emb.psi0.mean();
  const double spread0 = emb.psi0.maxCoeff() - emb.psi0.minCoeff();
  emb.trivial_checked = std::abs(emb.eigvals(0) - 1.0) < opts.trivial_eig_tol &&
                        spread0 <= opts.trivial_vec_tol * std::abs(mean0);
  if (p + 1 < n) emb.degenerate_gap = emb.spectrum(p) - emb.spectrum(p + 1) < opts.gap_tol;
  return emb;
}

}  // namespace statemap
