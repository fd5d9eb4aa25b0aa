#include "statemap/detect.hpp"

#include "statemap/stats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace statemap {

void TransitionOptions::validate() const {
  if (ma_window < 1 || ma_window % 2 == 0) {
    throw ValidationError("transition options: ma_window must be a positive odd integer");
  }
  if (median_window < 1) throw ValidationError("transition options: median_window must be >= 1");
}

Vector moving_average(const Vector& x, int window) {
  if (window < 1 || window % 2 == 0) throw ValidationError("moving_average: window must be odd");
  const Index n = x.size();
  const Index half = window / 2;
  Vector out(n);
  for (Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (Index k = i - half; k <= i + half; ++k) {
      acc += x(std::clamp<Index>(k, 0, n - 1));
    }
    out(i) = acc / window;
  }
  return out;
}

Vector transition_signal(const Vector& psi1, const TransitionOptions& opts) {
  opts.validate();
  const Index n = psi1.size();
  if (n < opts.min_length()) {
    std::ostringstream os;
    os << "transition_signal: need at least " << opts.min_length() << " states, got " << n;
    throw ValidationError(os.str());
  }
  const Index m = opts.median_window;
  const Vector ma = moving_average(psi1, opts.ma_window);
  Vector out(n);
  std::vector<double> win(static_cast<std::size_t>(m));
  for (Index i = m; i <= n - m; ++i) {
    for (Index k = 0; k < m; ++k) win[static_cast<std::size_t>(k)] = ma(i + k);
    const double right = median(win);
    for (Index k = 0; k < m; ++k) win[static_cast<std::size_t>(k)] = ma(i - m + k);
    const double left = median(win);
    out(i) = right - left;
  }
  for (Index i = 0; i < m; ++i) out(i) = out(m);
  for (Index i = n - m + 1; i < n; ++i) out(i) = out(n - m);
  return out;
}

SignCorrection sign_correct(const Vector& psi1, const TransitionOptions& opts) {
  const Vector t = transition_signal(psi1, opts);
  const Index n = t.size();
  const double hi = t.tail(n - 1).maxCoeff();
  const double lo = t.tail(n - 1).minCoeff();
  SignCorrection out;
  out.delta = std::abs(hi - t(0)) - std::abs(lo - t(0));
  out.tie = out.delta == 0.0;
  out.flipped = out.delta < 0.0;
  out.psi1 = out.flipped ? Vector(-psi1) : psi1;
  return out;
}

BorderDetection detect_borders(const Vector& psi1, const Vector& edt,
                               const TransitionOptions& opts) {
  if (psi1.size() != edt.size()) {
    std::ostringstream os;
    os << "detect_borders: psi1 has " << psi1.size() << " entries but EDT has " << edt.size();
    throw ValidationError(os.str());
  }
  const SignCorrection sc = sign_correct(psi1, opts);
  BorderDetection b;
  b.psi1 = sc.psi1;
  b.sign_flipped = sc.flipped;
  b.sign_tie = sc.tie;
  b.psi1_smoothed = transition_signal(b.psi1, opts);

  const Index n = b.psi1.size();
  b.psi1_smoothed.maxCoeff(&b.i_en);  // Eigen returns the first maximizer
  b.i_ex = n - 1;
  b.no_exit = true;
  for (Index i = b.i_en + 1; i < n; ++i) {
    if (b.psi1(i) <= b.psi1(b.i_en)) {
      b.i_ex = i;
      b.no_exit = false;
      break;
    }
  }
  b.edt_en = edt(b.i_en);
  b.edt_ex = edt(b.i_ex);
  return b;
}

KMeansResult lloyd_kmeans(const Matrix& points, const Matrix& init, int max_iter, double tol) {
  if (points.cols() != init.cols()) throw ValidationError("lloyd_kmeans: dimension mismatch");
  if (init.rows() < 1) throw ValidationError("lloyd_kmeans: need at least one centroid");
  if (max_iter < 1) throw ValidationError("lloyd_kmeans: max_iter must be >= 1");
  const Index n = points.rows();
  const Index k = init.rows();

  KMeansResult r;
  r.centroids = init;
  r.labels.assign(static_cast<std::size_t>(n), 0);
  for (int it = 0; it < max_iter; ++it) {
    r.iterations = it + 1;
    for (Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = (points.row(i) - r.centroids.row(0)).squaredNorm();
      for (Index c = 1; c < k; ++c) {
        const double d = (points.row(i) - r.centroids.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      r.labels[static_cast<std::size_t>(i)] = best;
    }
    Matrix next = Matrix::Zero(k, points.cols());
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < n; ++i) {
      const int c = r.labels[static_cast<std::size_t>(i)];
      next.row(c) += points.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (Index c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] == 0) {
        r.empty_cluster = true;
        return r;
      }
      next.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
    }
    double shift = 0.0;
    for (Index c = 0; c < k; ++c) shift = std::max(shift, (next.row(c) - r.centroids.row(c)).norm());
    r.centroids = next;
    if (shift < tol) {
      r.converged = true;
      break;
    }
  }
  return r;
}

namespace {

double sample_std(const Vector& v) {
  // exact zero for constant input; the mean can round off the common value
  if (v.size() < 2 || v.maxCoeff() == v.minCoeff()) return 0.0;
  const Vector c = v.array() - v.mean();
  return std::sqrt(c.squaredNorm() / static_cast<double>(v.size() - 1));
}

}  // namespace

SubRegionDetection detect_subregion(const Vector& psi2, const Vector& psi3, const Vector& edt,
                                    const BorderDetection& borders,
                                    const SubRegionOptions& opts) {
  const Index n = edt.size();
  if (psi2.size() != n || psi3.size() != n) {
    throw ValidationError("detect_subregion: psi2, psi3 and EDT lengths differ");
  }
  const Index a = borders.i_en;
  const Index b = borders.i_ex;
  if (a < 0 || b >= n || a >= b) throw ValidationError("detect_subregion: invalid border indices");
  const Index len = b - a + 1;
  if (len < 4) {
    std::ostringstream os;
    os << "detect_subregion: need at least 4 states between entry and exit, got " << len;
    throw ValidationError(os.str());
  }

  SubRegionDetection out;
  out.range_begin = a;
  const Vector p2 = psi2.segment(a, len);
  const Vector p3 = psi3.segment(a, len);
  const Vector e = edt.segment(a, len);
  const double target = 0.5 * (sample_std(p2) + sample_std(p3));
  const double e_std = sample_std(e);
  const Vector e_scaled = e_std > 0.0 ? Vector((e.array() - e.mean()) * (target / e_std))
                                      : Vector(Vector::Zero(len));

  out.rep.resize(len, 3);
  out.rep.col(0) = p2;
  out.rep.col(1) = p3;
  out.rep.col(2) = e_scaled;

  Matrix init(2, 3);
  init.row(0) = out.rep.row(0);
  init.row(1) = out.rep.row(len - 1);
  const KMeansResult km = lloyd_kmeans(out.rep, init, opts.max_iter, opts.tol);
  if (km.empty_cluster) {
    out.failure_reason = "empty cluster";
    return out;
  }
  const int entry_cluster = km.labels.front();
  const int exit_cluster = km.labels.back();
  if (entry_cluster == exit_cluster) {
    out.failure_reason = "entry and exit fall in the same cluster";
    return out;
  }
  out.cluster_labels.resize(static_cast<std::size_t>(len));
  for (Index i = 0; i < len; ++i) {
    out.cluster_labels[static_cast<std::size_t>(i)] =
        km.labels[static_cast<std::size_t>(i)] == entry_cluster ? 0 : 1;
  }
  for (Index i = 0; i < len; ++i) {
    if (out.cluster_labels[static_cast<std::size_t>(i)] == 1) {
      out.i_d = a + i;
      break;
    }
  }
  out.edt_d = edt(out.i_d);
  out.success = true;
  return out;
}

}  // namespace statemap
