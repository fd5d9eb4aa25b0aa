#include "statemap/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace statemap {

double median(std::vector<double> values) {
  if (values.empty()) throw ValidationError("median of an empty sample");
  const auto n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  const double hi = *mid;
  if (n % 2 == 1) return hi;
  const double lo = *std::max_element(values.begin(), mid);
  return 0.5 * (lo + hi);
}

double pearson(const Vector& a, const Vector& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw ValidationError("pearson: need two samples of equal length >= 2");
  }
  const Vector ca = a.array() - a.mean();
  const Vector cb = b.array() - b.mean();
  const double den = ca.norm() * cb.norm();
  if (!(den > 0.0)) return 0.0;
  return ca.dot(cb) / den;
}

Vector ranks(const Vector& v) {
  const Index n = v.size();
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return v(a) < v(b); });
  Vector r(n);
  Index i = 0;
  while (i < n) {
    Index j = i;
    while (j + 1 < n && v(idx[static_cast<std::size_t>(j + 1)]) == v(idx[static_cast<std::size_t>(i)])) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Index k = i; k <= j; ++k) r(idx[static_cast<std::size_t>(k)]) = avg;
    i = j + 1;
  }
  return r;
}

double spearman(const Vector& a, const Vector& b) {
  return pearson(ranks(a), ranks(b));
}

}  // namespace statemap
