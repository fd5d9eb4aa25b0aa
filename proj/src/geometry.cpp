#include "statemap/geometry.hpp"

#include <sstream>

namespace statemap {

std::string to_string(Metric m) {
  return m == Metric::Euclidean ? "euclidean" : "mahalanobis";
}

Metric metric_from_string(const std::string& name) {
  if (name == "mahalanobis" || name == "modified_mahalanobis") return Metric::ModifiedMahalanobis;
  if (name == "euclidean") return Metric::Euclidean;
  throw ValidationError("unknown metric '" + name + "' (expected mahalanobis or euclidean)");
}

namespace {

void check_dims(const StateFeatures& a, const StateFeatures& b) {
  if (a.dim() != b.dim()) {
    std::ostringstream os;
    os << "distance: feature dimensions differ (" << a.dim() << " vs " << b.dim() << ")";
    throw ValidationError(os.str());
  }
}

}  // namespace

double mahalanobis_pair(const StateFeatures& a, const StateFeatures& b) {
  check_dims(a, b);
  const Vector dz = a.z - b.z;
  double qa = 0.0;
  double qb = 0.0;
  if (a.whitener.cols() > 0) qa = (a.whitener.transpose() * dz).squaredNorm();
  if (b.whitener.cols() > 0) qb = (b.whitener.transpose() * dz).squaredNorm();
  return 0.5 * (qa + qb);
}

double euclidean_pair(const StateFeatures& a, const StateFeatures& b) {
  check_dims(a, b);
  return (a.z - b.z).squaredNorm();
}

DistanceMatrix pairwise_distances(const std::vector<StateFeatures>& features, Metric kind) {
  const auto n = static_cast<Index>(features.size());
  if (n < 2) throw ValidationError("pairwise_distances: need at least 2 states");
  const Index s = features.front().dim();
  for (Index i = 0; i < n; ++i) {
    if (features[static_cast<std::size_t>(i)].dim() != s) {
      std::ostringstream os;
      os << "pairwise_distances: state " << i << " has dimension "
         << features[static_cast<std::size_t>(i)].dim() << ", expected " << s;
      throw ValidationError(os.str());
    }
  }

  DistanceMatrix out;
  out.kind = kind;
  out.d = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index l = i + 1; l < n; ++l) {
      const auto& a = features[static_cast<std::size_t>(i)];
      const auto& b = features[static_cast<std::size_t>(l)];
      const double v = kind == Metric::Euclidean ? euclidean_pair(a, b) : mahalanobis_pair(a, b);
      out.d(i, l) = v;
      out.d(l, i) = v;
    }
  }
  return out;
}

}  // namespace statemap
