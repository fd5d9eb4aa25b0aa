#pragma once

#include "statemap/features.hpp"

#include <string>
#include <vector>

namespace statemap {

enum class Metric { ModifiedMahalanobis, Euclidean };

std::string to_string(Metric m);
/// Accepts "mahalanobis" / "modified_mahalanobis" and "euclidean".
Metric metric_from_string(const std::string& name);

struct DistanceMatrix {
  Matrix d;
  Metric kind = Metric::ModifiedMahalanobis;

  Index size() const { return d.rows(); }
};

/// 0.5 * dz^T (C_a^+ + C_b^+) dz, evaluated through the whiteners so the
/// result is a sum of squares.
double mahalanobis_pair(const StateFeatures& a, const StateFeatures& b);

/// ||z_a - z_b||^2.
double euclidean_pair(const StateFeatures& a, const StateFeatures& b);

/// Symmetric, zero diagonal. Needs N >= 2 and a common feature dimension.
DistanceMatrix pairwise_distances(const std::vector<StateFeatures>& features, Metric kind);

}  // namespace statemap
