#pragma once

#include "statemap/common.hpp"

#include <vector>

namespace statemap {

/// Median of a non-empty sample (mean of the two middle values for even sizes).
double median(std::vector<double> values);

double pearson(const Vector& a, const Vector& b);

/// Pearson correlation of average ranks.
double spearman(const Vector& a, const Vector& b);

/// Average ranks (1-based), ties share the mean rank.
Vector ranks(const Vector& v);

}  // namespace statemap
