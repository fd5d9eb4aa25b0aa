#pragma once

// Border detection along an ordered trajectory. All indices are 0-based.

#include "statemap/common.hpp"

#include <string>
#include <vector>

namespace statemap {

struct TransitionOptions {
  int ma_window = 3;      // centered moving average, odd
  int median_window = 5;  // length of each of the two median windows

  void validate() const;
  /// Shortest signal the transition transform accepts: 2 * median_window + 1.
  Index min_length() const { return 2 * static_cast<Index>(median_window) + 1; }
};

/// Centered moving average with edge replication.
Vector moving_average(const Vector& x, int window);

/// psi~(i) = median(MA[i .. i+m-1]) - median(MA[i-m .. i-1]) for i in [m, N-m],
/// edge-replicated outside that range.
Vector transition_signal(const Vector& psi1, const TransitionOptions& opts = {});

struct SignCorrection {
  Vector psi1;
  bool flipped = false;
  bool tie = false;  // delta == 0, positive sign kept
  double delta = 0.0;
};

/// delta = |max_{i>=1} psi~(i) - psi~(0)| - |min_{i>=1} psi~(i) - psi~(0)|;
/// the output is sign(delta) * psi1.
SignCorrection sign_correct(const Vector& psi1, const TransitionOptions& opts = {});

struct BorderDetection {
  Index i_en = 0;
  Index i_ex = 0;
  double edt_en = 0.0;
  double edt_ex = 0.0;
  Vector psi1;           // sign-corrected
  Vector psi1_smoothed;  // transition signal of psi1
  bool no_exit = false;  // exit rule never fired, i_ex = N - 1
  bool sign_flipped = false;
  bool sign_tie = false;
};

/// Applies sign_correct, then i_en = first argmax of the transition signal and
/// i_ex = first i > i_en with psi1(i) <= psi1(i_en).
BorderDetection detect_borders(const Vector& psi1, const Vector& edt,
                               const TransitionOptions& opts = {});

struct KMeansResult {
  std::vector<int> labels;
  Matrix centroids;
  int iterations = 0;
  bool converged = false;
  bool empty_cluster = false;
};

/// Lloyd iterations from the given initial centroids (rows). Squared Euclidean
/// distance, ties go to the lower cluster index. Stops when no centroid moves
/// by more than tol or after max_iter iterations, or when a cluster empties.
KMeansResult lloyd_kmeans(const Matrix& points, const Matrix& init, int max_iter = 100,
                          double tol = 1e-10);

struct SubRegionOptions {
  int max_iter = 100;
  double tol = 1e-10;
};

struct SubRegionDetection {
  bool success = false;
  std::string failure_reason;
  Index i_d = 0;
  double edt_d = 0.0;
  Index range_begin = 0;               // = i_en
  std::vector<int> cluster_labels;     // over [i_en, i_ex]; 0 = DLOR, 1 = VMNR
  Matrix rep;                          // rows R(i) = (psi2, psi3, scaled EDT)
};

/// psi2, psi3 come from the temporal operator's embedding. Needs at least
/// 4 states in [i_en, i_ex]; fewer throws ValidationError. An empty cluster or
/// entry and exit landing in the same cluster gives success = false.
SubRegionDetection detect_subregion(const Vector& psi2, const Vector& psi3, const Vector& edt,
                                    const BorderDetection& borders,
                                    const SubRegionOptions& opts = {});

}  // namespace statemap
