#pragma once

// Border errors as a percentage of the size of the region they delimit.

#include "statemap/detect.hpp"

namespace statemap {

struct GroundTruth {
  Index entry_idx = 0;
  Index dlor_exit_idx = 0;
  Index exit_idx = 0;
  Vector edt;

  /// |EDT(exit) - EDT(entry)|
  double stn_size() const;
  /// |EDT(dlor_exit) - EDT(entry)|
  double dlor_size() const;
  /// entry < dlor_exit <= exit, indices inside EDT, both region sizes > 0.
  void validate() const;
};

struct ErrorReport {
  double stn_entry_err = 0.0;
  double stn_exit_err = 0.0;
  double stn_overall_err = 0.0;
  double dlor_entry_err = 0.0;
  double dlor_exit_err = 0.0;
  double dlor_overall_err = 0.0;
  bool failed_dlor = false;
};

/// err = 100 * |EDT(detected) - EDT(true)| / region size; overall = entry + exit.
/// A failed sub-region detection scores a 100% DLOR exit error.
ErrorReport score(const BorderDetection& borders, const SubRegionDetection& sub,
                  const GroundTruth& truth);

/// Same, from detected indices directly; dlor_exit_idx < 0 marks a failure.
ErrorReport score_indices(Index entry_idx, Index exit_idx, Index dlor_exit_idx,
                          const GroundTruth& truth);

}  // namespace statemap
