#include "statemap/metrics.hpp"

#include <cmath>
#include <sstream>

namespace statemap {

double GroundTruth::stn_size() const { return std::abs(edt(exit_idx) - edt(entry_idx)); }

double GroundTruth::dlor_size() const { return std::abs(edt(dlor_exit_idx) - edt(entry_idx)); }

void GroundTruth::validate() const {
  const Index n = edt.size();
  if (entry_idx < 0 || exit_idx >= n || !(entry_idx < dlor_exit_idx) ||
      !(dlor_exit_idx <= exit_idx)) {
    std::ostringstream os;
    os << "ground truth: need 0 <= entry < dlor_exit <= exit < N (got " << entry_idx << ", "
       << dlor_exit_idx << ", " << exit_idx << ", N = " << n << ")";
    throw ValidationError(os.str());
  }
  if (!(stn_size() > 0.0) || !(dlor_size() > 0.0)) {
    throw ValidationError("ground truth: degenerate region size");
  }
}

namespace {

void check_index(Index i, Index n, const char* what) {
  if (i < 0 || i >= n) {
    std::ostringstream os;
    os << "score: " << what << " index " << i << " outside [0, " << n << ")";
    throw ValidationError(os.str());
  }
}

}  // namespace

ErrorReport score_indices(Index entry_idx, Index exit_idx, Index dlor_exit_idx,
                          const GroundTruth& truth) {
  truth.validate();
  const Index n = truth.edt.size();
  check_index(entry_idx, n, "entry");
  check_index(exit_idx, n, "exit");
  const auto& e = truth.edt;
  const double stn = truth.stn_size();
  const double dlor = truth.dlor_size();

  ErrorReport r;
  const double entry_gap = std::abs(e(entry_idx) - e(truth.entry_idx));
  r.stn_entry_err = 100.0 * entry_gap / stn;
  r.stn_exit_err = 100.0 * std::abs(e(exit_idx) - e(truth.exit_idx)) / stn;
  r.stn_overall_err = r.stn_entry_err + r.stn_exit_err;
  r.dlor_entry_err = 100.0 * entry_gap / dlor;
  if (dlor_exit_idx < 0) {
    r.failed_dlor = true;
    r.dlor_exit_err = 100.0;
  } else {
    check_index(dlor_exit_idx, n, "dlor exit");
    r.dlor_exit_err = 100.0 * std::abs(e(dlor_exit_idx) - e(truth.dlor_exit_idx)) / dlor;
  }
  r.dlor_overall_err = r.dlor_entry_err + r.dlor_exit_err;
  return r;
}

ErrorReport score(const BorderDetection& borders, const SubRegionDetection& sub,
                  const GroundTruth& truth) {
  return score_indices(borders.i_en, borders.i_ex, sub.success ? sub.i_d : Index{-1}, truth);
}

}  // namespace statemap
