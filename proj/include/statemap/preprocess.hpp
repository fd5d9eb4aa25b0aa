#pragma once

// Frame-wise features of a scalar time series: magnitude spectrogram or a
// first-order scattering approximation (band-pass bank, modulus, averaging).

#include "statemap/common.hpp"

#include <complex>
#include <vector>

namespace statemap {

struct FrameFeatureSpec {
  enum class Kind { Spectrogram, ScatteringOrder1 };

  Kind kind = Kind::Spectrogram;
  int window_len = 1000;
  int hop = 500;
  int n_bands = 8;  // scattering only
  bool log_compress = true;

  void validate() const;
};

/// floor((len - window_len) / hop) + 1, or 0 when the series is shorter than one window.
Index frame_count(Index len, const FrameFeatureSpec& spec);

/// Rectangular-window magnitude spectrogram, M x (window_len / 2 + 1). With
/// log_compress the magnitudes are mapped through log(1 + |X|).
Matrix spectrogram(const Vector& series, const FrameFeatureSpec& spec);

/// One analytic band-pass filter of the scattering bank.
struct BandFilter {
  double center = 0.0;     // cycles per sample
  double bandwidth = 0.0;  // Gaussian std in cycles per sample
  std::vector<std::complex<double>> taps;  // centered, length 2 * half_len + 1
  int half_len = 0;
};

/// Dyadic bank: centers 0.4 * 2^-k cycles/sample for k = 0..n_bands-1, Gaussian
/// frequency std center / 4, truncated at 4 time-domain standard deviations,
/// envelope normalized to unit sum (unit gain at the center frequency).
std::vector<BandFilter> scattering_bank(int n_bands);

/// Frequency response of a filter at f cycles/sample (direct DTFT of the taps).
std::complex<double> filter_response(const BandFilter& filter, double f);

/// M x n_bands. Each frame is filtered on its own samples (zero padded),
/// so a frame depends only on its window; band value = mean modulus over the frame.
Matrix scattering_order1(const Vector& series, const FrameFeatureSpec& spec);

/// Dispatches on spec.kind.
Matrix frame_features(const Vector& series, const FrameFeatureSpec& spec);

}  // namespace statemap
