#include "statemap/preprocess.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace statemap {

void FrameFeatureSpec::validate() const {
  if (hop <= 0 || window_len <= hop) {
    std::ostringstream os;
    os << "frame spec: need window_len > hop > 0 (got window_len=" << window_len
       << ", hop=" << hop << ")";
    throw ValidationError(os.str());
  }
  if (n_bands < 2) throw ValidationError("frame spec: n_bands must be >= 2");
}

Index frame_count(Index len, const FrameFeatureSpec& spec) {
  if (len < spec.window_len) return 0;
  return (len - spec.window_len) / spec.hop + 1;
}

namespace {

void check_series(const Vector& series, const FrameFeatureSpec& spec, const char* who) {
  spec.validate();
  if (series.size() < spec.window_len) {
    std::ostringstream os;
    os << who << ": series of length " << series.size() << " is shorter than window_len "
       << spec.window_len;
    throw ValidationError(os.str());
  }
  if (!series.allFinite()) {
    std::ostringstream os;
    os << who << ": series contains non-finite samples";
    throw ValidationError(os.str());
  }
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

Matrix spectrogram(const Vector& series, const FrameFeatureSpec& spec) {
  check_series(series, spec, "spectrogram");
  const Index m = frame_count(series.size(), spec);
  const Index w = spec.window_len;
  const Index bins = w / 2 + 1;

  Eigen::FFT<double> fft;
  std::vector<double> frame(static_cast<std::size_t>(w));
  std::vector<std::complex<double>> spec_out;
  Matrix out(m, bins);
  for (Index j = 0; j < m; ++j) {
    const Index start = j * spec.hop;
    for (Index n = 0; n < w; ++n) frame[static_cast<std::size_t>(n)] = series(start + n);
    fft.fwd(spec_out, frame);
    for (Index k = 0; k < bins; ++k) {
      const double mag = std::abs(spec_out[static_cast<std::size_t>(k)]);
      out(j, k) = spec.log_compress ? std::log1p(mag) : mag;
    }
  }
  return out;
}

std::vector<BandFilter> scattering_bank(int n_bands) {
  if (n_bands < 1) throw ValidationError("scattering bank: n_bands must be >= 1");
  std::vector<BandFilter> bank;
  bank.reserve(static_cast<std::size_t>(n_bands));
  for (int k = 0; k < n_bands; ++k) {
    BandFilter f;
    f.center = 0.4 * std::pow(2.0, -k);
    f.bandwidth = f.center / 4.0;
    const double sigma_t = 1.0 / (2.0 * std::numbers::pi * f.bandwidth);
    f.half_len = static_cast<int>(std::ceil(4.0 * sigma_t));
    f.taps.resize(static_cast<std::size_t>(2 * f.half_len + 1));
    double total = 0.0;
    for (int n = -f.half_len; n <= f.half_len; ++n) {
      total += std::exp(-0.5 * (n / sigma_t) * (n / sigma_t));
    }
    for (int n = -f.half_len; n <= f.half_len; ++n) {
      const double env = std::exp(-0.5 * (n / sigma_t) * (n / sigma_t)) / total;
      const double phase = 2.0 * std::numbers::pi * f.center * n;
      f.taps[static_cast<std::size_t>(n + f.half_len)] = std::polar(env, phase);
    }
    bank.push_back(std::move(f));
  }
  return bank;
}

std::complex<double> filter_response(const BandFilter& filter, double f) {
  std::complex<double> acc(0.0, 0.0);
  for (int n = -filter.half_len; n <= filter.half_len; ++n) {
    acc += filter.taps[static_cast<std::size_t>(n + filter.half_len)] *
           std::polar(1.0, -2.0 * std::numbers::pi * f * n);
  }
  return acc;
}

Matrix scattering_order1(const Vector& series, const FrameFeatureSpec& spec) {
  check_series(series, spec, "scattering_order1");
  const Index m = frame_count(series.size(), spec);
  const Index w = spec.window_len;
  const auto bank = scattering_bank(spec.n_bands);

  int max_half = 0;
  for (const auto& f : bank) max_half = std::max(max_half, f.half_len);
  const std::size_t nfft = next_pow2(static_cast<std::size_t>(w + 2 * max_half + 1));

  Eigen::FFT<double> fft;
  // Filter spectra, taps placed so that tap index p corresponds to lag p - half_len.
  std::vector<std::vector<std::complex<double>>> filter_fft;
  for (const auto& f : bank) {
    std::vector<std::complex<double>> padded(nfft, {0.0, 0.0});
    std::copy(f.taps.begin(), f.taps.end(), padded.begin());
    std::vector<std::complex<double>> freq;
    fft.fwd(freq, padded);
    filter_fft.push_back(std::move(freq));
  }

  std::vector<std::complex<double>> frame(nfft);
  std::vector<std::complex<double>> frame_fft;
  std::vector<std::complex<double>> prod(nfft);
  std::vector<std::complex<double>> conv;
  Matrix out(m, spec.n_bands);
  for (Index j = 0; j < m; ++j) {
    const Index start = j * spec.hop;
    std::fill(frame.begin(), frame.end(), std::complex<double>(0.0, 0.0));
    for (Index n = 0; n < w; ++n) frame[static_cast<std::size_t>(n)] = series(start + n);
    fft.fwd(frame_fft, frame);
    for (std::size_t b = 0; b < bank.size(); ++b) {
      for (std::size_t q = 0; q < nfft; ++q) prod[q] = frame_fft[q] * filter_fft[b][q];
      fft.inv(conv, prod);
      const auto h = static_cast<std::size_t>(bank[b].half_len);
      double acc = 0.0;
      for (Index n = 0; n < w; ++n) acc += std::abs(conv[static_cast<std::size_t>(n) + h]);
      const double mean = acc / static_cast<double>(w);
      out(j, static_cast<Index>(b)) = spec.log_compress ? std::log1p(mean) : mean;
    }
  }
  return out;
}

Matrix frame_features(const Vector& series, const FrameFeatureSpec& spec) {
  switch (spec.kind) {
    case FrameFeatureSpec::Kind::Spectrogram:
      return spectrogram(series, spec);
    case FrameFeatureSpec::Kind::ScatteringOrder1:
      return scattering_order1(series, spec);
  }
  throw ValidationError("frame_features: unknown kind");
}

}  // namespace statemap
