#pragma once

#include <vector>

#include "mrcp/dataio.hpp"
#include "mrcp/numerics.hpp"

namespace mrcp {

struct BandSpec {
  double low_hz = 0.5;
  double high_hz = 10.0;
  int index = 10;  ///< 1-based position in the bank
};

/// Transposed direct form II second-order section, a0 == 1.
struct Biquad {
  double b0, b1, b2, a1, a2;
};

/// Butterworth band-pass as a cascade of biquads, applied forward-backward.
class BandpassFilter {
 public:
  BandpassFilter(BandSpec band, double fs, int prototype_order = 4);

  const BandSpec& band() const { return band_; }
  double sampling_rate() const { return fs_; }
  const std::vector<Biquad>& sections() const { return sections_; }
  /// Band-pass order (twice the prototype order).
  int order() const { return 2 * static_cast<int>(sections_.size()); }
  /// Samples of odd-symmetric extension added at each end before filtering.
  long padding() const { return 3L * order(); }

  /// Zero-phase filtering of each row of `data`.
  Matrix apply_zero_phase(const Matrix& data) const;
  std::vector<double> apply_zero_phase(const std::vector<double>& series) const;

  /// Single causal pass; exposed for the frequency-response tests.
  std::vector<double> apply_causal(const std::vector<double>& series) const;

 private:
  BandSpec band_;
  double fs_;
  std::vector<Biquad> sections_;
};

inline constexpr int kNumBanks = 10;
inline constexpr double kBankLowHz = 0.5;

/// The ten (0.5, h) Hz bands, h = 1..10.
class FilterBankSet {
 public:
  explicit FilterBankSet(std::vector<BandpassFilter> filters) : filters_(std::move(filters)) {}
  const std::vector<BandpassFilter>& filters() const { return filters_; }
  std::size_t size() const { return filters_.size(); }
  const BandpassFilter& operator[](std::size_t i) const { return filters_[i]; }

 private:
  std::vector<BandpassFilter> filters_;
};

/// Throws ConfigError when fs <= 20 Hz.
FilterBankSet make_filter_banks(double fs);

/// The single (0.5, 10) Hz band used by the non-filter-bank variants.
BandpassFilter make_broad_band(double fs);

/// Throws DataError when the trial is not longer than the filter's edge padding.
EegTrial apply_zero_phase(const EegTrial& trial, const BandpassFilter& filter);

}  // namespace mrcp
