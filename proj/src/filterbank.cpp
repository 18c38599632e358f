#include "mrcp/filterbank.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "mrcp/errors.hpp"

namespace mrcp {

namespace {

using cplx = std::complex<double>;

void run_sections(const std::vector<Biquad>& sections, std::vector<double>& x) {
  if (x.empty()) return;
  // Steady-state initial conditions for a step of height x[0] through the cascade.
  double scale = x[0];
  for (const auto& s : sections) {
    const double dc = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    double z2 = (s.b2 - s.a2 * dc) * scale;
    double z1 = (s.b1 + s.b2 - (s.a1 + s.a2) * dc) * scale;
    for (double& v : x) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
    scale *= dc;
  }
}

}  // namespace

BandpassFilter::BandpassFilter(BandSpec band, double fs, int prototype_order)
    : band_(band), fs_(fs) {
  if (!(band.low_hz > 0.0) || !(band.high_hz > band.low_hz) || !(band.high_hz < fs / 2.0)) {
    throw ConfigError("band (" + std::to_string(band.low_hz) + ", " + std::to_string(band.high_hz) +
                      ") Hz invalid at fs " + std::to_string(fs) + " Hz");
  }
  if (prototype_order < 1 || prototype_order % 2 != 0) {
    throw ConfigError("prototype order must be a positive even number");
  }
  const double pi = std::numbers::pi;
  const double two_fs = 2.0 * fs;
  const double wl = two_fs * std::tan(pi * band.low_hz / fs);
  const double wh = two_fs * std::tan(pi * band.high_hz / fs);
  const double w0 = std::sqrt(wl * wh);
  const double bw = wh - wl;

  // Analog low-pass prototype -> band-pass -> bilinear transform. Only the
  // upper-half-plane poles are kept; each one and its conjugate form a section.
  std::vector<cplx> zpoles;
  for (int m = 0; m < prototype_order; ++m) {
    const cplx p = std::polar(1.0, pi * (2.0 * m + prototype_order + 1) / (2.0 * prototype_order));
    const cplx disc = std::sqrt(p * p * bw * bw - 4.0 * w0 * w0);
    for (const cplx s : {(p * bw + disc) / 2.0, (p * bw - disc) / 2.0}) {
      const cplx z = (two_fs + s) / (two_fs - s);
      if (z.imag() > 0.0) zpoles.push_back(z);
    }
  }
  std::sort(zpoles.begin(), zpoles.end(), [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });

  // Zeros: half at z = 1 (DC), half at z = -1 (Nyquist); one of each per section.
  const double omega0 = 2.0 * std::atan(w0 / two_fs);
  const cplx ejw = std::polar(1.0, omega0);
  cplx response = 1.0;
  for (const cplx z : zpoles) {
    Biquad s{1.0, 0.0, -1.0, -2.0 * z.real(), std::norm(z)};
    response *= (s.b0 + s.b1 / ejw + s.b2 / (ejw * ejw)) / (1.0 + s.a1 / ejw + s.a2 / (ejw * ejw));
    sections_.push_back(s);
  }
  const double gain = std::pow(1.0 / std::abs(response), 1.0 / static_cast<double>(sections_.size()));
  for (auto& s : sections_) {
    s.b0 *= gain;
    s.b1 *= gain;
    s.b2 *= gain;
  }
}

std::vector<double> BandpassFilter::apply_causal(const std::vector<double>& series) const {
  std::vector<double> out = series;
  run_sections(sections_, out);
  return out;
}

std::vector<double> BandpassFilter::apply_zero_phase(const std::vector<double>& x) const {
  const long n = static_cast<long>(x.size());
  const long pad = padding();
  if (n <= pad) {
    throw DataError("series of " + std::to_string(n) + " samples too short for edge padding of " +
                    std::to_string(pad));
  }
  std::vector<double> ext(static_cast<std::size_t>(n + 2 * pad));
  for (long i = 0; i < pad; ++i) ext[static_cast<std::size_t>(i)] = 2.0 * x[0] - x[static_cast<std::size_t>(pad - i)];
  std::copy(x.begin(), x.end(), ext.begin() + pad);
  for (long i = 0; i < pad; ++i) {
    ext[static_cast<std::size_t>(n + pad + i)] = 2.0 * x[static_cast<std::size_t>(n - 1)] - x[static_cast<std::size_t>(n - 2 - i)];
  }
  run_sections(sections_, ext);
  std::reverse(ext.begin(), ext.end());
  run_sections(sections_, ext);
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + pad, ext.begin() + pad + n};
}

Matrix BandpassFilter::apply_zero_phase(const Matrix& data) const {
  Matrix out(data.rows(), data.cols());
  std::vector<double> row(static_cast<std::size_t>(data.cols()));
  for (Eigen::Index c = 0; c < data.rows(); ++c) {
    for (Eigen::Index t = 0; t < data.cols(); ++t) row[static_cast<std::size_t>(t)] = data(c, t);
    const auto filtered = apply_zero_phase(row);
    for (Eigen::Index t = 0; t < data.cols(); ++t) out(c, t) = filtered[static_cast<std::size_t>(t)];
  }
  return out;
}

FilterBankSet make_filter_banks(double fs) {
  if (!(fs > 20.0)) {
    throw ConfigError("sampling rate " + std::to_string(fs) + " Hz too low for a 10 Hz band edge");
  }
  std::vector<BandpassFilter> filters;
  for (int h = 1; h <= kNumBanks; ++h) {
    filters.emplace_back(BandSpec{kBankLowHz, static_cast<double>(h), h}, fs);
  }
  return FilterBankSet(std::move(filters));
}

BandpassFilter make_broad_band(double fs) {
  if (!(fs > 20.0)) {
    throw ConfigError("sampling rate " + std::to_string(fs) + " Hz too low for a 10 Hz band edge");
  }
  return BandpassFilter(BandSpec{kBankLowHz, 10.0, kNumBanks}, fs);
}

EegTrial apply_zero_phase(const EegTrial& trial, const BandpassFilter& filter) {
  EegTrial out = trial;
  out.data = filter.apply_zero_phase(trial.data);
  return out;
}

}  // namespace mrcp
