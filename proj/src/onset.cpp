#include "mrcp/onset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "mrcp/errors.hpp"

namespace mrcp::onset {

namespace {

constexpr int kMaxIterations = 200;
constexpr double kMaxWidth = 100.0;
constexpr double kMaxOffset = 10.0;
constexpr double kMinAmplitude = 0.05;

std::string squash(const std::string& s) {
  std::string out;
  for (char ch : s) {
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  return out;
}

double population_variance(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return acc / static_cast<double>(v.size());
}

// Flips the series so its largest-magnitude sample is positive.
std::vector<double> orient(std::vector<double> v) {
  const auto it = std::max_element(v.begin(), v.end(),
                                   [](double a, double b) { return std::abs(a) < std::abs(b); });
  if (it != v.end() && *it < 0) {
    for (double& x : v) x = -x;
  }
  return v;
}

double sum_sq_residual(const std::vector<double>& y, const BellParams& p) {
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = p(static_cast<double>(i)) - y[i];
    acc += r * r;
  }
  return acc;
}

// Optimal (a, d) for fixed (b, c); the model is linear in them.
BellParams solve_linear_part(const std::vector<double>& y, double b, double c) {
  double s_gg = 0, s_g = 0, s_gy = 0, s_y = 0;
  const auto n = static_cast<double>(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double z = (static_cast<double>(i) - b) / c;
    const double g = std::exp(-z * z);
    s_gg += g * g;
    s_g += g;
    s_gy += g * y[i];
    s_y += y[i];
  }
  const double det = s_gg * n - s_g * s_g;
  BellParams p{0.0, b, c, s_y / n};
  if (std::abs(det) > 1e-12 * (s_gg * n + 1e-300)) {
    p.a = (s_gy * n - s_g * s_y) / det;
    p.d = (s_gg * s_y - s_g * s_gy) / det;
  }
  return p;
}

}  // namespace

Rule rule_for_class(const std::string& class_name) {
  const auto key = squash(class_name);
  if (key == "ef" || key == "ee" || key.find("elbow") != std::string::npos) return Rule::Threshold;
  if (key == "re" || key == "rest" || key == "resting" || key.find("rest") == 0) return Rule::Rest;
  return Rule::BellFit;
}

double BellParams::operator()(double x) const {
  const double z = (x - b) / c;
  return a * std::exp(-z * z) + d;
}

std::vector<double> savitzky_golay_linear(const std::vector<double>& series, int frame) {
  if (frame < 3 || frame % 2 == 0) throw std::invalid_argument("frame must be odd and >= 3");
  const auto n = static_cast<long>(series.size());
  if (n < frame) throw DataError("series shorter than smoothing frame");
  const long half = frame / 2;
  std::vector<double> out(series.size());

  // Interior: an order-1 fit evaluated at the frame centre is the frame mean.
  double window = 0.0;
  for (long i = 0; i < frame; ++i) window += series[static_cast<std::size_t>(i)];
  for (long i = half; i < n - half; ++i) {
    if (i > half) {
      window += series[static_cast<std::size_t>(i + half)] - series[static_cast<std::size_t>(i - half - 1)];
    }
    out[static_cast<std::size_t>(i)] = window / frame;
  }

  auto fit_edge = [&](long start, long first_out, long last_out) {
    double xm = 0.0, ym = 0.0;
    for (long k = 0; k < frame; ++k) {
      xm += static_cast<double>(k);
      ym += series[static_cast<std::size_t>(start + k)];
    }
    xm /= frame;
    ym /= frame;
    double sxy = 0.0, sxx = 0.0;
    for (long k = 0; k < frame; ++k) {
      const double dx = static_cast<double>(k) - xm;
      sxy += dx * (series[static_cast<std::size_t>(start + k)] - ym);
      sxx += dx * dx;
    }
    const double slope = sxy / sxx;
    for (long i = first_out; i < last_out; ++i) {
      out[static_cast<std::size_t>(i)] = ym + slope * (static_cast<double>(i - start) - xm);
    }
  };
  fit_edge(0, 0, half);
  fit_edge(n - frame, n - half, n);
  return out;
}

std::vector<double> smooth_velocity(const std::vector<double>& trajectory) {
  if (trajectory.size() < static_cast<std::size_t>(kSmoothingFrame)) {
    throw DataError("trajectory shorter than the 31-sample smoothing frame");
  }
  std::vector<double> velocity(trajectory.size());
  for (std::size_t i = 1; i < trajectory.size(); ++i) velocity[i] = trajectory[i] - trajectory[i - 1];
  velocity[0] = velocity[1];
  return savitzky_golay_linear(velocity, kSmoothingFrame);
}

std::vector<double> normalize_abs(const std::vector<double>& series) {
  double peak = 0.0;
  for (double x : series) peak = std::max(peak, std::abs(x));
  if (!(peak > 0.0)) throw DataError("cannot normalize an all-zero series");
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) out[i] = series[i] / peak;
  return out;
}

std::optional<long> locate_threshold_onset(const std::vector<double>& series, double threshold) {
  if (series.empty()) return std::nullopt;
  if (series[0] >= threshold) return 0;
  for (std::size_t i = 1; i < series.size(); ++i) {
    if (series[i] >= threshold) {
      const double frac = (threshold - series[i - 1]) / (series[i] - series[i - 1]);
      return static_cast<long>(std::floor(static_cast<double>(i - 1) + frac));
    }
  }
  return std::nullopt;
}

BellFit fit_gaussian_bell(const std::vector<double>& y) {
  const auto n = static_cast<long>(y.size());
  if (n < 8) throw std::invalid_argument("fit_gaussian_bell: need at least 8 samples");

  // Coarse grid over centre and width; amplitude and offset are solved exactly per cell.
  BellParams best;
  double best_cost = std::numeric_limits<double>::infinity();
  const long b_steps = std::min<long>(n, 64);
  for (long ib = 0; ib < b_steps; ++ib) {
    const double b = static_cast<double>(ib) * static_cast<double>(n - 1) / static_cast<double>(b_steps - 1);
    for (double c = 1.0; c <= 2.0 * static_cast<double>(n); c *= 1.25) {
      const BellParams p = solve_linear_part(y, b, c);
      const double cost = sum_sq_residual(y, p);
      if (cost < best_cost) {
        best_cost = cost;
        best = p;
      }
    }
  }

  // Damped Gauss-Newton (Levenberg-Marquardt) on all four parameters.
  BellFit fit;
  Eigen::Vector4d theta(best.a, best.b, best.c, best.d);
  double cost = best_cost;
  double lambda = 1e-3;
  Eigen::MatrixXd J(n, 4);
  Eigen::VectorXd r(n);
  for (int iter = 1; iter <= kMaxIterations; ++iter) {
    fit.iterations = iter;
    for (long i = 0; i < n; ++i) {
      const double x = static_cast<double>(i);
      const double z = (x - theta(1)) / theta(2);
      const double g = std::exp(-z * z);
      r(i) = theta(0) * g + theta(3) - y[static_cast<std::size_t>(i)];
      J(i, 0) = g;
      J(i, 1) = theta(0) * g * 2.0 * z / theta(2);
      J(i, 2) = theta(0) * g * 2.0 * z * z / theta(2);
      J(i, 3) = 1.0;
    }
    const Eigen::Matrix4d JtJ = J.transpose() * J;
    const Eigen::Vector4d grad = J.transpose() * r;
    if (grad.lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + cost)) {
      fit.converged = true;
      break;
    }

    bool improved = false;
    while (lambda < 1e12) {
      Eigen::Matrix4d A = JtJ;
      A.diagonal() += lambda * JtJ.diagonal().cwiseMax(1e-12);
      const Eigen::Vector4d step = A.ldlt().solve(-grad);
      Eigen::Vector4d cand = theta + step;
      if (std::abs(cand(2)) < 1e-6) cand(2) = std::copysign(1e-6, cand(2));
      const double cand_cost = sum_sq_residual(y, BellParams{cand(0), cand(1), cand(2), cand(3)});
      if (cand_cost < cost) {
        const double drop = cost - cand_cost;
        theta = cand;
        cost = cand_cost;
        lambda = std::max(lambda / 10.0, 1e-12);
        improved = true;
        if (drop <= 1e-12 * cost + 1e-24 || step.norm() <= 1e-10 * (theta.norm() + 1e-10)) {
          fit.converged = true;
        }
        break;
      }
      lambda *= 10.0;
    }
    // No descent direction left at any damping: a local minimum.
    if (!improved) fit.converged = true;
    if (fit.converged) break;
  }

  fit.params = BellParams{theta(0), theta(1), std::abs(theta(2)), theta(3)};
  fit.rms_residual = std::sqrt(cost / static_cast<double>(n));
  if (!std::isfinite(fit.rms_residual) || !theta.allFinite()) fit.converged = false;
  return fit;
}

OnsetDecision decide_trial(const TrajectoryRecord& traj) {
  OnsetDecision out;
  auto reject = [&out](const char* reason) {
    out.accepted = false;
    out.onset_sample.reset();
    out.reason = reason;
    return out;
  };

  const auto smoothed = smooth_velocity(traj.samples);
  const bool flat = std::all_of(smoothed.begin(), smoothed.end(), [](double v) { return v == 0.0; });
  const std::vector<double> normalized = flat ? smoothed : orient(normalize_abs(smoothed));

  long onset = 0;
  switch (traj.rule) {
    case Rule::Threshold: {
      if (flat) return reject("not-locatable");
      const auto idx = locate_threshold_onset(normalized, kThreshold);
      if (!idx) return reject("not-locatable");
      onset = *idx;
      break;
    }
    case Rule::Rest: {
      if (population_variance(normalized) < kRestMinVariance) return reject("rest-variance");
      onset = traj.cue_sample + std::lround(kRestOnsetDelaySeconds * traj.sampling_rate);
      break;
    }
    case Rule::BellFit: {
      const BellFit fit = fit_gaussian_bell(normalized);
      out.fit_params = fit.params;
      if (!fit.converged) return reject("fit-failed");
      const auto& p = fit.params;
      if (p.a < kMinAmplitude) return reject("fit-amplitude");
      if (p.c > kMaxWidth) return reject("fit-width");
      if (p.d > kMaxOffset) return reject("fit-offset");
      if (p.a <= kBellOnsetAmplitude) return reject("not-locatable");
      const double x = p.b - p.c * std::sqrt(std::log(p.a / kBellOnsetAmplitude));
      onset = static_cast<long>(std::floor(x));
      break;
    }
  }

  const long pre = std::lround(kEpochPreSeconds * traj.sampling_rate);
  const long post = std::lround(kEpochPostSeconds * traj.sampling_rate);
  if (onset - pre < 0 || onset + post > static_cast<long>(traj.samples.size())) {
    return reject("window-out-of-bounds");
  }
  out.accepted = true;
  out.onset_sample = onset;
  out.reason.reset();
  return out;
}

}  // namespace mrcp::onset
