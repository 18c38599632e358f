#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace mrcp::onset {

inline constexpr int kSmoothingFrame = 31;
inline constexpr double kThreshold = 0.05;
inline constexpr double kBellOnsetAmplitude = 0.1;
inline constexpr double kRestOnsetDelaySeconds = 0.5;
inline constexpr double kRestMinVariance = 0.02;
inline constexpr double kEpochPreSeconds = 2.0;
inline constexpr double kEpochPostSeconds = 1.0;

/// How a motion class gets its onset.
enum class Rule {
  Threshold,  ///< elbow flexion / extension
  Rest,       ///< fixed fake onset after the cue
  BellFit,    ///< supination, pronation, hand open, hand close
};

/// Maps a class name onto its onset rule ("elbow_flexion", "Elbow Extension",
/// "rest", ...). Names that match nothing use the bell fit.
Rule rule_for_class(const std::string& class_name);

struct TrajectoryRecord {
  std::vector<double> samples;
  double sampling_rate = 0.0;
  Rule rule = Rule::BellFit;
  long cue_sample = 0;
};

struct BellParams {
  double a = 0.0;
  double b = 0.0;
  double c = 1.0;
  double d = 0.0;

  double operator()(double x) const;
};

struct BellFit {
  BellParams params;
  double rms_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct OnsetDecision {
  bool accepted = false;
  std::optional<long> onset_sample;
  std::optional<BellParams> fit_params;
  std::optional<std::string> reason;
};

/// First difference (first sample replicated to keep the length) followed by
/// an order-1 Savitzky-Golay smoother with a 31-sample frame. Edges use the
/// line fitted to the first/last full frame.
std::vector<double> smooth_velocity(const std::vector<double>& trajectory);

/// Order-1 Savitzky-Golay smoothing with an odd frame length.
std::vector<double> savitzky_golay_linear(const std::vector<double>& series, int frame);

/// Divides by the maximal absolute value.
std::vector<double> normalize_abs(const std::vector<double>& series);

/// First index where the series reaches `threshold`, from linear
/// interpolation between samples and rounded down. Returns nullopt when the
/// threshold is never reached.
std::optional<long> locate_threshold_onset(const std::vector<double>& series,
                                           double threshold = kThreshold);

/// Least-squares fit of a*exp(-((x-b)/c)^2)+d with x the sample index.
/// Coarse grid start, then damped Gauss-Newton capped at 200 iterations.
BellFit fit_gaussian_bell(const std::vector<double>& series);

/// Applies the per-class localization and rejection rules to one trajectory.
/// Rejection reasons: "not-locatable", "rest-variance", "fit-failed",
/// "fit-amplitude", "fit-width", "fit-offset", "window-out-of-bounds".
OnsetDecision decide_trial(const TrajectoryRecord& traj);

}  // namespace mrcp::onset
