#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mrcp/numerics.hpp"

namespace mrcp {

/// One epoch of multichannel EEG, C x T.
struct EegTrial {
  Matrix data;
  int label = 0;
  std::string subject;
  double sampling_rate = 0.0;
  std::optional<long> onset_sample;
  /// Absolute path to a trajectory series, when the manifest provides one.
  std::optional<std::string> trajectory_file;

  Eigen::Index channels() const { return data.rows(); }
  Eigen::Index samples() const { return data.cols(); }
};

struct TrialSet {
  std::vector<EegTrial> trials;
  std::vector<std::string> channel_names;
  std::vector<std::string> class_names;
  std::string dataset_id;

  int num_classes() const { return static_cast<int>(class_names.size()); }
  double sampling_rate() const { return trials.empty() ? 0.0 : trials.front().sampling_rate; }
  std::vector<int> labels() const;
  std::vector<int> class_counts() const;

  /// Throws DataError when trials disagree on shape or rate, or a label is out of range.
  void validate() const;
};

inline constexpr int kManifestVersion = 1;

/// Reads manifest.json (or the manifest inside a directory) and every
/// referenced .f32 trial file. Paths in the manifest are relative to it.
TrialSet load_manifest(const std::filesystem::path& path);

/// Writes manifest.json plus one .f32 file per trial into `dir`.
void save_dataset(const TrialSet& ds, const std::filesystem::path& dir);

/// Raw little-endian float32 I/O.
std::vector<float> read_f32(const std::filesystem::path& path);
void write_f32(const std::filesystem::path& path, const std::vector<float>& values);

/// Rounds every entry to the nearest float, the precision of trial files.
Matrix round_to_float(const Matrix& m);

/// A single trajectory series stored as .f32.
std::vector<double> load_trajectory(const std::filesystem::path& path);

/// Per-channel z-score with population standard deviation.
EegTrial znormalize(const EegTrial& trial);

/// Crops [center - round(pre*fs), center + round(post*fs)).
EegTrial extract_window(const EegTrial& trial, long center_sample, double pre_seconds,
                        double post_seconds);

}  // namespace mrcp
