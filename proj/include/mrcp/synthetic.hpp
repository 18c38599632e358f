#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mrcp/dataio.hpp"

namespace mrcp {

/// One bell-shaped deflection on one latent source.
/// Value at time t (seconds from onset): amplitude * exp(-((t - latency) / width)^2).
struct BellComponent {
  double amplitude = -1.0;
  double latency_s = 0.0;
  double width_s = 0.3;
};

/// Components per latent source; sources share one seeded mixing matrix across classes.
struct ClassTemplate {
  std::vector<BellComponent> sources;
};

struct SynthSpec {
  int classes = 4;
  int trials_per_class = 60;
  int channels = 11;
  int samples = 768;
  double sampling_rate = 256.0;
  double snr_db = 0.0;                ///< +inf gives noiseless trials
  std::uint64_t seed = 1;
  double onset_s = 2.0;               ///< nominal onset inside the epoch
  double jitter_s = 0.0;              ///< per-trial onset shift, uniform in [-jitter, +jitter]
  int noise_sources = 0;              ///< 0 means one per channel
  /// Cue-evoked sources shared by every class. They sit at a fixed latency
  /// from the cue, so their own jitter models reaction-time spread seen from
  /// an onset-aligned epoch. Each trial scales each source by a gain drawn
  /// uniformly from [0, 2]. Not counted in the signal power behind snr_db.
  int evoked_sources = 0;
  double evoked_amplitude = 1.0;
  double evoked_latency_s = -1.0;     ///< relative to the nominal onset
  double evoked_jitter_s = 0.0;
  std::vector<ClassTemplate> templates;  ///< empty: default_templates(classes)
  std::vector<std::string> class_names;  ///< empty: class_0, class_1, ...

  /// Throws ConfigError on an invalid spec.
  void validate() const;
};

/// Distinct MRCP-like templates: a shared slow negativity plus two
/// class-specific sources whose latency and polarity vary with the class.
std::vector<ClassTemplate> default_templates(int classes);

/// Clean template of one class, C x T, before noise.
Matrix synthetic_template(const SynthSpec& spec, int label);

/// Deterministic in the spec: the same seed yields bit-identical trials.
/// Samples are rounded to float so a save/load round trip is exact.
TrialSet generate_synthetic(const SynthSpec& spec);

/// Unit-variance 1/f-shaped noise from a sum of first-order processes with
/// log-spaced corner frequencies.
std::vector<double> pink_noise(std::size_t n, double fs, std::uint64_t seed);

}  // namespace mrcp
