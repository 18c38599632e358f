#include "mrcp/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "mrcp/errors.hpp"

namespace mrcp {

namespace {

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed ^ (0x9E3779B97F4A7C15ULL * (stream + 0x51));
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Box-Muller on raw 64-bit draws, identical across standard libraries.
class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : rng_(seed) {}
  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }
  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 rng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

Matrix mixing_matrix(std::size_t rows, Eigen::Index C, std::uint64_t seed) {
  Gaussian g(seed);
  Matrix M(C, static_cast<Eigen::Index>(rows));
  for (Eigen::Index j = 0; j < M.cols(); ++j) {
    for (Eigen::Index c = 0; c < C; ++c) M(c, j) = g();
    M.col(j).normalize();
  }
  return M;
}

Matrix source_waveforms(const SynthSpec& spec, const ClassTemplate& tpl, double shift_s) {
  Matrix out(static_cast<Eigen::Index>(tpl.sources.size()), spec.samples);
  for (std::size_t j = 0; j < tpl.sources.size(); ++j) {
    const auto& comp = tpl.sources[j];
    for (int t = 0; t < spec.samples; ++t) {
      const double time = static_cast<double>(t) / spec.sampling_rate - spec.onset_s - shift_s;
      const double z = (time - comp.latency_s) / comp.width_s;
      out(static_cast<Eigen::Index>(j), t) = comp.amplitude * std::exp(-z * z);
    }
  }
  return out;
}

// 5 Hz bursts under a 100 ms envelope, 150 ms apart, alternating phase.
// Trial-to-trial lag cancels them in the average, unlike a monophasic bell.
Matrix evoked_waveforms(const SynthSpec& spec, double shift_s, const Vector& gain) {
  Matrix out(spec.evoked_sources, spec.samples);
  for (int j = 0; j < spec.evoked_sources; ++j) {
    const double latency = spec.evoked_latency_s + 0.15 * j;
    const double phase = j % 2 == 0 ? 0.0 : std::numbers::pi / 2.0;
    for (int t = 0; t < spec.samples; ++t) {
      const double time = static_cast<double>(t) / spec.sampling_rate - spec.onset_s - shift_s - latency;
      const double z = time / 0.1;
      out(j, t) = gain(j) * spec.evoked_amplitude * std::exp(-z * z) * std::cos(2.0 * std::numbers::pi * 5.0 * time + phase);
    }
  }
  return out;
}

std::vector<ClassTemplate> templates_of(const SynthSpec& spec) {
  return spec.templates.empty() ? default_templates(spec.classes) : spec.templates;
}

}  // namespace

void SynthSpec::validate() const {
  if (classes < 2) throw ConfigError("synthetic spec needs at least 2 classes");
  if (trials_per_class < 1) throw ConfigError("trials_per_class must be positive");
  if (channels < 1 || samples < 2) throw ConfigError("channels and samples must be positive");
  if (!(sampling_rate > 0.0)) throw ConfigError("sampling_rate must be positive");
  if (std::isnan(snr_db)) throw ConfigError("snr_db must be a number");
  if (jitter_s < 0.0) throw ConfigError("jitter_s must be non-negative");
  if (noise_sources < 0) throw ConfigError("noise_sources must be non-negative");
  if (evoked_sources < 0) throw ConfigError("evoked_sources must be non-negative");
  if (evoked_jitter_s < 0.0) throw ConfigError("evoked_jitter_s must be non-negative");
  if (!templates.empty()) {
    if (static_cast<int>(templates.size()) != classes) throw ConfigError("need one template per class");
    const auto L = templates.front().sources.size();
    if (L == 0) throw ConfigError("templates need at least one source");
    for (const auto& t : templates) {
      if (t.sources.size() != L) throw ConfigError("all templates need the same number of sources");
      for (const auto& c : t.sources) {
        if (!(c.width_s > 0.0)) throw ConfigError("component width must be positive");
      }
    }
  }
  if (!class_names.empty() && static_cast<int>(class_names.size()) != classes) {
    throw ConfigError("class_names must list one name per class");
  }
}

std::vector<ClassTemplate> default_templates(int classes) {
  std::vector<ClassTemplate> out;
  for (int k = 0; k < classes; ++k) {
    const double u = classes > 1 ? static_cast<double>(k) / static_cast<double>(classes - 1) : 0.0;
    ClassTemplate t;
    t.sources.push_back({-1.0, -0.3, 0.6});
    t.sources.push_back({-0.9, -0.7 + 0.9 * u, 0.25});
    t.sources.push_back({(k % 2 == 0 ? -0.8 : 0.8), 0.1 - 0.5 * u, 0.3});
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<double> pink_noise(std::size_t n, double fs, std::uint64_t seed) {
  Gaussian g(seed);
  std::vector<double> corners;
  for (double f = 0.05; f < fs / 2.0; f *= 3.0) corners.push_back(f);
  const double weight = 1.0 / std::sqrt(static_cast<double>(corners.size()));
  std::vector<double> state(corners.size());
  std::vector<double> coeff(corners.size());
  for (std::size_t j = 0; j < corners.size(); ++j) {
    coeff[j] = std::exp(-2.0 * std::numbers::pi * corners[j] / fs);
    state[j] = g();  // stationary start
  }
  std::vector<double> out(n);
  for (std::size_t t = 0; t < n; ++t) {
    double acc = 0.0;
    for (std::size_t j = 0; j < corners.size(); ++j) {
      state[j] = coeff[j] * state[j] + std::sqrt(1.0 - coeff[j] * coeff[j]) * g();
      acc += state[j];
    }
    out[t] = weight * acc;
  }
  return out;
}

Matrix synthetic_template(const SynthSpec& spec, int label) {
  const auto tpls = templates_of(spec);
  const auto& tpl = tpls.at(static_cast<std::size_t>(label));
  const Matrix M = mixing_matrix(tpl.sources.size(), spec.channels, stream_seed(spec.seed, 1));
  return M * source_waveforms(spec, tpl, 0.0);
}

TrialSet generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  const auto tpls = templates_of(spec);
  const Eigen::Index C = spec.channels;
  const Eigen::Index T = spec.samples;
  const auto L = tpls.front().sources.size();
  const Matrix signal_mix = mixing_matrix(L, C, stream_seed(spec.seed, 1));
  const int n_noise = spec.noise_sources > 0 ? spec.noise_sources : spec.channels;
  const Matrix noise_mix = mixing_matrix(static_cast<std::size_t>(n_noise), C, stream_seed(spec.seed, 2));

  // Noise scaled against the mean clean-template power.
  double signal_power = 0.0;
  for (const auto& tpl : tpls) {
    signal_power += (signal_mix * source_waveforms(spec, tpl, 0.0)).squaredNorm();
  }
  signal_power /= static_cast<double>(tpls.size() * static_cast<std::size_t>(C * T));
  // Unit-variance sources through unit-norm mixing columns: per-sample power n_noise / C.
  const double noise_unit_power = static_cast<double>(n_noise) / static_cast<double>(C);
  const bool noiseless = std::isinf(spec.snr_db) && spec.snr_db > 0;
  const double noise_scale =
      noiseless ? 0.0 : std::sqrt(signal_power / std::pow(10.0, spec.snr_db / 10.0) / noise_unit_power);

  TrialSet ds;
  ds.dataset_id = "synthetic-" + std::to_string(spec.seed);
  for (int c = 0; c < spec.channels; ++c) ds.channel_names.push_back("ch" + std::to_string(c));
  if (spec.class_names.empty()) {
    for (int k = 0; k < spec.classes; ++k) ds.class_names.push_back("class_" + std::to_string(k));
  } else {
    ds.class_names = spec.class_names;
  }

  Gaussian jitter_rng(stream_seed(spec.seed, 3));
  Gaussian evoked_rng(stream_seed(spec.seed, 5));
  const Matrix evoked_mix =
      mixing_matrix(static_cast<std::size_t>(spec.evoked_sources), C, stream_seed(spec.seed, 4));
  const long onset = std::lround(spec.onset_s * spec.sampling_rate);
  std::uint64_t trial_no = 0;
  for (int k = 0; k < spec.classes; ++k) {
    for (int i = 0; i < spec.trials_per_class; ++i, ++trial_no) {
      const double shift = spec.jitter_s > 0 ? (2.0 * jitter_rng.uniform() - 1.0) * spec.jitter_s : 0.0;
      Matrix X = signal_mix * source_waveforms(spec, tpls[static_cast<std::size_t>(k)], shift);
      if (spec.evoked_sources > 0) {
        const double lag = (2.0 * evoked_rng.uniform() - 1.0) * spec.evoked_jitter_s;
        Vector gain(spec.evoked_sources);
        for (auto& g : gain) g = 2.0 * evoked_rng.uniform();
        X += evoked_mix * evoked_waveforms(spec, lag, gain);
      }
      if (noise_scale > 0.0) {
        Matrix sources(n_noise, T);
        for (int j = 0; j < n_noise; ++j) {
          const auto s = pink_noise(static_cast<std::size_t>(T), spec.sampling_rate,
                                    stream_seed(spec.seed, 1000 + trial_no * 4096 + static_cast<std::uint64_t>(j)));
          for (Eigen::Index t = 0; t < T; ++t) sources(j, t) = s[static_cast<std::size_t>(t)];
        }
        X += noise_scale * noise_mix * sources;
      }
      X = round_to_float(X);
      EegTrial trial;
      trial.data = std::move(X);
      trial.label = k;
      trial.subject = "synthetic";
      trial.sampling_rate = spec.sampling_rate;
      if (onset >= 0 && onset < T) trial.onset_sample = onset;
      ds.trials.push_back(std::move(trial));
    }
  }
  return ds;
}

}  // namespace mrcp
