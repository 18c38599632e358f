#include "mrcp/dataio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "mrcp/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace mrcp {

namespace {

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0xFF) << 24) | ((v & 0xFF00) << 8) | ((v >> 8) & 0xFF00) | (v >> 24);
  }
  return v;
}

int resolve_label(const json& j, const std::vector<std::string>& classes, const std::string& file) {
  if (j.is_number_integer()) {
    const int idx = j.get<int>();
    if (idx < 0 || idx >= static_cast<int>(classes.size())) {
      throw DataError("unknown label " + std::to_string(idx) + " for " + file);
    }
    return idx;
  }
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    const auto it = std::find(classes.begin(), classes.end(), name);
    if (it == classes.end()) throw DataError("unknown label '" + name + "' for " + file);
    return static_cast<int>(it - classes.begin());
  }
  throw DataError("label must be a class name or index for " + file);
}

template <typename T>
T required(const json& j, const char* key) {
  if (!j.contains(key)) throw DataError(std::string("manifest missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw DataError(std::string("manifest field '") + key + "' has the wrong type");
  }
}

}  // namespace

std::vector<int> TrialSet::labels() const {
  std::vector<int> out;
  out.reserve(trials.size());
  for (const auto& t : trials) out.push_back(t.label);
  return out;
}

std::vector<int> TrialSet::class_counts() const {
  std::vector<int> counts(class_names.size(), 0);
  for (const auto& t : trials) {
    if (t.label >= 0 && t.label < num_classes()) ++counts[t.label];
  }
  return counts;
}

void TrialSet::validate() const {
  if (trials.empty()) throw DataError("empty dataset");
  const auto& first = trials.front();
  if (first.channels() <= 0 || first.samples() <= 0) throw DataError("trial has no samples");
  if (!(first.sampling_rate > 0.0)) throw DataError("sampling rate must be positive");
  for (const auto& t : trials) {
    if (t.channels() != first.channels() || t.samples() != first.samples()) {
      throw DataError("trials differ in shape");
    }
    if (t.sampling_rate != first.sampling_rate) throw DataError("trials differ in sampling rate");
    if (t.label < 0 || t.label >= num_classes()) throw DataError("trial label out of range");
  }
  if (!channel_names.empty() && static_cast<Eigen::Index>(channel_names.size()) != first.channels()) {
    throw DataError("channel list does not match trial shape");
  }
}

std::vector<float> read_f32(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  if (bytes % 4 != 0) throw DataError("byte length of " + path.string() + " is not a multiple of 4");
  std::vector<float> out(bytes / 4);
  std::vector<std::uint32_t> raw(out.size());
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw DataError("short read on " + path.string());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const std::uint32_t v = to_le(raw[i]);
    std::memcpy(&out[i], &v, 4);
  }
  return out;
}

void write_f32(const fs::path& path, const std::vector<float>& values) {
  std::vector<std::uint32_t> raw(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t v;
    std::memcpy(&v, &values[i], 4);
    raw[i] = to_le(v);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 4));
}

Matrix round_to_float(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  const double* src = m.data();
  double* dst = out.data();
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    dst[i] = static_cast<double>(static_cast<float>(src[i]));
  }
  return out;
}

std::vector<double> load_trajectory(const fs::path& path) {
  const auto raw = read_f32(path);
  return {raw.begin(), raw.end()};
}

TrialSet load_manifest(const fs::path& path) {
  fs::path manifest_path = path;
  if (fs::is_directory(manifest_path)) manifest_path /= "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw DataError("cannot open manifest " + manifest_path.string());

  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError("manifest parse error: " + std::string(e.what()));
  }
  const fs::path base = manifest_path.parent_path();

  const int version = required<int>(j, "version");
  if (version != kManifestVersion) {
    throw DataError("unsupported manifest version " + std::to_string(version));
  }

  TrialSet ds;
  ds.dataset_id = j.value("dataset_id", manifest_path.parent_path().filename().string());
  ds.channel_names = required<std::vector<std::string>>(j, "channels");
  ds.class_names = required<std::vector<std::string>>(j, "classes");
  const double fs_hz = required<double>(j, "sampling_rate_hz");
  if (!(fs_hz > 0.0)) throw DataError("sampling_rate_hz must be positive");
  if (ds.channel_names.empty()) throw DataError("manifest lists no channels");
  if (ds.class_names.empty()) throw DataError("manifest lists no classes");

  const auto& trials = j.contains("trials") ? j.at("trials") : json::array();
  if (!trials.is_array() || trials.empty()) throw DataError("empty dataset");

  const auto C = static_cast<Eigen::Index>(ds.channel_names.size());
  Eigen::Index T = j.value("samples_per_trial", Eigen::Index{0});

  for (const auto& jt : trials) {
    const auto file = required<std::string>(jt, "file");
    const fs::path fpath = base / file;
    if (!fs::exists(fpath)) throw DataError("missing trial file " + file);
    const auto bytes = static_cast<Eigen::Index>(fs::file_size(fpath));
    if (T == 0) {
      if (bytes == 0 || bytes % (4 * C) != 0) {
        throw DataError("byte length mismatch in " + file);
      }
      T = bytes / (4 * C);
    }
    if (bytes != 4 * C * T) throw DataError("byte length mismatch in " + file);

    const auto raw = read_f32(fpath);
    EegTrial trial;
    trial.data.resize(C, T);
    for (Eigen::Index c = 0; c < C; ++c) {
      for (Eigen::Index t = 0; t < T; ++t) trial.data(c, t) = raw[static_cast<std::size_t>(c * T + t)];
    }
    if (!trial.data.allFinite()) throw DataError("non-finite samples in " + file);
    if (!jt.contains("label")) throw DataError("trial " + file + " has no label");
    trial.label = resolve_label(jt.at("label"), ds.class_names, file);
    trial.subject = jt.contains("subject") ? (jt.at("subject").is_string()
                                                  ? jt.at("subject").get<std::string>()
                                                  : jt.at("subject").dump())
                                           : std::string{};
    trial.sampling_rate = fs_hz;
    if (jt.contains("onset_sample") && !jt.at("onset_sample").is_null()) {
      trial.onset_sample = jt.at("onset_sample").get<long>();
    }
    if (jt.contains("trajectory_file") && !jt.at("trajectory_file").is_null()) {
      const fs::path tp = base / jt.at("trajectory_file").get<std::string>();
      if (!fs::exists(tp)) throw DataError("missing trajectory file " + tp.string());
      trial.trajectory_file = tp.string();
    }
    ds.trials.push_back(std::move(trial));
  }
  ds.validate();
  return ds;
}

void save_dataset(const TrialSet& ds, const fs::path& dir) {
  ds.validate();
  fs::create_directories(dir);
  json j;
  j["version"] = kManifestVersion;
  j["dataset_id"] = ds.dataset_id;
  j["sampling_rate_hz"] = ds.sampling_rate();
  j["channels"] = ds.channel_names;
  j["classes"] = ds.class_names;
  j["samples_per_trial"] = ds.trials.front().samples();
  json trials = json::array();

  const int width = static_cast<int>(std::to_string(ds.trials.size()).size());
  for (std::size_t i = 0; i < ds.trials.size(); ++i) {
    const auto& t = ds.trials[i];
    std::ostringstream name;
    name << "trial_" << std::setw(width) << std::setfill('0') << i << ".f32";
    std::vector<float> raw(static_cast<std::size_t>(t.data.size()));
    for (Eigen::Index c = 0; c < t.channels(); ++c) {
      for (Eigen::Index s = 0; s < t.samples(); ++s) {
        raw[static_cast<std::size_t>(c * t.samples() + s)] = static_cast<float>(t.data(c, s));
      }
    }
    write_f32(dir / name.str(), raw);
    json jt;
    jt["file"] = name.str();
    jt["label"] = ds.class_names[static_cast<std::size_t>(t.label)];
    jt["subject"] = t.subject;
    if (t.onset_sample) jt["onset_sample"] = *t.onset_sample;
    if (t.trajectory_file) {
      jt["trajectory_file"] = fs::relative(*t.trajectory_file, dir).generic_string();
    }
    trials.push_back(std::move(jt));
  }
  j["trials"] = std::move(trials);
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) throw DataError("cannot write manifest in " + dir.string());
  out << j.dump(2) << '\n';
}

EegTrial znormalize(const EegTrial& trial) {
  EegTrial out = trial;
  const auto n = static_cast<double>(trial.samples());
  for (Eigen::Index c = 0; c < trial.channels(); ++c) {
    auto row = out.data.row(c);
    const double mean = row.mean();
    row.array() -= mean;
    const double sd = std::sqrt(row.squaredNorm() / n);
    if (!(sd > 1e-12 * (std::abs(mean) + 1e-300))) {
      throw DataError("zero-variance channel " + std::to_string(c));
    }
    row /= sd;
  }
  return out;
}

EegTrial extract_window(const EegTrial& trial, long center_sample, double pre_seconds,
                        double post_seconds) {
  const auto pre = static_cast<long>(std::lround(pre_seconds * trial.sampling_rate));
  const auto post = static_cast<long>(std::lround(post_seconds * trial.sampling_rate));
  const long begin = center_sample - pre;
  const long end = center_sample + post;
  if (pre < 0 || post < 0 || end <= begin) throw DataError("window has no samples");
  if (begin < 0 || end > static_cast<long>(trial.samples())) {
    throw DataError("window [" + std::to_string(begin) + ", " + std::to_string(end) +
                    ") out of bounds for trial with " + std::to_string(trial.samples()) + " samples");
  }
  EegTrial out = trial;
  out.data = trial.data.middleCols(begin, end - begin);
  if (out.onset_sample) out.onset_sample = *out.onset_sample - begin;
  return out;
}

}  // namespace mrcp
