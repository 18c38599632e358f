#include "mrcp/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "mrcp/errors.hpp"

namespace fs = std::filesystem;

namespace mrcp {

namespace {

template <typename T>
T get_as(const Json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(std::string("config field '") + key + "' has the wrong type");
  }
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

PipelineConfig config_from_json(const Json& j, PipelineConfig c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known = {"variant", "p", "classifier", "c_reg", "banks",
                                              "selection", "k_grid", "folds", "inner_folds", "seed",
                                              "jobs", "align", "epoch_pre_s", "epoch_post_s"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown config field '" + key + "'");
  }
  if (j.contains("variant")) c.variant = parse_variant(get_as<std::string>(j, "variant"));
  if (j.contains("p") && !j.at("p").is_null()) c.P = get_as<int>(j, "p");
  if (j.contains("classifier")) c.classifier = parse_classifier(get_as<std::string>(j, "classifier"));
  if (j.contains("c_reg")) c.c_reg = get_as<double>(j, "c_reg");
  if (j.contains("banks")) c.banks = get_as<bool>(j, "banks");
  if (j.contains("selection")) c.selection = get_as<bool>(j, "selection");
  if (j.contains("k_grid")) {
    c.k_grid.clear();
    for (const auto& e : j.at("k_grid")) {
      if (e.is_string() && (e.get<std::string>() == "all" || e.get<std::string>() == "F")) {
        c.k_grid.push_back(kAllFeatures);
      } else if (e.is_number_integer() && e.get<int>() > 0) {
        c.k_grid.push_back(e.get<int>());
      } else {
        throw ConfigError("k_grid entries must be positive integers or \"all\"");
      }
    }
  }
  if (j.contains("folds")) c.folds = get_as<int>(j, "folds");
  if (j.contains("inner_folds")) c.inner_folds = get_as<int>(j, "inner_folds");
  if (j.contains("seed")) c.seed = get_as<std::uint64_t>(j, "seed");
  if (j.contains("jobs")) c.jobs = get_as<int>(j, "jobs");
  if (j.contains("align")) c.align = parse_align(get_as<std::string>(j, "align"));
  if (j.contains("epoch_pre_s")) c.epoch_pre_s = get_as<double>(j, "epoch_pre_s");
  if (j.contains("epoch_post_s")) c.epoch_post_s = get_as<double>(j, "epoch_post_s");
  return c;
}

Json config_to_json(const PipelineConfig& c) {
  Json j;
  j["variant"] = to_string(c.variant);
  j["p"] = c.P ? Json(*c.P) : Json(nullptr);
  j["classifier"] = to_string(c.classifier);
  j["c_reg"] = c.c_reg;
  j["banks"] = c.use_banks();
  j["selection"] = c.use_selection();
  Json grid = Json::array();
  for (int k : c.k_grid) grid.push_back(k == kAllFeatures ? Json("all") : Json(k));
  j["k_grid"] = grid;
  j["folds"] = c.folds;
  j["inner_folds"] = c.inner_folds;
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  j["align"] = to_string(c.align);
  j["epoch_pre_s"] = c.epoch_pre_s;
  j["epoch_post_s"] = c.epoch_post_s;
  return j;
}

SynthSpec synth_spec_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("synthetic spec must be a JSON object");
  static const std::set<std::string> known = {"classes", "trials_per_class", "channels", "samples",
                                              "sampling_rate", "snr_db", "seed", "onset_s", "jitter_s",
                                              "noise_sources", "evoked_sources", "evoked_amplitude",
                                              "evoked_latency_s", "evoked_jitter_s", "class_names", "templates"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown synthetic spec field '" + key + "'");
  }
  SynthSpec s;
  if (j.contains("classes")) s.classes = get_as<int>(j, "classes");
  if (j.contains("trials_per_class")) s.trials_per_class = get_as<int>(j, "trials_per_class");
  if (j.contains("channels")) s.channels = get_as<int>(j, "channels");
  if (j.contains("samples")) s.samples = get_as<int>(j, "samples");
  if (j.contains("sampling_rate")) s.sampling_rate = get_as<double>(j, "sampling_rate");
  if (j.contains("snr_db")) {
    const auto& v = j.at("snr_db");
    if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "+inf")) {
      s.snr_db = std::numeric_limits<double>::infinity();
    } else {
      s.snr_db = get_as<double>(j, "snr_db");
    }
  }
  if (j.contains("seed")) s.seed = get_as<std::uint64_t>(j, "seed");
  if (j.contains("onset_s")) s.onset_s = get_as<double>(j, "onset_s");
  if (j.contains("jitter_s")) s.jitter_s = get_as<double>(j, "jitter_s");
  if (j.contains("noise_sources")) s.noise_sources = get_as<int>(j, "noise_sources");
  if (j.contains("evoked_sources")) s.evoked_sources = get_as<int>(j, "evoked_sources");
  if (j.contains("evoked_amplitude")) s.evoked_amplitude = get_as<double>(j, "evoked_amplitude");
  if (j.contains("evoked_latency_s")) s.evoked_latency_s = get_as<double>(j, "evoked_latency_s");
  if (j.contains("evoked_jitter_s")) s.evoked_jitter_s = get_as<double>(j, "evoked_jitter_s");
  if (j.contains("class_names")) s.class_names = get_as<std::vector<std::string>>(j, "class_names");
  if (j.contains("templates")) {
    for (const auto& jt : j.at("templates")) {
      ClassTemplate t;
      for (const auto& jc : jt) {
        BellComponent c;
        c.amplitude = jc.value("amplitude", c.amplitude);
        c.latency_s = jc.value("latency_s", c.latency_s);
        c.width_s = jc.value("width_s", c.width_s);
        t.sources.push_back(c);
      }
      s.templates.push_back(std::move(t));
    }
  }
  s.validate();
  return s;
}

Json synth_spec_to_json(const SynthSpec& s) {
  Json j;
  j["classes"] = s.classes;
  j["trials_per_class"] = s.trials_per_class;
  j["channels"] = s.channels;
  j["samples"] = s.samples;
  j["sampling_rate"] = s.sampling_rate;
  j["snr_db"] = std::isinf(s.snr_db) ? Json("inf") : Json(s.snr_db);
  j["seed"] = s.seed;
  j["onset_s"] = s.onset_s;
  j["jitter_s"] = s.jitter_s;
  j["noise_sources"] = s.noise_sources;
  j["evoked_sources"] = s.evoked_sources;
  j["evoked_amplitude"] = s.evoked_amplitude;
  j["evoked_latency_s"] = s.evoked_latency_s;
  j["evoked_jitter_s"] = s.evoked_jitter_s;
  if (!s.class_names.empty()) j["class_names"] = s.class_names;
  Json tpls = Json::array();
  for (const auto& t : s.templates.empty() ? default_templates(s.classes) : s.templates) {
    Json jt = Json::array();
    for (const auto& c : t.sources) {
      jt.push_back({{"amplitude", c.amplitude}, {"latency_s", c.latency_s}, {"width_s", c.width_s}});
    }
    tpls.push_back(jt);
  }
  j["templates"] = tpls;
  return j;
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j.at(static_cast<std::size_t>(r)).size()) != cols) {
      throw DataError("ragged matrix in report");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = j.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>();
    }
  }
  return m;
}

Json report_to_json(const EvaluationReport& rep) {
  Json j;
  j["dataset_id"] = rep.dataset_id;
  j["classes"] = rep.class_names;
  j["num_trials"] = rep.num_trials;
  j["config"] = config_to_json(rep.config);
  Json bands = Json::array();
  for (const auto& b : rep.bands) {
    bands.push_back({{"index", b.index}, {"low_hz", b.low_hz}, {"high_hz", b.high_hz},
                     {"design", "butterworth-4 band-pass, forward-backward (zero phase)"}});
  }
  j["bands"] = bands;
  j["mi_bins"] = kDefaultBins;
  j["mrmr_criterion"] = "difference";
  Json folds = Json::array();
  for (std::size_t f = 0; f < rep.folds.size(); ++f) {
    const auto& fr = rep.folds[f];
    Json jf;
    jf["fold"] = f;
    jf["accuracy"] = fr.accuracy;
    jf["k"] = fr.k;
    Json sel = Json::array();
    for (const auto& t : fr.selected) sel.push_back(t.to_string());
    jf["selected_features"] = sel;
    jf["test_indices"] = fr.test_indices;
    jf["truth"] = fr.truth;
    jf["predictions"] = fr.predictions;
    std::ostringstream fp;
    fp << std::hex << std::setw(16) << std::setfill('0') << fr.model_fingerprint;
    jf["model_fingerprint"] = fp.str();
    folds.push_back(jf);
  }
  j["folds"] = folds;
  j["fold_accuracies"] = rep.fold_accuracies;
  j["mean_accuracy"] = rep.mean_accuracy;
  j["std_accuracy"] = rep.std_accuracy;
  j["confusion"] = matrix_to_json(rep.confusion);
  j["template_corr"] = matrix_to_json(rep.template_corr);
  j["wall_clock_s"] = rep.wall_clock_s;
  return j;
}

std::string confusion_csv(const Matrix& m, const std::vector<std::string>& names) {
  std::ostringstream os;
  os << "truth\\predicted";
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    os << ',' << (static_cast<std::size_t>(c) < names.size() ? names[static_cast<std::size_t>(c)] : std::to_string(c));
  }
  os << '\n';
  os << std::setprecision(10);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    os << (static_cast<std::size_t>(r) < names.size() ? names[static_cast<std::size_t>(r)] : std::to_string(r));
    for (Eigen::Index c = 0; c < m.cols(); ++c) os << ',' << m(r, c);
    os << '\n';
  }
  return os.str();
}

std::string features_csv(const FeatureMatrix& F) {
  std::ostringstream os;
  os << "label";
  for (const auto& t : F.tags) os << ',' << t.to_string();
  os << '\n' << std::setprecision(17);
  for (Eigen::Index r = 0; r < F.rows(); ++r) {
    os << (static_cast<std::size_t>(r) < F.labels.size() ? F.labels[static_cast<std::size_t>(r)] : -1);
    for (Eigen::Index c = 0; c < F.cols(); ++c) os << ',' << F.values(r, c);
    os << '\n';
  }
  return os.str();
}

std::string heatmap_svg(const Matrix& m, const std::vector<std::string>& labels, double lo, double hi,
                        const std::string& title) {
  const int cell = 48;
  const int margin = 120;
  const auto n_rows = static_cast<int>(m.rows());
  const auto n_cols = static_cast<int>(m.cols());
  const int width = margin + n_cols * cell + 20;
  const int height = margin + n_rows * cell + 20;
  auto label = [&](int i) { return i < static_cast<int>(labels.size()) ? labels[static_cast<std::size_t>(i)] : std::to_string(i); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<text x=\"" << width / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(title)
     << "</text>\n";
  for (int r = 0; r < n_rows; ++r) {
    for (int c = 0; c < n_cols; ++c) {
      const double v = m(r, c);
      const double u = std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
      // white -> dark blue
      const int red = static_cast<int>(std::lround(255 * (1 - u) + 8 * u));
      const int green = static_cast<int>(std::lround(255 * (1 - u) + 48 * u));
      const int blue = static_cast<int>(std::lround(255 * (1 - u) + 107 * u));
      const int x = margin + c * cell;
      const int y = margin + r * cell;
      os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\"" << cell
         << "\" fill=\"rgb(" << red << ',' << green << ',' << blue << ")\" stroke=\"#888\"/>\n";
      os << "<text x=\"" << x + cell / 2 << "\" y=\"" << y + cell / 2 + 4 << "\" text-anchor=\"middle\" fill=\""
         << (u > 0.55 ? "white" : "black") << "\">" << fmt(v, 2) << "</text>\n";
    }
  }
  for (int r = 0; r < n_rows; ++r) {
    os << "<text x=\"" << margin - 6 << "\" y=\"" << margin + r * cell + cell / 2 + 4
       << "\" text-anchor=\"end\">" << xml_escape(label(r)) << "</text>\n";
  }
  for (int c = 0; c < n_cols; ++c) {
    const int x = margin + c * cell + cell / 2;
    os << "<text x=\"" << x << "\" y=\"" << margin - 6 << "\" text-anchor=\"start\" transform=\"rotate(-45 " << x
       << ' ' << margin - 6 << ")\">" << xml_escape(label(c)) << "</text>\n";
  }
  os << "<text x=\"8\" y=\"" << height - 6 << "\" fill=\"#555\">scale [" << fmt(lo, 1) << ", " << fmt(hi, 1)
     << "]</text>\n";
  os << "</svg>\n";
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw DataError("cannot parse " + path.string() + ": " + e.what());
  }
}

void render_report_files(const Json& report, const fs::path& out_dir) {
  const auto names = report.at("classes").get<std::vector<std::string>>();
  const Matrix conf = matrix_from_json(report.at("confusion"));
  const Matrix corr = matrix_from_json(report.at("template_corr"));
  write_text(out_dir / "confusion.csv", confusion_csv(conf, names));
  write_text(out_dir / "confusion.svg", heatmap_svg(conf, names, 0.0, 1.0, "Confusion (row-normalized)"));
  write_text(out_dir / "template_corr.csv", confusion_csv(corr, names));
  write_text(out_dir / "template_corr.svg",
             heatmap_svg(corr, names, -1.0, 1.0, "Grand-average correlation (corr2)"));
  std::ostringstream folds;
  folds << "fold,accuracy,k\n" << std::setprecision(10);
  for (const auto& f : report.at("folds")) {
    folds << f.at("fold").get<int>() << ',' << f.at("accuracy").get<double>() << ',' << f.at("k").get<int>() << '\n';
  }
  write_text(out_dir / "folds.csv", folds.str());
}

void write_report_bundle(const EvaluationReport& rep, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const Json j = report_to_json(rep);
  write_text(out_dir / "report.json", j.dump(2) + "\n");
  render_report_files(j, out_dir);
}

Json onset_decision_to_json(const onset::OnsetDecision& d) {
  Json j;
  j["status"] = d.accepted ? "accepted" : "rejected";
  j["onset_sample"] = d.onset_sample ? Json(*d.onset_sample) : Json(nullptr);
  j["reason"] = d.reason ? Json(*d.reason) : Json(nullptr);
  if (d.fit_params) {
    j["fit"] = {{"a", d.fit_params->a}, {"b", d.fit_params->b}, {"c", d.fit_params->c}, {"d", d.fit_params->d}};
  }
  return j;
}

}  // namespace mrcp
