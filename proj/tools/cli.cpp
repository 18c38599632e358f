#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

#include "mrcp/dataio.hpp"
#include "mrcp/errors.hpp"
#include "mrcp/onset.hpp"
#include "mrcp/pipeline.hpp"
#include "mrcp/report.hpp"
#include "mrcp/synthetic.hpp"

namespace fs = std::filesystem;

namespace mrcp::cli {

namespace {

constexpr const char* kSeedEnv = "MRCP_DECODE_SEED";

std::string kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config: return "config";
    case ErrorKind::Data: return "data";
    case ErrorKind::Numeric: return "numeric";
  }
  return "unknown";
}

std::string one_line(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '\n' || c == '\r') {
      out.push_back(' ');
    } else if (c == '"' || c == '\\') {
      out.push_back('\\');
      out.push_back(c);
    } else {
      out.push_back(c);
    }
  }
  return out;
}

int report_error(std::ostream& err, const std::string& kind, int code, const std::string& message) {
  err << "error kind=" << kind << " code=" << code << " message=\"" << one_line(message) << "\"\n";
  return code;
}

std::uint64_t parse_seed(const std::string& text, const std::string& source) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw ConfigError(source + " is not an unsigned integer: '" + text + "'");
  }
  return v;
}

bool parse_on_off(const std::string& s, const std::string& flag) {
  if (s == "on" || s == "true" || s == "1") return true;
  if (s == "off" || s == "false" || s == "0") return false;
  throw ConfigError(flag + " expects on or off, got '" + s + "'");
}

std::vector<int> parse_k_grid(const std::string& s) {
  std::vector<int> grid;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "all" || item == "F") {
      grid.push_back(kAllFeatures);
      continue;
    }
    int k = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), k);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size() || k <= 0) {
      throw ConfigError("--k-grid entry '" + item + "' is not a positive integer or 'all'");
    }
    grid.push_back(k);
  }
  if (grid.empty()) throw ConfigError("--k-grid is empty");
  return grid;
}

// Flags shared by eval, sweep-p and pairwise. Only flags given on the
// command line override the config file.
struct PipelineFlags {
  std::string config_file;
  std::string variant;
  int p = 0;
  std::string classifier;
  double c_reg = 1.0;
  std::string banks;
  std::string selection;
  std::string k_grid;
  int folds = 10;
  std::string seed;
  int jobs = 1;
  std::string align;
  std::map<std::string, CLI::Option*> opts;

  void attach(CLI::App* app) {
    opts["config"] = app->add_option("--config", config_file, "JSON config (same keys as the flags)");
    opts["variant"] = app->add_option("--variant", variant, "bstrca | bfbtrca | mstrca | mfbtrca");
    opts["p"] = app->add_option("--p", p, "eigenvectors per GEVD block");
    opts["classifier"] = app->add_option("--classifier", classifier, "svm | lda");
    opts["c_reg"] = app->add_option("--c-reg", c_reg, "SVM regularization C");
    opts["banks"] = app->add_option("--banks", banks, "on | off");
    opts["selection"] = app->add_option("--selection", selection, "on | off (mRMR + k choice)");
    opts["k_grid"] = app->add_option("--k-grid", k_grid, "comma list, e.g. 5,10,all");
    opts["folds"] = app->add_option("--folds", folds, "cross-validation folds");
    opts["seed"] = app->add_option("--seed", seed, "seed (fallback: $MRCP_DECODE_SEED)");
    opts["jobs"] = app->add_option("--jobs", jobs, "worker threads");
    opts["align"] = app->add_option("--align", align, "none | onset");
  }

  bool given(const std::string& name) const { return opts.at(name)->count() > 0; }

  PipelineConfig build(PipelineConfig c) const {
    bool seed_set = false;
    if (given("config")) {
      const Json j = read_json(config_file);
      c = config_from_json(j, c);
      seed_set = j.contains("seed");
    }
    if (given("variant")) c.variant = parse_variant(variant);
    if (given("p")) c.P = p;
    if (given("classifier")) c.classifier = parse_classifier(classifier);
    if (given("c_reg")) c.c_reg = c_reg;
    if (given("banks")) c.banks = parse_on_off(banks, "--banks");
    if (given("selection")) c.selection = parse_on_off(selection, "--selection");
    if (given("k_grid")) c.k_grid = parse_k_grid(k_grid);
    if (given("folds")) c.folds = folds;
    if (given("jobs")) c.jobs = jobs;
    if (given("align")) c.align = parse_align(align);
    if (given("seed")) {
      c.seed = parse_seed(seed, "--seed");
    } else if (!seed_set) {
      if (const char* env = std::getenv(kSeedEnv); env != nullptr && *env != '\0') {
        c.seed = parse_seed(env, kSeedEnv);
      }
    }
    return c;
  }
};

std::string fixed(double v, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

int cmd_validate(const std::string& manifest, std::ostream& out) {
  const auto ds = load_manifest(manifest);
  ds.validate();
  const auto counts = ds.class_counts();
  out << "ok dataset_id=" << (ds.dataset_id.empty() ? "-" : ds.dataset_id) << " trials=" << ds.trials.size()
      << " classes=" << ds.num_classes() << " channels=" << ds.trials.front().channels()
      << " samples=" << ds.trials.front().samples() << " fs=" << ds.sampling_rate() << " counts=";
  for (std::size_t k = 0; k < counts.size(); ++k) {
    out << (k ? "," : "") << ds.class_names[k] << ':' << counts[k];
  }
  out << '\n';
  return 0;
}

int cmd_onset(const std::string& manifest, const fs::path& out_dir, double cue_offset_s, std::ostream& out) {
  const auto ds = load_manifest(manifest);
  const double fs_hz = ds.sampling_rate();
  TrialSet accepted = ds;
  accepted.trials.clear();
  Json trials = Json::array();
  std::vector<int> n_accepted(ds.class_names.size(), 0), n_rejected(ds.class_names.size(), 0);
  std::map<std::string, int> reasons;
  for (std::size_t i = 0; i < ds.trials.size(); ++i) {
    const auto& t = ds.trials[i];
    const std::string cls = ds.class_names[static_cast<std::size_t>(t.label)];
    Json jt;
    jt["index"] = i;
    jt["class"] = cls;
    jt["subject"] = t.subject;
    if (!t.trajectory_file) {
      jt["status"] = "skipped";
      jt["onset_sample"] = t.onset_sample ? Json(*t.onset_sample) : Json(nullptr);
      if (t.onset_sample) {
        accepted.trials.push_back(t);
        ++n_accepted[static_cast<std::size_t>(t.label)];
      }
      trials.push_back(jt);
      continue;
    }
    onset::TrajectoryRecord rec;
    rec.samples = load_trajectory(*t.trajectory_file);
    rec.sampling_rate = fs_hz;
    rec.rule = onset::rule_for_class(cls);
    rec.cue_sample = std::lround(cue_offset_s * fs_hz);
    const auto d = onset::decide_trial(rec);
    jt.update(onset_decision_to_json(d));
    trials.push_back(jt);
    if (d.accepted) {
      auto kept = t;
      kept.onset_sample = d.onset_sample;
      accepted.trials.push_back(std::move(kept));
      ++n_accepted[static_cast<std::size_t>(t.label)];
    } else {
      ++n_rejected[static_cast<std::size_t>(t.label)];
      ++reasons[*d.reason];
    }
  }
  Json summary = Json::object();
  for (std::size_t k = 0; k < ds.class_names.size(); ++k) {
    summary[ds.class_names[k]] = {{"accepted", n_accepted[k]}, {"rejected", n_rejected[k]}};
  }
  Json rep;
  rep["dataset_id"] = ds.dataset_id;
  rep["cue_offset_s"] = cue_offset_s;
  rep["per_class"] = summary;
  rep["rejection_reasons"] = reasons;
  rep["trials"] = trials;
  fs::create_directories(out_dir);
  write_text(out_dir / "onset_report.json", rep.dump(2) + "\n");
  if (!accepted.trials.empty()) save_dataset(accepted, out_dir / "accepted");
  out << "onset accepted=" << accepted.trials.size() << " rejected="
      << std::accumulate(n_rejected.begin(), n_rejected.end(), 0) << " out=" << out_dir.string() << '\n';
  return 0;
}

int cmd_eval(const std::string& manifest, const PipelineConfig& cfg, const fs::path& out_dir,
             const std::string& export_features, std::ostream& out) {
  const auto ds = load_manifest(manifest);
  const auto rep = kfold_evaluate(ds, cfg);
  write_report_bundle(rep, out_dir);
  write_text(out_dir / "config.json", config_to_json(rep.config).dump(2) + "\n");
  if (!export_features.empty()) {
    write_text(export_features, features_csv(feature_table(ds, rep.config)));
  }
  out << "eval variant=" << to_string(rep.config.variant) << " p=" << rep.config.p()
      << " folds=" << rep.folds.size() << " mean_accuracy=" << fixed(rep.mean_accuracy)
      << " std_accuracy=" << fixed(rep.std_accuracy) << " out=" << out_dir.string() << '\n';
  return 0;
}

int cmd_sweep(const std::string& manifest, const PipelineConfig& cfg, int p_min, int p_max,
              const fs::path& out_dir, std::ostream& out) {
  const auto ds = load_manifest(manifest);
  const int C = static_cast<int>(ds.trials.front().channels());
  if (p_max <= 0) p_max = C;
  const auto curve = p_sweep(ds, cfg, p_min, p_max);
  std::ostringstream csv;
  csv << "p,mean_accuracy,std_accuracy\n" << std::setprecision(10);
  Json points = Json::array();
  for (const auto& pt : curve) {
    csv << pt.P << ',' << pt.mean_accuracy << ',' << pt.std_accuracy << '\n';
    points.push_back({{"p", pt.P}, {"mean_accuracy", pt.mean_accuracy}, {"std_accuracy", pt.std_accuracy}});
  }
  const auto best = std::max_element(curve.begin(), curve.end(), [](const SweepPoint& a, const SweepPoint& b) {
    return a.mean_accuracy < b.mean_accuracy;
  });
  PipelineConfig echo = cfg;
  echo.P.reset();
  Json j;
  j["dataset_id"] = ds.dataset_id;
  j["config"] = config_to_json(echo);
  j["points"] = points;
  j["best_p"] = best->P;
  write_text(out_dir / "sweep.csv", csv.str());
  write_text(out_dir / "sweep.json", j.dump(2) + "\n");
  out << "sweep-p points=" << curve.size() << " best_p=" << best->P
      << " best_accuracy=" << fixed(best->mean_accuracy) << " out=" << out_dir.string() << '\n';
  return 0;
}

TrialSet class_pair(const TrialSet& ds, int a, int b) {
  TrialSet out;
  out.channel_names = ds.channel_names;
  out.class_names = {ds.class_names[static_cast<std::size_t>(a)], ds.class_names[static_cast<std::size_t>(b)]};
  out.dataset_id = ds.dataset_id;
  for (const auto& t : ds.trials) {
    if (t.label != a && t.label != b) continue;
    auto copy = t;
    copy.label = t.label == a ? 0 : 1;
    out.trials.push_back(std::move(copy));
  }
  return out;
}

int cmd_pairwise(const std::string& manifest, const PipelineConfig& cfg, const fs::path& out_dir,
                 std::ostream& out) {
  const auto ds = load_manifest(manifest);
  const int K = ds.num_classes();
  if (K < 2) throw ConfigError("pairwise needs at least 2 classes");
  std::ostringstream csv;
  csv << "class_a,class_b,bfbtrca,mfbtrca,template_corr\n" << std::setprecision(10);
  int rows = 0;
  for (int a = 0; a < K; ++a) {
    for (int b = a + 1; b < K; ++b) {
      const auto pair = class_pair(ds, a, b);
      PipelineConfig bin = cfg;
      bin.variant = Variant::BinaryFBTRCA;
      PipelineConfig multi = cfg;
      multi.variant = Variant::MultiFBTRCA;
      const auto rb = kfold_evaluate(pair, bin);
      const auto rm = kfold_evaluate(pair, multi);
      csv << pair.class_names[0] << ',' << pair.class_names[1] << ',' << rb.mean_accuracy << ','
          << rm.mean_accuracy << ',' << rm.template_corr(0, 1) << '\n';
      ++rows;
    }
  }
  write_text(out_dir / "pairwise.csv", csv.str());
  write_text(out_dir / "config.json", config_to_json(cfg).dump(2) + "\n");
  out << "pairwise rows=" << rows << " out=" << out_dir.string() << '\n';
  return 0;
}

struct SynthFlags {
  std::string spec_file;
  std::string seed;
  double snr_db = 0.0;
  double jitter_s = 0.0;
  int classes = 0;
  int trials_per_class = 0;
  std::map<std::string, CLI::Option*> opts;
};

int cmd_synth(const SynthFlags& f, const fs::path& out_dir, std::ostream& out) {
  SynthSpec spec;
  if (f.opts.at("spec")->count()) spec = synth_spec_from_json(read_json(f.spec_file));
  if (f.opts.at("classes")->count()) spec.classes = f.classes;
  if (f.opts.at("trials")->count()) spec.trials_per_class = f.trials_per_class;
  if (f.opts.at("snr")->count()) spec.snr_db = f.snr_db;
  if (f.opts.at("jitter")->count()) spec.jitter_s = f.jitter_s;
  if (f.opts.at("seed")->count()) {
    spec.seed = parse_seed(f.seed, "--seed");
  } else if (!f.opts.at("spec")->count()) {
    if (const char* env = std::getenv(kSeedEnv); env != nullptr && *env != '\0') spec.seed = parse_seed(env, kSeedEnv);
  }
  spec.validate();
  const auto ds = generate_synthetic(spec);
  save_dataset(ds, out_dir);
  write_text(out_dir / "synth_spec.json", synth_spec_to_json(spec).dump(2) + "\n");
  out << "synth trials=" << ds.trials.size() << " classes=" << ds.num_classes() << " seed=" << spec.seed
      << " out=" << out_dir.string() << '\n';
  return 0;
}

int cmd_report(const fs::path& report_json, fs::path out_dir, std::ostream& out) {
  const Json j = read_json(report_json);
  if (out_dir.empty()) out_dir = report_json.parent_path();
  try {
    render_report_files(j, out_dir);
  } catch (const Json::exception& e) {
    throw DataError("malformed report " + report_json.string() + ": " + e.what());
  }
  out << "report out=" << out_dir.string() << '\n';
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Movement-related cortical potential decoding (TRCA + canonical correlation features)", "mrcp"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Expand all help");

  std::string manifest;
  std::string out_dir;

  auto* validate = app.add_subcommand("validate", "Check a dataset manifest and its trial files");
  validate->add_option("manifest", manifest, "manifest.json or its directory")->required();

  double cue_offset = 3.0;
  auto* onset_cmd = app.add_subcommand("onset", "Locate movement onsets from trajectories and reject trials");
  onset_cmd->add_option("manifest", manifest, "manifest.json or its directory")->required();
  onset_cmd->add_option("--out", out_dir, "output directory")->required();
  onset_cmd->add_option("--cue-offset", cue_offset, "cue time within each trajectory, seconds");

  std::string export_features;
  PipelineFlags eval_flags;
  auto* eval = app.add_subcommand("eval", "k-fold cross-validated decoding");
  eval->add_option("manifest", manifest, "manifest.json or its directory")->required();
  eval->add_option("--out", out_dir, "output directory")->required();
  eval->add_option("--export-features", export_features, "write every feature (fitted on all trials) as CSV");
  eval_flags.attach(eval);

  PipelineFlags sweep_flags;
  int p_min = 1, p_max = 0;
  auto* sweep = app.add_subcommand("sweep-p", "Accuracy as a function of P");
  sweep->add_option("manifest", manifest, "manifest.json or its directory")->required();
  sweep->add_option("--out", out_dir, "output directory")->required();
  sweep->add_option("--p-min", p_min, "smallest P");
  sweep->add_option("--p-max", p_max, "largest P (default: channel count)");
  sweep_flags.attach(sweep);

  PipelineFlags pair_flags;
  auto* pairwise = app.add_subcommand("pairwise", "Binary vs multiclass accuracy per class pair");
  pairwise->add_option("manifest", manifest, "manifest.json or its directory")->required();
  pairwise->add_option("--out", out_dir, "output directory")->required();
  pair_flags.attach(pairwise);

  SynthFlags synth_flags;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic MRCP dataset");
  synth->add_option("--out", out_dir, "output directory")->required();
  synth_flags.opts["spec"] = synth->add_option("--spec", synth_flags.spec_file, "JSON synthetic spec");
  synth_flags.opts["seed"] = synth->add_option("--seed", synth_flags.seed, "seed (fallback: $MRCP_DECODE_SEED)");
  synth_flags.opts["snr"] = synth->add_option("--snr-db", synth_flags.snr_db, "signal-to-noise ratio, dB");
  synth_flags.opts["jitter"] = synth->add_option("--jitter", synth_flags.jitter_s, "onset jitter, seconds");
  synth_flags.opts["classes"] = synth->add_option("--classes", synth_flags.classes, "number of classes");
  synth_flags.opts["trials"] = synth->add_option("--trials-per-class", synth_flags.trials_per_class, "trials per class");

  std::string report_path;
  auto* report = app.add_subcommand("report", "Re-render CSV and SVG files from report.json");
  report->add_option("report", report_path, "report.json")->required();
  report->add_option("--out", out_dir, "output directory (default: next to report.json)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    return report_error(err, "config", 1, e.what());
  }

  try {
    if (validate->parsed()) return cmd_validate(manifest, out);
    if (onset_cmd->parsed()) return cmd_onset(manifest, out_dir, cue_offset, out);
    if (eval->parsed()) return cmd_eval(manifest, eval_flags.build({}), out_dir, export_features, out);
    if (sweep->parsed()) {
      PipelineConfig base;
      base.variant = Variant::MultiSTRCA;
      return cmd_sweep(manifest, sweep_flags.build(base), p_min, p_max, out_dir, out);
    }
    if (pairwise->parsed()) return cmd_pairwise(manifest, pair_flags.build({}), out_dir, out);
    if (synth->parsed()) return cmd_synth(synth_flags, out_dir, out);
    if (report->parsed()) return cmd_report(report_path, out_dir, out);
  } catch (const Error& e) {
    return report_error(err, kind_name(e.kind()), e.exit_code(), e.what());
  } catch (const fs::filesystem_error& e) {
    return report_error(err, "data", 2, e.what());
  } catch (const std::exception& e) {
    return report_error(err, "internal", 3, e.what());
  }
  return report_error(err, "config", 1, "no subcommand");
}

}  // namespace mrcp::cli
