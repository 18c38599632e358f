#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrcp/onset.hpp"
#include "mrcp/pipeline.hpp"
#include "mrcp/synthetic.hpp"

namespace mrcp {

using Json = nlohmann::json;

/// Config keys mirror the CLI flags: variant, p, classifier, c_reg, banks,
/// selection, k_grid, folds, inner_folds, seed, jobs, align, epoch_pre_s, epoch_post_s.
/// Unknown keys raise ConfigError.
PipelineConfig config_from_json(const Json& j, PipelineConfig base = {});
Json config_to_json(const PipelineConfig& cfg);

/// Keys: classes, trials_per_class, channels, samples, sampling_rate, snr_db
/// (number or "inf"), seed, onset_s, jitter_s, noise_sources, class_names,
/// templates [[{amplitude, latency_s, width_s}, ...], ...].
SynthSpec synth_spec_from_json(const Json& j);
Json synth_spec_to_json(const SynthSpec& spec);

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

/// Everything except wall-clock time is a deterministic function of data and config.
Json report_to_json(const EvaluationReport& rep);

std::string confusion_csv(const Matrix& confusion, const std::vector<std::string>& class_names);
std::string features_csv(const FeatureMatrix& F);

/// Heatmap with a fixed color scale [lo, hi], one labeled cell per entry.
std::string heatmap_svg(const Matrix& m, const std::vector<std::string>& labels, double lo, double hi,
                        const std::string& title);

/// report.json, confusion.csv, confusion.svg, template_corr.svg, folds.csv.
void write_report_bundle(const EvaluationReport& rep, const std::filesystem::path& out_dir);

/// Re-renders CSV and SVG files from an existing report.json.
void render_report_files(const Json& report, const std::filesystem::path& out_dir);

Json onset_decision_to_json(const onset::OnsetDecision& d);

void write_text(const std::filesystem::path& path, const std::string& text);
Json read_json(const std::filesystem::path& path);

}  // namespace mrcp
