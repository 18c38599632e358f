#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mrcp/classify.hpp"
#include "mrcp/dataio.hpp"
#include "mrcp/features.hpp"
#include "mrcp/filterbank.hpp"
#include "mrcp/selection.hpp"
#include "mrcp/trca.hpp"

namespace mrcp {

enum class Variant { BinarySTRCA, BinaryFBTRCA, MultiSTRCA, MultiFBTRCA };
enum class ClassifierKind { Svm, Lda };
enum class EpochAlign { None, Onset };

std::string to_string(Variant v);
std::string to_string(ClassifierKind c);
std::string to_string(EpochAlign a);
Variant parse_variant(const std::string& s);
ClassifierKind parse_classifier(const std::string& s);
EpochAlign parse_align(const std::string& s);

inline bool is_binary(Variant v) { return v == Variant::BinarySTRCA || v == Variant::BinaryFBTRCA; }
inline bool is_filter_bank(Variant v) { return v == Variant::BinaryFBTRCA || v == Variant::MultiFBTRCA; }

/// k-grid entry standing for "all features".
inline constexpr int kAllFeatures = 0;

struct PipelineConfig {
  Variant variant = Variant::MultiFBTRCA;
  std::optional<int> P;              ///< eigenvectors per GEVD block; defaulted by resolve()
  ClassifierKind classifier = ClassifierKind::Svm;
  double c_reg = 1.0;
  std::optional<bool> banks;         ///< ten (0.5, h) bands vs. the single (0.5, 10) band
  std::optional<bool> selection;     ///< mRMR + inner-CV choice of k
  std::vector<int> k_grid = {5, 10, 15, 20, 30, 40, kAllFeatures};
  int folds = 10;
  int inner_folds = 5;
  std::uint64_t seed = 1;
  int jobs = 1;
  EpochAlign align = EpochAlign::None;
  double epoch_pre_s = 2.0;
  double epoch_post_s = 1.0;

  /// Fills defaults from the variant and data: P = 2 for binary variants,
  /// 3 for multiclass when every trial carries an onset, 6 otherwise.
  /// Throws ConfigError on invalid combinations.
  PipelineConfig resolved(const TrialSet& ds) const;
  int p() const { return P.value_or(0); }
  bool use_banks() const { return banks.value_or(is_filter_bank(variant)); }
  bool use_selection() const { return selection.value_or(is_filter_bank(variant)); }
};

/// Applies the epoch window from the config (onset alignment drops trials without an onset).
TrialSet apply_epoching(const TrialSet& ds, const PipelineConfig& cfg);

/// Z-normalized, band-filtered copies of every trial, one set per band.
/// Per-trial operations only, so sharing it across folds leaks nothing.
struct BandData {
  std::vector<BandSpec> bands;
  std::vector<std::vector<Matrix>> trials;  ///< [band][trial]
  std::vector<int> labels;
  int num_classes = 0;

  std::size_t num_trials() const { return labels.size(); }
};

BandData preprocess(const TrialSet& ds, bool use_banks);

/// Trial indices allowed to shape a model. Distinct from TestSide so test
/// trials cannot be handed to fitting code by accident.
class TrainSide {
 public:
  explicit TrainSide(std::vector<std::size_t> idx) : idx_(std::move(idx)) {}
  std::span<const std::size_t> indices() const { return idx_; }

 private:
  std::vector<std::size_t> idx_;
};

class TestSide {
 public:
  explicit TestSide(std::vector<std::size_t> idx) : idx_(std::move(idx)) {}
  std::span<const std::size_t> indices() const { return idx_; }

 private:
  std::vector<std::size_t> idx_;
};

struct FoldSplit {
  TrainSide train;
  TestSide test;
};

/// Seeded stratified assignment: each class is shuffled and dealt round-robin.
std::vector<int> stratified_fold_ids(std::span<const int> labels, int folds, std::uint64_t seed);
std::vector<FoldSplit> splits_from_fold_ids(std::span<const int> fold_ids, int folds);

/// Spatial filter, templates and projected templates for one band.
struct BankModel {
  BandSpec band;
  SpatialFilter filter;
  TemplateBank templates;
  Matrix offset_proj;                  ///< projected mean template (multiclass), else empty
  std::vector<Matrix> template_proj;   ///< per class, T x P'
  std::vector<Matrix> contrast_proj;   ///< per class, T x P'
};

BankModel fit_bank(const BandData& data, std::size_t band, const TrainSide& train,
                   const std::vector<int>& classes, Variant variant, int P);

/// Canonical correlation features of the given trials against fitted banks.
FeatureMatrix extract_features(std::span<const BankModel> banks, const BandData& data,
                               std::span<const std::size_t> trials, Variant variant);

using ClassifierModel = std::variant<MulticlassSvmModel, LdaModel>;

struct FoldModel {
  std::vector<int> classes;
  std::vector<BankModel> banks;
  std::vector<FeatureTag> all_tags;
  std::optional<FeatureRanking> ranking;
  std::vector<int> selected;   ///< feature columns fed to the classifier
  int k = 0;
  ClassifierModel classifier;

  std::vector<int> predict(const BandData& data, std::span<const std::size_t> trials) const;
  /// FNV-1a digest over every fitted number; equal models hash equally.
  std::uint64_t fingerprint() const;
};

FoldModel train_fold_model(const BandData& data, const TrainSide& train, const PipelineConfig& cfg,
                           std::uint64_t seed);

struct FoldResult {
  double accuracy = 0.0;
  std::vector<std::size_t> test_indices;
  std::vector<int> truth;
  std::vector<int> predictions;
  int k = 0;
  std::vector<FeatureTag> selected;
  std::uint64_t model_fingerprint = 0;
};

FoldResult run_fold(const BandData& data, const FoldSplit& split, const PipelineConfig& cfg,
                    std::uint64_t seed);

/// Convenience form on separate trial sets (same channels, rate and classes).
FoldResult run_fold(const TrialSet& train, const TrialSet& test, const PipelineConfig& cfg);

struct EvaluationReport {
  PipelineConfig config;
  std::string dataset_id;
  std::vector<std::string> class_names;
  std::vector<BandSpec> bands;
  std::vector<FoldResult> folds;
  std::vector<double> fold_accuracies;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  Matrix confusion;        ///< rows = truth, columns = prediction, row-normalized
  Matrix template_corr;    ///< K x K corr2 of spatially filtered grand averages
  std::size_t num_trials = 0;
  double wall_clock_s = 0.0;
};

EvaluationReport kfold_evaluate(const TrialSet& ds, const PipelineConfig& cfg);

/// Same, with caller-supplied fold ids (0..folds-1 per trial).
EvaluationReport kfold_evaluate(const TrialSet& ds, const PipelineConfig& cfg,
                                std::span<const int> fold_ids);

/// Every feature of every trial, with banks fitted on the whole dataset.
/// Descriptive export only; evaluation never uses it.
FeatureMatrix feature_table(const TrialSet& ds, const PipelineConfig& cfg);

struct SweepPoint {
  int P = 0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
};

/// k-fold accuracy for every P in [p_min, p_max]; the data are filtered once.
std::vector<SweepPoint> p_sweep(const TrialSet& ds, const PipelineConfig& cfg, int p_min, int p_max);

/// Rows = truth, columns = prediction, each non-empty row divided by its sum.
Matrix confusion(std::span<const int> predictions, std::span<const int> truth, int K);

/// Symmetric K x K corr2 between templates projected by W; unit diagonal.
Matrix template_corr_map(const TemplateBank& templates, const Matrix& W);

/// Runs fn(i) for i in [0, n) on up to `jobs` threads.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace mrcp
