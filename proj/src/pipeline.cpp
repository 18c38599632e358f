#include "mrcp/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstring>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <thread>

#include "mrcp/errors.hpp"

namespace mrcp {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 step
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string lower(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

ClassifierModel fit_classifier(const PipelineConfig& cfg, const Matrix& X, std::span<const int> y,
                               std::uint64_t seed) {
  if (cfg.classifier == ClassifierKind::Lda) return fit_lda(X, y);
  SvmOptions opts;
  opts.C = cfg.c_reg;
  opts.seed = seed;
  return fit_multiclass_svm(X, y, opts);
}

std::vector<int> predict_with(const ClassifierModel& model, const Matrix& X) {
  return std::visit([&](const auto& m) { return m.predict(X); }, model);
}

std::vector<int> resolve_k_grid(const std::vector<int>& grid, int n_features) {
  std::set<int> ks;
  for (int k : grid) {
    if (k == kAllFeatures) ks.insert(n_features);
    else if (k >= 1 && k <= n_features) ks.insert(k);
  }
  if (ks.empty()) ks.insert(n_features);
  return {ks.begin(), ks.end()};
}

std::vector<int> class_list(const BandData& data) {
  std::vector<int> out(static_cast<std::size_t>(data.num_classes));
  std::iota(out.begin(), out.end(), 0);
  return out;
}

std::vector<int> labels_of(const BandData& data, std::span<const std::size_t> idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(data.labels[i]);
  return out;
}

struct Fnv {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= c[i];
      h *= 0x100000001b3ULL;
    }
  }
  void mat(const Matrix& m) {
    const Eigen::Index r = m.rows(), c = m.cols();
    bytes(&r, sizeof r);
    bytes(&c, sizeof c);
    bytes(m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
  }
  void vec(const Vector& v) { mat(Matrix(v)); }
  template <typename T>
  void pod(const T& v) { bytes(&v, sizeof v); }
};

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::BinarySTRCA: return "bstrca";
    case Variant::BinaryFBTRCA: return "bfbtrca";
    case Variant::MultiSTRCA: return "mstrca";
    case Variant::MultiFBTRCA: return "mfbtrca";
  }
  return "?";
}

std::string to_string(ClassifierKind c) { return c == ClassifierKind::Svm ? "svm" : "lda"; }
std::string to_string(EpochAlign a) { return a == EpochAlign::Onset ? "onset" : "none"; }

Variant parse_variant(const std::string& s) {
  const auto k = lower(s);
  if (k == "bstrca") return Variant::BinarySTRCA;
  if (k == "bfbtrca") return Variant::BinaryFBTRCA;
  if (k == "mstrca") return Variant::MultiSTRCA;
  if (k == "mfbtrca") return Variant::MultiFBTRCA;
  throw ConfigError("unknown variant '" + s + "'");
}

ClassifierKind parse_classifier(const std::string& s) {
  const auto k = lower(s);
  if (k == "svm") return ClassifierKind::Svm;
  if (k == "lda") return ClassifierKind::Lda;
  throw ConfigError("unknown classifier '" + s + "'");
}

EpochAlign parse_align(const std::string& s) {
  const auto k = lower(s);
  if (k == "none" || k.empty()) return EpochAlign::None;
  if (k == "onset") return EpochAlign::Onset;
  throw ConfigError("unknown epoch alignment '" + s + "'");
}

PipelineConfig PipelineConfig::resolved(const TrialSet& ds) const {
  PipelineConfig c = *this;
  const auto C = ds.trials.empty() ? 0 : static_cast<int>(ds.trials.front().channels());
  if (!c.P) {
    if (is_binary(c.variant)) {
      c.P = 2;
    } else {
      const bool aligned = c.align == EpochAlign::Onset ||
                           (!ds.trials.empty() && std::all_of(ds.trials.begin(), ds.trials.end(),
                                                              [](const EegTrial& t) { return t.onset_sample.has_value(); }));
      c.P = aligned ? 3 : 6;
    }
    c.P = std::min(*c.P, std::max(C, 1));
  }
  if (*c.P < 1 || (C > 0 && *c.P > C)) {
    throw ConfigError("P=" + std::to_string(*c.P) + " outside [1, " + std::to_string(C) + "]");
  }
  if (c.folds < 2) throw ConfigError("folds must be >= 2");
  if (c.inner_folds < 2) throw ConfigError("inner folds must be >= 2");
  if (!(c.c_reg > 0.0)) throw ConfigError("c-reg must be positive");
  if (c.jobs < 1) throw ConfigError("jobs must be >= 1");
  if (is_binary(c.variant) && ds.num_classes() != 2) {
    throw ConfigError("variant " + to_string(c.variant) + " needs exactly 2 classes, dataset has " +
                      std::to_string(ds.num_classes()));
  }
  if (ds.num_classes() < 2) throw ConfigError("need at least 2 classes");
  c.banks = use_banks();
  c.selection = use_selection();
  for (int k : c.k_grid) {
    if (k < 0) throw ConfigError("k-grid entries must be positive or 'all'");
  }
  if (c.k_grid.empty()) c.k_grid = {kAllFeatures};
  return c;
}

TrialSet apply_epoching(const TrialSet& ds, const PipelineConfig& cfg) {
  if (cfg.align == EpochAlign::None) return ds;
  TrialSet out = ds;
  out.trials.clear();
  for (const auto& t : ds.trials) {
    if (!t.onset_sample) continue;
    out.trials.push_back(extract_window(t, *t.onset_sample, cfg.epoch_pre_s, cfg.epoch_post_s));
  }
  if (out.trials.empty()) throw DataError("no trial carries an onset for onset-aligned epoching");
  return out;
}

BandData preprocess(const TrialSet& ds, bool use_banks) {
  ds.validate();
  BandData out;
  out.num_classes = ds.num_classes();
  out.labels = ds.labels();
  const double fs = ds.sampling_rate();
  std::vector<BandpassFilter> filters;
  if (use_banks) {
    filters = make_filter_banks(fs).filters();
  } else {
    filters.push_back(make_broad_band(fs));
  }
  std::vector<Matrix> normalized;
  normalized.reserve(ds.trials.size());
  for (const auto& t : ds.trials) normalized.push_back(znormalize(t).data);
  for (const auto& f : filters) {
    out.bands.push_back(f.band());
    std::vector<Matrix> filtered;
    filtered.reserve(normalized.size());
    for (const auto& X : normalized) filtered.push_back(f.apply_zero_phase(X));
    out.trials.push_back(std::move(filtered));
  }
  return out;
}

std::vector<int> stratified_fold_ids(std::span<const int> labels, int folds, std::uint64_t seed) {
  if (folds < 2) throw ConfigError("folds must be >= 2");
  std::vector<int> ids(labels.size(), -1);
  const int K = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::mt19937_64 rng(seed);
  int offset = 0;
  for (int k = 0; k < K; ++k) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == k) members.push_back(i);
    }
    for (std::size_t i = members.size(); i > 1; --i) {
      std::swap(members[i - 1], members[static_cast<std::size_t>(rng() % i)]);
    }
    for (std::size_t j = 0; j < members.size(); ++j) {
      ids[members[j]] = static_cast<int>((static_cast<std::size_t>(offset) + j) % static_cast<std::size_t>(folds));
    }
    // Rotate the starting fold so remainders spread across folds.
    offset = static_cast<int>((static_cast<std::size_t>(offset) + members.size()) % static_cast<std::size_t>(folds));
  }
  return ids;
}

std::vector<FoldSplit> splits_from_fold_ids(std::span<const int> fold_ids, int folds) {
  std::vector<FoldSplit> out;
  for (int f = 0; f < folds; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < fold_ids.size(); ++i) {
      (fold_ids[i] == f ? test : train).push_back(i);
    }
    out.push_back(FoldSplit{TrainSide(std::move(train)), TestSide(std::move(test))});
  }
  return out;
}

BankModel fit_bank(const BandData& data, std::size_t band, const TrainSide& train,
                   const std::vector<int>& classes, Variant variant, int P) {
  BankModel m;
  m.band = data.bands[band];
  m.templates.bank = data.bands[band].index;
  std::vector<CovPair> covs;
  for (int label : classes) {
    std::vector<Matrix> members;
    for (auto i : train.indices()) {
      if (data.labels[i] == label) members.push_back(data.trials[band][i]);
    }
    if (members.empty()) throw DataError("class " + std::to_string(label) + " missing from training data");
    covs.push_back(class_covariances(members, label));
    m.templates.templates.push_back(grand_average(members));
    m.templates.labels.push_back(label);
  }

  const auto K = classes.size();
  if (is_binary(variant)) {
    if (K != 2) throw DataError("binary variant needs exactly 2 training classes");
    m.filter = fit_binary_filter(covs[0], covs[1], P);
    const Matrix& W = m.filter.W;
    for (std::size_t k = 0; k < 2; ++k) {
      m.template_proj.push_back(m.templates.templates[k].transpose() * W);
      m.contrast_proj.push_back((m.templates.templates[1 - k] - m.templates.templates[k]).transpose() * W);
    }
  } else {
    m.filter = fit_multiclass_filter(covs, P);
    const Matrix& W = m.filter.W;
    const auto centered = center_for_multiclass(m.templates.templates.front(), m.templates);
    m.offset_proj = m.templates.mean().transpose() * W;
    for (std::size_t k = 0; k < K; ++k) {
      m.template_proj.push_back(centered.templates[k].transpose() * W);
      m.contrast_proj.push_back(multiclass_contrast(centered.templates, k).transpose() * W);
    }
  }
  return m;
}

FeatureMatrix extract_features(std::span<const BankModel> banks, const BandData& data,
                               std::span<const std::size_t> trials, Variant variant) {
  FeatureMatrix out;
  std::size_t per_bank = 0;
  for (const auto& b : banks) per_bank += 3 * b.template_proj.size();
  out.values.resize(static_cast<Eigen::Index>(trials.size()), static_cast<Eigen::Index>(per_bank));
  for (const auto& b : banks) {
    for (std::size_t k = 0; k < b.template_proj.size(); ++k) {
      for (auto rho : {RhoType::Rho1, RhoType::Rho2, RhoType::Rho3}) {
        out.tags.push_back({b.band.index, b.templates.labels[k], rho});
      }
    }
  }
  std::vector<std::size_t> band_of;
  std::vector<std::vector<PreparedClass>> prepared;
  for (const auto& b : banks) {
    const auto it = std::find_if(data.bands.begin(), data.bands.end(),
                                 [&](const BandSpec& s) { return s.index == b.band.index; });
    if (it == data.bands.end()) throw std::invalid_argument("extract_features: band not in data");
    band_of.push_back(static_cast<std::size_t>(it - data.bands.begin()));
    auto& cls = prepared.emplace_back();
    for (std::size_t k = 0; k < b.template_proj.size(); ++k) {
      cls.push_back(prepare_class(b.template_proj[k], b.contrast_proj[k]));
    }
  }
  for (std::size_t r = 0; r < trials.size(); ++r) {
    const std::size_t i = trials[r];
    out.labels.push_back(data.labels[i]);
    Eigen::Index col = 0;
    for (std::size_t bi = 0; bi < banks.size(); ++bi) {
      const auto& b = banks[bi];
      Matrix Y = data.trials[band_of[bi]][i].transpose() * b.filter.W;
      if (!is_binary(variant)) Y -= b.offset_proj;
      for (std::size_t k = 0; k < b.template_proj.size(); ++k) {
        const auto t = ccp_triplet_projected(Y, prepared[bi][k]);
        out.values(static_cast<Eigen::Index>(r), col++) = t.rho1;
        out.values(static_cast<Eigen::Index>(r), col++) = t.rho2;
        out.values(static_cast<Eigen::Index>(r), col++) = t.rho3;
      }
    }
  }
  return out;
}

std::vector<int> FoldModel::predict(const BandData& data, std::span<const std::size_t> trials) const {
  const auto variant = banks.empty() || banks.front().filter.variant == FilterVariant::Binary
                           ? Variant::BinarySTRCA
                           : Variant::MultiSTRCA;
  const auto F = extract_features(banks, data, trials, variant);
  return predict_with(classifier, select_columns(F, selected).values);
}

std::uint64_t FoldModel::fingerprint() const {
  Fnv h;
  for (int c : classes) h.pod(c);
  for (const auto& b : banks) {
    h.mat(b.filter.W);
    h.vec(b.filter.eigenvalues);
    for (const auto& t : b.templates.templates) h.mat(t);
  }
  if (ranking) {
    for (int o : ranking->order) h.pod(o);
  }
  for (int s : selected) h.pod(s);
  h.pod(k);
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, MulticlassSvmModel>) {
          h.vec(m.standardizer.mean);
          h.vec(m.standardizer.scale);
          for (const auto& p : m.pairs) {
            h.vec(p.w);
            h.pod(p.bias);
          }
        } else {
          h.mat(m.coef);
          h.vec(m.intercept);
        }
      },
      classifier);
  return h.h;
}

namespace {

std::vector<BankModel> fit_banks(const BandData& data, const TrainSide& train,
                                 const std::vector<int>& classes, const PipelineConfig& cfg) {
  std::vector<BankModel> banks;
  for (std::size_t b = 0; b < data.bands.size(); ++b) {
    banks.push_back(fit_bank(data, b, train, classes, cfg.variant, cfg.p()));
  }
  return banks;
}

// Inner stratified CV over the training side only.
int choose_k(const BandData& data, const TrainSide& train, const std::vector<int>& classes,
             const PipelineConfig& cfg, int n_features, std::uint64_t seed) {
  const auto grid = resolve_k_grid(cfg.k_grid, n_features);
  if (grid.size() == 1) return grid.front();
  const auto outer = train.indices();
  const auto inner_labels = labels_of(data, outer);
  const auto ids = stratified_fold_ids(inner_labels, cfg.inner_folds, mix_seed(seed, 17));
  std::vector<int> correct(grid.size(), 0);
  for (int f = 0; f < cfg.inner_folds; ++f) {
    std::vector<std::size_t> tr, va;
    for (std::size_t j = 0; j < outer.size(); ++j) (ids[j] == f ? va : tr).push_back(outer[j]);
    if (va.empty()) continue;
    const TrainSide inner_train(std::move(tr));
    const auto banks = fit_banks(data, inner_train, classes, cfg);
    const auto Ftr = extract_features(banks, data, inner_train.indices(), cfg.variant);
    const auto Fva = extract_features(banks, data, va, cfg.variant);
    const auto ranking = mrmr_rank(Ftr);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const std::span<const int> cols(ranking.order.data(), static_cast<std::size_t>(grid[g]));
      const auto model = fit_classifier(cfg, select_columns(Ftr, cols).values, Ftr.labels,
                                        mix_seed(seed, 100 + static_cast<std::uint64_t>(f)));
      const auto pred = predict_with(model, select_columns(Fva, cols).values);
      for (std::size_t r = 0; r < pred.size(); ++r) correct[g] += pred[r] == Fva.labels[r] ? 1 : 0;
    }
  }
  std::size_t best = 0;
  for (std::size_t g = 1; g < grid.size(); ++g) {
    if (correct[g] > correct[best]) best = g;
  }
  return grid[best];
}

}  // namespace

FoldModel train_fold_model(const BandData& data, const TrainSide& train, const PipelineConfig& cfg,
                           std::uint64_t seed) {
  FoldModel m;
  m.classes = is_binary(cfg.variant) ? std::vector<int>{0, 1} : class_list(data);
  {
    std::set<int> present;
    for (auto i : train.indices()) present.insert(data.labels[i]);
    for (int c : m.classes) {
      if (!present.count(c)) throw DataError("class " + std::to_string(c) + " missing from training fold");
    }
  }
  m.banks = fit_banks(data, train, m.classes, cfg);
  const auto F = extract_features(m.banks, data, train.indices(), cfg.variant);
  m.all_tags = F.tags;
  const int n_features = static_cast<int>(F.cols());
  if (cfg.use_selection()) {
    m.k = choose_k(data, train, m.classes, cfg, n_features, seed);
    m.ranking = mrmr_rank(F);
    m.selected.assign(m.ranking->order.begin(), m.ranking->order.begin() + m.k);
  } else {
    m.k = n_features;
    m.selected.resize(static_cast<std::size_t>(n_features));
    std::iota(m.selected.begin(), m.selected.end(), 0);
  }
  m.classifier = fit_classifier(cfg, select_columns(F, m.selected).values, F.labels, mix_seed(seed, 1));
  return m;
}

FoldResult run_fold(const BandData& data, const FoldSplit& split, const PipelineConfig& cfg,
                    std::uint64_t seed) {
  if (split.test.indices().empty()) throw DataError("empty test fold");
  const auto model = train_fold_model(data, split.train, cfg, seed);
  FoldResult r;
  r.test_indices.assign(split.test.indices().begin(), split.test.indices().end());
  r.truth = labels_of(data, split.test.indices());
  r.predictions = model.predict(data, split.test.indices());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < r.truth.size(); ++i) hits += r.truth[i] == r.predictions[i] ? 1 : 0;
  r.accuracy = static_cast<double>(hits) / static_cast<double>(r.truth.size());
  r.k = model.k;
  for (int c : model.selected) r.selected.push_back(model.all_tags[static_cast<std::size_t>(c)]);
  r.model_fingerprint = model.fingerprint();
  return r;
}

FoldResult run_fold(const TrialSet& train, const TrialSet& test, const PipelineConfig& cfg) {
  if (test.trials.empty()) throw DataError("empty test set");
  if (train.class_names != test.class_names) throw DataError("train and test class lists differ");
  TrialSet joint = train;
  joint.trials.insert(joint.trials.end(), test.trials.begin(), test.trials.end());
  const auto rc = cfg.resolved(joint);
  const auto data = preprocess(joint, rc.use_banks());
  std::vector<std::size_t> tr(train.trials.size()), te(test.trials.size());
  std::iota(tr.begin(), tr.end(), std::size_t{0});
  std::iota(te.begin(), te.end(), train.trials.size());
  return run_fold(data, FoldSplit{TrainSide(std::move(tr)), TestSide(std::move(te))}, rc, rc.seed);
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const auto workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

Matrix confusion(std::span<const int> predictions, std::span<const int> truth, int K) {
  if (predictions.size() != truth.size()) throw std::invalid_argument("confusion: length mismatch");
  Matrix m = Matrix::Zero(K, K);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= K || predictions[i] < 0 || predictions[i] >= K) {
      throw DataError("confusion: label outside 0.." + std::to_string(K - 1));
    }
    m(truth[i], predictions[i]) += 1.0;
  }
  for (Eigen::Index r = 0; r < K; ++r) {
    const double s = m.row(r).sum();
    if (s > 0) m.row(r) /= s;
  }
  return m;
}

Matrix template_corr_map(const TemplateBank& templates, const Matrix& W) {
  const auto K = static_cast<Eigen::Index>(templates.size());
  std::vector<Matrix> proj;
  for (const auto& t : templates.templates) proj.push_back(t.transpose() * W);
  Matrix m = Matrix::Identity(K, K);
  for (Eigen::Index i = 0; i < K; ++i) {
    for (Eigen::Index j = i + 1; j < K; ++j) {
      double r = 0.0;
      try {
        r = corr2(proj[static_cast<std::size_t>(i)], proj[static_cast<std::size_t>(j)]);
      } catch (const NumericError&) {
        r = 0.0;
      }
      m(i, j) = m(j, i) = r;
    }
  }
  return m;
}

namespace {

EvaluationReport evaluate_prepared(const BandData& data, const PipelineConfig& rc,
                                   std::span<const int> fold_ids) {
  const auto splits = splits_from_fold_ids(fold_ids, rc.folds);
  for (const auto& s : splits) {
    if (s.test.indices().empty()) throw DataError("a fold received no test trials");
  }
  EvaluationReport rep;
  rep.config = rc;
  rep.bands = data.bands;
  rep.num_trials = data.num_trials();
  rep.folds.resize(splits.size());
  parallel_for(splits.size(), rc.jobs, [&](std::size_t f) {
    rep.folds[f] = run_fold(data, splits[f], rc, mix_seed(rc.seed, 1000 + f));
  });
  std::vector<int> pred, truth;
  for (const auto& f : rep.folds) {
    rep.fold_accuracies.push_back(f.accuracy);
    pred.insert(pred.end(), f.predictions.begin(), f.predictions.end());
    truth.insert(truth.end(), f.truth.begin(), f.truth.end());
  }
  rep.mean_accuracy = mean_of(rep.fold_accuracies);
  rep.std_accuracy = sample_std(rep.fold_accuracies);
  rep.confusion = confusion(pred, truth, data.num_classes);
  return rep;
}

void check_fold_capacity(const TrialSet& ds, int folds) {
  const auto counts = ds.class_counts();
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] < folds) {
      throw DataError("class '" + ds.class_names[k] + "' has " + std::to_string(counts[k]) +
                      " trials, fewer than " + std::to_string(folds) + " folds");
    }
  }
}

// Descriptive map on all trials in the broadest band with the pooled filter.
Matrix descriptive_corr_map(const BandData& data, int P) {
  const std::size_t band = data.bands.size() - 1;
  std::vector<std::size_t> all(data.num_trials());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const auto m = fit_bank(data, band, TrainSide(all), class_list(data), Variant::MultiSTRCA, P);
  return template_corr_map(m.templates, m.filter.W);
}

}  // namespace

EvaluationReport kfold_evaluate(const TrialSet& ds, const PipelineConfig& cfg) {
  const auto epoched = apply_epoching(ds, cfg);
  const auto rc = cfg.resolved(epoched);
  const auto ids = stratified_fold_ids(epoched.labels(), rc.folds, rc.seed);
  PipelineConfig no_align = rc;
  no_align.align = EpochAlign::None;
  auto rep = kfold_evaluate(epoched, no_align, ids);
  rep.config = rc;
  return rep;
}

EvaluationReport kfold_evaluate(const TrialSet& ds, const PipelineConfig& cfg,
                                std::span<const int> fold_ids) {
  const auto start = std::chrono::steady_clock::now();
  const auto epoched = apply_epoching(ds, cfg);
  if (fold_ids.size() != epoched.trials.size()) throw DataError("fold id count does not match trials");
  const auto rc = cfg.resolved(epoched);
  check_fold_capacity(epoched, rc.folds);
  const auto data = preprocess(epoched, rc.use_banks());
  auto rep = evaluate_prepared(data, rc, fold_ids);
  rep.dataset_id = epoched.dataset_id;
  rep.class_names = epoched.class_names;
  rep.template_corr = descriptive_corr_map(data, is_binary(rc.variant) ? std::min(2 * rc.p(), static_cast<int>(epoched.trials.front().channels())) : rc.p());
  rep.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

FeatureMatrix feature_table(const TrialSet& ds, const PipelineConfig& cfg) {
  const auto epoched = apply_epoching(ds, cfg);
  const auto rc = cfg.resolved(epoched);
  const auto data = preprocess(epoched, rc.use_banks());
  std::vector<std::size_t> all(data.num_trials());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const TrainSide train(all);
  const auto banks = fit_banks(data, train, class_list(data), rc);
  return extract_features(banks, data, all, rc.variant);
}

std::vector<SweepPoint> p_sweep(const TrialSet& ds, const PipelineConfig& cfg, int p_min, int p_max) {
  const auto epoched = apply_epoching(ds, cfg);
  const int C = static_cast<int>(epoched.trials.front().channels());
  if (p_min < 1 || p_max > C || p_min > p_max) {
    throw ConfigError("P range [" + std::to_string(p_min) + ", " + std::to_string(p_max) + "] invalid for C=" +
                      std::to_string(C));
  }
  PipelineConfig base = cfg;
  base.P = p_min;
  const auto rc0 = base.resolved(epoched);
  check_fold_capacity(epoched, rc0.folds);
  const auto data = preprocess(epoched, rc0.use_banks());
  const auto ids = stratified_fold_ids(epoched.labels(), rc0.folds, rc0.seed);
  std::vector<SweepPoint> out;
  for (int P = p_min; P <= p_max; ++P) {
    PipelineConfig c = rc0;
    c.P = P;
    const auto rep = evaluate_prepared(data, c, ids);
    out.push_back({P, rep.mean_accuracy, rep.std_accuracy});
  }
  return out;
}

}  // namespace mrcp
