#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mrcp/numerics.hpp"

namespace mrcp {

/// Per-feature affine map to zero mean and unit population variance, fitted on training rows.
struct Standardizer {
  Vector mean;
  Vector scale;

  static Standardizer fit(const Matrix& X);
  static Standardizer identity(Eigen::Index d);
  Matrix apply(const Matrix& X) const;
};

struct SvmOptions {
  double C = 1.0;
  double gap_tolerance = 1e-6;
  int max_epochs = 20000;
  std::uint64_t seed = 0x5eed;
  bool standardize = true;
};

/// Soft-margin linear SVM with the bias folded into the weight vector as a
/// constant feature. decision(x) > 0 means positive_label.
struct LinearSvmModel {
  Vector w;
  double bias = 0.0;
  double C = 1.0;
  int positive_label = 0;
  int negative_label = 1;
  Standardizer standardizer;
  double duality_gap = 0.0;
  double dual_objective = 0.0;
  int epochs = 0;

  Vector decision(const Matrix& X) const;
  std::vector<int> predict(const Matrix& X) const;
};

/// Dual coordinate descent; the lower of the two labels becomes positive_label.
/// Throws DataError unless exactly two classes are present.
LinearSvmModel fit_linear_svm(const Matrix& X, std::span<const int> y, const SvmOptions& opts = {});

struct MulticlassSvmModel {
  std::vector<int> classes;               ///< ascending
  std::vector<LinearSvmModel> pairs;      ///< (i, j), i < j, lexicographic
  Standardizer standardizer;

  std::vector<int> predict(const Matrix& X) const;
};

/// One-vs-one. Votes, then summed signed decision values, then lowest label.
MulticlassSvmModel fit_multiclass_svm(const Matrix& X, std::span<const int> y,
                                      const SvmOptions& opts = {});

struct LdaModel {
  std::vector<int> classes;
  Matrix means;        ///< K x d
  Matrix precision;    ///< inverse of the ridged pooled covariance
  Vector log_priors;
  Matrix coef;         ///< K x d
  Vector intercept;    ///< K

  Vector scores(const Eigen::Ref<const Vector>& x) const;
  std::vector<int> predict(const Matrix& X) const;
};

/// Equal-covariance Gaussian discriminant, ridge 1e-6 * trace / d on the pooled covariance.
LdaModel fit_lda(const Matrix& X, std::span<const int> y);
std::vector<int> predict_lda(const LdaModel& model, const Matrix& X);

}  // namespace mrcp
