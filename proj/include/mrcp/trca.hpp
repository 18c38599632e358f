#pragma once

#include <span>
#include <vector>

#include "mrcp/numerics.hpp"

namespace mrcp {

/// Summed inter-trial (S) and self-trial (Q) covariances of one class.
struct CovPair {
  Matrix S;
  Matrix Q;
  int label = 0;
  int trial_count = 0;
};

enum class FilterVariant { Binary, Multiclass };

struct SpatialFilter {
  Matrix W;  ///< C x 2P (binary) or C x P (multiclass)
  FilterVariant variant = FilterVariant::Multiclass;
  int P = 0;
  Vector eigenvalues;  ///< concatenated per block, each block descending
};

/// Q = sum_i X_i X_i^T and S = sum_{i<j} (X_i X_j^T + X_j X_i^T), the latter
/// through S = X_sum X_sum^T - Q. Throws DataError for fewer than two trials
/// or mismatched shapes.
CovPair class_covariances(std::span<const Matrix> trials, int label = 0);

/// Per-class GEVD, top-P eigenvectors of each class concatenated (C x 2P).
SpatialFilter fit_binary_filter(const CovPair& first, const CovPair& second, int P);

/// Single GEVD on the class-summed covariances (C x P regardless of K).
SpatialFilter fit_multiclass_filter(std::span<const CovPair> covs, int P);

}  // namespace mrcp
