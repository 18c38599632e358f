#pragma once

#include <span>
#include <vector>

#include "mrcp/features.hpp"
#include "mrcp/numerics.hpp"

namespace mrcp {

/// trials x F feature values with per-column provenance.
struct FeatureMatrix {
  Matrix values;
  std::vector<FeatureTag> tags;
  std::vector<int> labels;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

struct FeatureRanking {
  std::vector<int> order;      ///< column indices, best first
  std::vector<double> scores;  ///< mRMR score at the step each column was picked
};

inline constexpr int kDefaultBins = 8;

/// Equal-frequency binning by rank; tied values share the lowest bin any of them reaches.
std::vector<int> discretize(std::span<const double> column, int bins);

/// Plug-in estimate from the joint histogram, in nats. Inputs must be non-negative.
double mutual_information(std::span<const int> x, std::span<const int> y);

/// Greedy minimum-redundancy maximum-relevance ranking (difference form).
/// Ties go to the lowest column index.
FeatureRanking mrmr_rank(const FeatureMatrix& F, int bins = kDefaultBins);

/// First k ranked columns, in ranking order.
FeatureMatrix select_top_k(const FeatureMatrix& F, const FeatureRanking& ranking, int k);

/// Column subset in the given order.
FeatureMatrix select_columns(const FeatureMatrix& F, std::span<const int> columns);

}  // namespace mrcp
