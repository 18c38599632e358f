#include "mrcp/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mrcp/errors.hpp"

namespace mrcp {

std::vector<int> discretize(std::span<const double> column, int bins) {
  if (bins < 2) throw std::invalid_argument("discretize: bins must be >= 2");
  const std::size_t n = column.size();
  std::vector<int> out(n, 0);
  if (n == 0) return out;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return column[a] < column[b]; });
  std::size_t group_start = 0;
  for (std::size_t r = 0; r < n; ++r) {
    if (r > 0 && column[idx[r]] != column[idx[r - 1]]) group_start = r;
    out[idx[r]] = static_cast<int>(group_start * static_cast<std::size_t>(bins) / n);
  }
  return out;
}

double mutual_information(std::span<const int> x, std::span<const int> y) {
  if (x.size() != y.size()) throw std::invalid_argument("mutual_information: length mismatch");
  if (x.empty()) return 0.0;
  const int nx = *std::max_element(x.begin(), x.end()) + 1;
  const int ny = *std::max_element(y.begin(), y.end()) + 1;
  if (*std::min_element(x.begin(), x.end()) < 0 || *std::min_element(y.begin(), y.end()) < 0) {
    throw std::invalid_argument("mutual_information: symbols must be non-negative");
  }
  std::vector<double> joint(static_cast<std::size_t>(nx * ny), 0.0);
  std::vector<double> px(static_cast<std::size_t>(nx), 0.0);
  std::vector<double> py(static_cast<std::size_t>(ny), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    joint[static_cast<std::size_t>(x[i] * ny + y[i])] += 1.0;
    px[static_cast<std::size_t>(x[i])] += 1.0;
    py[static_cast<std::size_t>(y[i])] += 1.0;
  }
  const double n = static_cast<double>(x.size());
  double mi = 0.0;
  for (int a = 0; a < nx; ++a) {
    for (int b = 0; b < ny; ++b) {
      const double c = joint[static_cast<std::size_t>(a * ny + b)];
      if (c > 0.0) mi += (c / n) * std::log(c * n / (px[static_cast<std::size_t>(a)] * py[static_cast<std::size_t>(b)]));
    }
  }
  return std::max(mi, 0.0);
}

FeatureRanking mrmr_rank(const FeatureMatrix& F, int bins) {
  const auto n_features = static_cast<int>(F.cols());
  if (n_features < 1) throw DataError("mrmr_rank: no features");
  if (static_cast<Eigen::Index>(F.labels.size()) != F.rows()) {
    throw std::invalid_argument("mrmr_rank: label count does not match rows");
  }

  std::vector<std::vector<int>> columns(static_cast<std::size_t>(n_features));
  std::vector<double> column_buf(static_cast<std::size_t>(F.rows()));
  for (int f = 0; f < n_features; ++f) {
    for (Eigen::Index r = 0; r < F.rows(); ++r) column_buf[static_cast<std::size_t>(r)] = F.values(r, f);
    columns[static_cast<std::size_t>(f)] = discretize(column_buf, bins);
  }
  std::vector<double> relevance(static_cast<std::size_t>(n_features));
  for (int f = 0; f < n_features; ++f) {
    relevance[static_cast<std::size_t>(f)] = mutual_information(columns[static_cast<std::size_t>(f)], F.labels);
  }

  FeatureRanking out;
  std::vector<double> redundancy(static_cast<std::size_t>(n_features), 0.0);
  std::vector<bool> picked(static_cast<std::size_t>(n_features), false);
  for (int step = 0; step < n_features; ++step) {
    int best = -1;
    double best_score = 0.0;
    for (int f = 0; f < n_features; ++f) {
      if (picked[static_cast<std::size_t>(f)]) continue;
      const double score = step == 0 ? relevance[static_cast<std::size_t>(f)]
                                     : relevance[static_cast<std::size_t>(f)] -
                                           redundancy[static_cast<std::size_t>(f)] / static_cast<double>(step);
      if (best < 0 || score > best_score) {
        best = f;
        best_score = score;
      }
    }
    picked[static_cast<std::size_t>(best)] = true;
    out.order.push_back(best);
    out.scores.push_back(best_score);
    for (int f = 0; f < n_features; ++f) {
      if (!picked[static_cast<std::size_t>(f)]) {
        redundancy[static_cast<std::size_t>(f)] +=
            mutual_information(columns[static_cast<std::size_t>(f)], columns[static_cast<std::size_t>(best)]);
      }
    }
  }
  return out;
}

FeatureMatrix select_columns(const FeatureMatrix& F, std::span<const int> columns) {
  FeatureMatrix out;
  out.labels = F.labels;
  out.values.resize(F.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const int c = columns[j];
    if (c < 0 || c >= F.cols()) throw std::out_of_range("select_columns: column out of range");
    out.values.col(static_cast<Eigen::Index>(j)) = F.values.col(c);
    out.tags.push_back(F.tags.empty() ? FeatureTag{} : F.tags[static_cast<std::size_t>(c)]);
  }
  return out;
}

FeatureMatrix select_top_k(const FeatureMatrix& F, const FeatureRanking& ranking, int k) {
  if (k < 1 || k > static_cast<int>(ranking.order.size())) {
    throw std::out_of_range("select_top_k: k out of range");
  }
  return select_columns(F, std::span<const int>(ranking.order.data(), static_cast<std::size_t>(k)));
}

}  // namespace mrcp
