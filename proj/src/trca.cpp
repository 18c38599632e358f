#include "mrcp/trca.hpp"

#include <string>

#include "mrcp/errors.hpp"

namespace mrcp {

CovPair class_covariances(std::span<const Matrix> trials, int label) {
  if (trials.size() < 2) {
    throw DataError("class " + std::to_string(label) + " needs at least 2 trials for covariances");
  }
  const auto C = trials.front().rows();
  const auto T = trials.front().cols();
  Matrix sum = Matrix::Zero(C, T);
  CovPair out;
  out.Q = Matrix::Zero(C, C);
  for (const auto& X : trials) {
    if (X.rows() != C || X.cols() != T) throw DataError("trials differ in shape");
    sum += X;
    out.Q.selfadjointView<Eigen::Lower>().rankUpdate(X);
  }
  out.Q = out.Q.selfadjointView<Eigen::Lower>();
  Matrix total = Matrix::Zero(C, C);
  total.selfadjointView<Eigen::Lower>().rankUpdate(sum);
  out.S = Matrix(total.selfadjointView<Eigen::Lower>()) - out.Q;
  out.label = label;
  out.trial_count = static_cast<int>(trials.size());
  return out;
}

SpatialFilter fit_binary_filter(const CovPair& first, const CovPair& second, int P) {
  if (first.S.rows() != second.S.rows()) throw DataError("class covariances differ in size");
  const auto a = sym_generalized_eig(first.S, first.Q, P);
  const auto b = sym_generalized_eig(second.S, second.Q, P);
  SpatialFilter out;
  out.variant = FilterVariant::Binary;
  out.P = P;
  out.W.resize(first.S.rows(), 2 * P);
  out.W << a.eigenvectors, b.eigenvectors;
  out.eigenvalues.resize(2 * P);
  out.eigenvalues << a.eigenvalues, b.eigenvalues;
  return out;
}

SpatialFilter fit_multiclass_filter(std::span<const CovPair> covs, int P) {
  if (covs.size() < 2) throw DataError("multiclass filter needs at least 2 classes");
  Matrix S = covs.front().S;
  Matrix Q = covs.front().Q;
  for (std::size_t k = 1; k < covs.size(); ++k) {
    if (covs[k].S.rows() != S.rows()) throw DataError("class covariances differ in size");
    S += covs[k].S;
    Q += covs[k].Q;
  }
  const auto g = sym_generalized_eig(S, Q, P);
  SpatialFilter out;
  out.variant = FilterVariant::Multiclass;
  out.P = P;
  out.W = g.eigenvectors;
  out.eigenvalues = g.eigenvalues;
  return out;
}

}  // namespace mrcp
