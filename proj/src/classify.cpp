#include "mrcp/classify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include "mrcp/errors.hpp"

namespace mrcp {

namespace {

std::vector<int> distinct(std::span<const int> y) {
  std::set<int> s(y.begin(), y.end());
  return {s.begin(), s.end()};
}

}  // namespace

Standardizer Standardizer::fit(const Matrix& X) {
  Standardizer s;
  s.mean = X.colwise().mean().transpose();
  s.scale.resize(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double sd = std::sqrt((X.col(j).array() - s.mean(j)).square().mean());
    s.scale(j) = sd > 1e-12 ? sd : 1.0;
  }
  // Constant columns map to zero.
  return s;
}

Standardizer Standardizer::identity(Eigen::Index d) {
  return Standardizer{Vector::Zero(d), Vector::Ones(d)};
}

Matrix Standardizer::apply(const Matrix& X) const {
  if (X.cols() != mean.size()) throw std::invalid_argument("Standardizer: feature count mismatch");
  return (X.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

Vector LinearSvmModel::decision(const Matrix& X) const {
  return (standardizer.apply(X) * w).array() + bias;
}

std::vector<int> LinearSvmModel::predict(const Matrix& X) const {
  const Vector d = decision(X);
  std::vector<int> out(static_cast<std::size_t>(d.size()));
  for (Eigen::Index i = 0; i < d.size(); ++i) out[static_cast<std::size_t>(i)] = d(i) >= 0 ? positive_label : negative_label;
  return out;
}

LinearSvmModel fit_linear_svm(const Matrix& X, std::span<const int> y, const SvmOptions& opts) {
  if (static_cast<Eigen::Index>(y.size()) != X.rows()) throw std::invalid_argument("fit_linear_svm: label count");
  if (X.cols() < 1) throw DataError("fit_linear_svm: no features");
  const auto classes = distinct(y);
  if (classes.size() != 2) throw DataError("binary SVM needs exactly two classes");

  LinearSvmModel m;
  m.C = opts.C;
  m.positive_label = classes[0];
  m.negative_label = classes[1];
  m.standardizer = opts.standardize ? Standardizer::fit(X) : Standardizer::identity(X.cols());
  const Matrix Z = m.standardizer.apply(X);
  const Eigen::Index n = Z.rows();
  const Eigen::Index d = Z.cols();

  // Augmented rows [z, 1]; the last weight is the bias.
  Matrix A(n, d + 1);
  A << Z, Vector::Ones(n);
  Vector yy(n);
  for (Eigen::Index i = 0; i < n; ++i) yy(i) = y[static_cast<std::size_t>(i)] == m.positive_label ? 1.0 : -1.0;
  const Vector qdiag = A.rowwise().squaredNorm();

  Vector alpha = Vector::Zero(n);
  Vector w = Vector::Zero(d + 1);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(opts.seed);

  double primal = 0.0, dual = 0.0;
  for (int epoch = 1; epoch <= opts.max_epochs; ++epoch) {
    m.epochs = epoch;
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);
    }
    for (const Eigen::Index i : order) {
      const double G = yy(i) * A.row(i).dot(w) - 1.0;
      double pg = G;
      if (alpha(i) <= 0.0) pg = std::min(G, 0.0);
      else if (alpha(i) >= opts.C) pg = std::max(G, 0.0);
      if (std::abs(pg) > 1e-14 && qdiag(i) > 0.0) {
        const double old = alpha(i);
        alpha(i) = std::clamp(old - G / qdiag(i), 0.0, opts.C);
        w += (alpha(i) - old) * yy(i) * A.row(i).transpose();
      }
    }
    const double wnorm2 = w.squaredNorm();
    const Vector margins = (A * w).cwiseProduct(yy);
    primal = 0.5 * wnorm2 + opts.C * (1.0 - margins.array()).max(0.0).sum();
    dual = alpha.sum() - 0.5 * wnorm2;
    if (primal - dual <= opts.gap_tolerance * std::abs(dual)) break;
  }
  m.w = w.head(d);
  m.bias = w(d);
  m.duality_gap = primal - dual;
  m.dual_objective = dual;
  return m;
}

std::vector<int> MulticlassSvmModel::predict(const Matrix& X) const {
  const Matrix Z = standardizer.apply(X);
  const auto K = classes.size();
  std::vector<Vector> decisions;
  decisions.reserve(pairs.size());
  for (const auto& p : pairs) decisions.push_back(p.decision(Z));

  std::vector<int> out(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    std::vector<int> votes(K, 0);
    std::vector<double> margin(K, 0.0);
    std::size_t p = 0;
    for (std::size_t i = 0; i < K; ++i) {
      for (std::size_t j = i + 1; j < K; ++j, ++p) {
        const double dv = decisions[p](r);
        ++votes[dv >= 0 ? i : j];
        margin[i] += dv;
        margin[j] -= dv;
      }
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < K; ++k) {
      if (votes[k] > votes[best] || (votes[k] == votes[best] && margin[k] > margin[best])) best = k;
    }
    out[static_cast<std::size_t>(r)] = classes[best];
  }
  return out;
}

MulticlassSvmModel fit_multiclass_svm(const Matrix& X, std::span<const int> y, const SvmOptions& opts) {
  if (static_cast<Eigen::Index>(y.size()) != X.rows()) throw std::invalid_argument("fit_multiclass_svm: label count");
  MulticlassSvmModel m;
  m.classes = distinct(y);
  if (m.classes.size() < 2) throw DataError("multiclass SVM needs at least two classes");
  m.standardizer = opts.standardize ? Standardizer::fit(X) : Standardizer::identity(X.cols());
  const Matrix Z = m.standardizer.apply(X);

  SvmOptions sub = opts;
  sub.standardize = false;
  for (std::size_t i = 0; i < m.classes.size(); ++i) {
    for (std::size_t j = i + 1; j < m.classes.size(); ++j) {
      std::vector<Eigen::Index> rows;
      std::vector<int> labels;
      for (std::size_t r = 0; r < y.size(); ++r) {
        if (y[r] == m.classes[i] || y[r] == m.classes[j]) {
          rows.push_back(static_cast<Eigen::Index>(r));
          labels.push_back(y[r]);
        }
      }
      m.pairs.push_back(fit_linear_svm(Z(rows, Eigen::all), labels, sub));
    }
  }
  return m;
}

Vector LdaModel::scores(const Eigen::Ref<const Vector>& x) const {
  return coef * x + intercept;
}

std::vector<int> LdaModel::predict(const Matrix& X) const {
  const Matrix s = (X * coef.transpose()).rowwise() + intercept.transpose();
  std::vector<int> out(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < s.cols(); ++k) {
      if (s(r, k) > s(r, best)) best = k;
    }
    out[static_cast<std::size_t>(r)] = classes[static_cast<std::size_t>(best)];
  }
  return out;
}

LdaModel fit_lda(const Matrix& X, std::span<const int> y) {
  if (static_cast<Eigen::Index>(y.size()) != X.rows()) throw std::invalid_argument("fit_lda: label count");
  LdaModel m;
  m.classes = distinct(y);
  if (m.classes.size() < 2) throw DataError("LDA needs at least two classes");
  const auto K = static_cast<Eigen::Index>(m.classes.size());
  const Eigen::Index d = X.cols();
  const Eigen::Index n = X.rows();

  m.means = Matrix::Zero(K, d);
  Vector counts = Vector::Zero(K);
  std::vector<Eigen::Index> cls(static_cast<std::size_t>(n));
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto k = std::lower_bound(m.classes.begin(), m.classes.end(), y[static_cast<std::size_t>(r)]) - m.classes.begin();
    cls[static_cast<std::size_t>(r)] = k;
    m.means.row(k) += X.row(r);
    counts(k) += 1.0;
  }
  m.means.array().colwise() /= counts.array();

  Matrix centered(n, d);
  for (Eigen::Index r = 0; r < n; ++r) centered.row(r) = X.row(r) - m.means.row(cls[static_cast<std::size_t>(r)]);
  const double dof = n > K ? static_cast<double>(n - K) : static_cast<double>(n);
  Matrix cov = centered.transpose() * centered / dof;
  const double trace = cov.trace();
  const double ridge = 1e-6 * (trace > 0 ? trace / static_cast<double>(d) : 1.0);
  cov.diagonal().array() += ridge;

  Eigen::LDLT<Matrix> ldlt(cov);
  if (ldlt.info() != Eigen::Success) throw NumericError("LDA pooled covariance factorization failed");
  m.precision = ldlt.solve(Matrix::Identity(d, d));
  m.log_priors = (counts / static_cast<double>(n)).array().log();
  m.coef = m.means * m.precision;
  m.intercept.resize(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    m.intercept(k) = -0.5 * m.coef.row(k).dot(m.means.row(k)) + m.log_priors(k);
  }
  return m;
}

std::vector<int> predict_lda(const LdaModel& model, const Matrix& X) { return model.predict(X); }

}  // namespace mrcp
