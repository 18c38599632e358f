#pragma once

#include <cmath>
#include <map>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "mrcp/selection.hpp"
#include "support.hpp"

// Independent reference implementations shared by the unit tests and the
// acceptance runner.
namespace testing {

using mrcp::Matrix;
using mrcp::Vector;

inline Matrix naive_S(const std::vector<Matrix>& trials) {
  const auto C = trials.front().rows();
  Matrix S = Matrix::Zero(C, C);
  for (std::size_t i = 0; i < trials.size(); ++i) {
    for (std::size_t j = i + 1; j < trials.size(); ++j) {
      S += trials[i] * trials[j].transpose() + trials[j] * trials[i].transpose();
    }
  }
  return S;
}

// Trials carrying one shared waveform through mixing vector m, plus spatially
// coloured noise scaled to the requested SNR.
struct Planted {
  std::vector<Matrix> trials;
  Vector m;
  Vector s;
  Matrix mixing;  // noise colouring
};

inline Planted planted(Eigen::Index C, Eigen::Index T, int count, double snr_db, std::uint64_t seed) {
  Planted p;
  p.m = testing::random_matrix(C, 1, seed).col(0);
  p.s.resize(T);
  for (Eigen::Index t = 0; t < T; ++t) {
    const double x = static_cast<double>(t) / static_cast<double>(T);
    p.s(t) = std::sin(2.0 * M_PI * 3.0 * x) + 1.5 * std::exp(-std::pow((x - 0.6) / 0.08, 2));
  }
  p.mixing = testing::random_matrix(C, C, seed + 7) + 0.5 * Matrix::Identity(C, C);
  const Matrix signal = p.m * p.s.transpose();
  const double signal_power = signal.squaredNorm();
  for (int i = 0; i < count; ++i) {
    Matrix noise = p.mixing * testing::random_matrix(C, T, seed * 100 + i);
    noise *= std::sqrt(signal_power / std::pow(10.0, snr_db / 10.0) / noise.squaredNorm());
    p.trials.push_back(signal + noise);
  }
  return p;
}

inline Matrix centered(const Matrix& A) { return A.rowwise() - A.colwise().mean(); }

inline Matrix inv_sqrt(const Matrix& C) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(C);
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

// Textbook CCA from covariance blocks: Caa^{-1/2} Cab Cbb^{-1/2} = U S V^T.
// Canonical variates get unit norm and each pair is signed so the largest
// entry of the A-side column is positive.
struct OracleCca {
  Matrix a, b;
  Vector r;
};

inline OracleCca oracle_cca(const Matrix& A, const Matrix& B) {
  const Matrix Ac = centered(A), Bc = centered(B);
  const Matrix Ka = inv_sqrt(Ac.transpose() * Ac);
  const Matrix Kb = inv_sqrt(Bc.transpose() * Bc);
  Eigen::JacobiSVD<Matrix> svd(Ka * Ac.transpose() * Bc * Kb, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto d = std::min(A.cols(), B.cols());
  OracleCca out{Ka * svd.matrixU().leftCols(d), Kb * svd.matrixV().leftCols(d), svd.singularValues().head(d)};
  for (Eigen::Index i = 0; i < d; ++i) {
    Eigen::Index idx = 0;
    out.a.col(i).cwiseAbs().maxCoeff(&idx);
    if (out.a(idx, i) < 0) {
      out.a.col(i) *= -1.0;
      out.b.col(i) *= -1.0;
    }
  }
  return out;
}

// Bin of x_i is floor(#{x_j < x_i} * bins / n).
inline std::vector<int> oracle_bins(const std::vector<double>& x, int bins) {
  const auto n = x.size();
  std::vector<int> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t below = 0;
    for (double v : x) below += v < x[i] ? 1 : 0;
    out[i] = static_cast<int>(below * static_cast<std::size_t>(bins) / n);
  }
  return out;
}

inline double oracle_mi(const std::vector<int>& x, const std::vector<int>& y) {
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> px, py;
  const auto n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    joint[{x[i], y[i]}] += 1.0 / n;
    px[x[i]] += 1.0 / n;
    py[y[i]] += 1.0 / n;
  }
  double mi = 0.0;
  for (const auto& [k, p] : joint) mi += p * std::log(p / (px[k.first] * py[k.second]));
  return mi;
}

// At each step, score every remaining column from scratch and take the argmax.
inline std::vector<int> oracle_rank(const mrcp::FeatureMatrix& F, int bins) {
  const auto n_features = static_cast<int>(F.cols());
  std::vector<std::vector<int>> d;
  for (int f = 0; f < n_features; ++f) d.push_back(oracle_bins(std::vector<double>(F.values.col(f).data(), F.values.col(f).data() + F.values.rows()), bins));
  std::vector<int> order;
  std::vector<bool> used(static_cast<std::size_t>(n_features), false);
  while (static_cast<int>(order.size()) < n_features) {
    int best = -1;
    double best_score = -1e300;
    for (int f = 0; f < n_features; ++f) {
      if (used[static_cast<std::size_t>(f)]) continue;
      double score = oracle_mi(d[static_cast<std::size_t>(f)], F.labels);
      if (!order.empty()) {
        double red = 0.0;
        for (int g : order) red += oracle_mi(d[static_cast<std::size_t>(f)], d[static_cast<std::size_t>(g)]);
        score -= red / static_cast<double>(order.size());
      }
      if (score > best_score + 1e-12) {
        best = f;
        best_score = score;
      }
    }
    used[static_cast<std::size_t>(best)] = true;
    order.push_back(best);
  }
  return order;
}

}  // namespace testing
