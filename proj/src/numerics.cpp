#include "mrcp/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mrcp/errors.hpp"

namespace mrcp {

namespace {

constexpr double kRidgeTrigger = 1e-10;
constexpr double kRidgeScale = 1e-8;
constexpr double kRankTolerance = 1e-10;

}  // namespace

void normalize_sign(Eigen::Ref<Vector> v) {
  Eigen::Index idx = 0;
  v.cwiseAbs().maxCoeff(&idx);
  if (v(idx) < 0) v = -v;
}

GevdResult sym_generalized_eig(const Matrix& S, const Matrix& Q, Eigen::Index P) {
  const Eigen::Index C = S.rows();
  if (S.cols() != C || Q.rows() != C || Q.cols() != C || C == 0) {
    throw std::invalid_argument("sym_generalized_eig: S and Q must be square and equally sized");
  }
  if (P < 1 || P > C) {
    throw std::invalid_argument("sym_generalized_eig: P must lie in [1, C]");
  }
  if (!S.allFinite() || !Q.allFinite()) {
    throw NumericError("sym_generalized_eig: non-finite covariance entries");
  }

  Matrix Qs = 0.5 * (Q + Q.transpose());
  const double trace = Qs.trace();
  if (!(trace > 0.0)) {
    throw NumericError("sym_generalized_eig: Q has non-positive trace");
  }
  const double unit = trace / static_cast<double>(C);
  Eigen::SelfAdjointEigenSolver<Matrix> qeig(Qs, Eigen::EigenvaluesOnly);
  if (qeig.eigenvalues()(0) < kRidgeTrigger * unit) {
    Qs.diagonal().array() += kRidgeScale * unit;
  }

  Eigen::LLT<Matrix> llt(Qs);
  if (llt.info() != Eigen::Success) {
    throw NumericError("sym_generalized_eig: Q is not positive definite after ridge");
  }
  const Matrix L = llt.matrixL();

  // M = L^-1 S L^-T
  Matrix Ss = 0.5 * (S + S.transpose());
  Matrix tmp = L.triangularView<Eigen::Lower>().solve(Ss);
  Matrix M = L.triangularView<Eigen::Lower>().solve(tmp.transpose());
  M = 0.5 * (M + M.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> eig(M);
  if (eig.info() != Eigen::Success) {
    throw NumericError("sym_generalized_eig: symmetric eigensolver failed");
  }

  GevdResult out;
  out.eigenvalues.resize(P);
  out.eigenvectors.resize(C, P);
  for (Eigen::Index j = 0; j < P; ++j) {
    const Eigen::Index src = C - 1 - j;
    out.eigenvalues(j) = eig.eigenvalues()(src);
    Vector w = L.transpose().triangularView<Eigen::Upper>().solve(eig.eigenvectors().col(src));
    w.normalize();
    normalize_sign(w);
    out.eigenvectors.col(j) = w;
  }
  return out;
}

CcaSide cca_side(const Matrix& X) {
  CcaSide side;
  side.centered = X.rowwise() - X.colwise().mean();
  const double scale = X.cwiseAbs().maxCoeff();

  // centered = Q R and R = U S V^T, so centered * V S^-1 = Q U is orthonormal.
  Eigen::HouseholderQR<Matrix> qr(side.centered);
  const Eigen::Index p = X.cols();
  const Matrix R = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<Matrix> svd(R, Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;

  Eigen::Index rank = 0;
  // Mean removal of a constant column leaves rounding residue around 1e-16 * scale.
  if (smax > 1e-12 * scale * std::sqrt(static_cast<double>(X.rows()))) {
    while (rank < s.size() && s(rank) > kRankTolerance * smax) ++rank;
  }
  side.transform = svd.matrixV().leftCols(rank) * s.head(rank).cwiseInverse().asDiagonal();
  return side;
}

CcaResult cca(const CcaSide& a, const CcaSide& b) {
  if (a.centered.rows() != b.centered.rows()) {
    throw std::invalid_argument("cca: inputs must have the same number of rows");
  }
  if (a.transform.cols() == 0 || b.transform.cols() == 0) {
    throw NumericError("cca: degenerate rank-zero input");
  }
  const Matrix cross = a.transform.transpose() * (a.centered.transpose() * b.centered) * b.transform;
  Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Index d = std::min(cross.rows(), cross.cols());

  CcaResult out;
  out.coeffs_a = a.transform * svd.matrixU().leftCols(d);
  out.coeffs_b = b.transform * svd.matrixV().leftCols(d);
  out.correlations = svd.singularValues().head(d).cwiseMax(0.0).cwiseMin(1.0);
  // Pairs flip together so the correlations keep their sign.
  for (Eigen::Index i = 0; i < d; ++i) {
    Eigen::Index idx = 0;
    out.coeffs_a.col(i).cwiseAbs().maxCoeff(&idx);
    if (out.coeffs_a(idx, i) < 0) {
      out.coeffs_a.col(i) *= -1.0;
      out.coeffs_b.col(i) *= -1.0;
    }
  }
  return out;
}

CcaResult cca(const Matrix& A, const Matrix& B) {
  if (A.rows() != B.rows()) {
    throw std::invalid_argument("cca: inputs must have the same number of rows");
  }
  if (A.rows() <= std::max(A.cols(), B.cols())) {
    throw std::invalid_argument("cca: need more observations than columns");
  }
  return cca(cca_side(A), cca_side(B));
}

double corr2(const Matrix& A, const Matrix& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols()) {
    throw std::invalid_argument("corr2: shape mismatch");
  }
  const Eigen::ArrayXXd a = A.array() - A.mean();
  const Eigen::ArrayXXd b = B.array() - B.mean();
  const double saa = a.matrix().squaredNorm();
  const double sbb = b.matrix().squaredNorm();
  // Rounding residue from removing the mean of a constant matrix counts as zero.
  if (!(saa > 1e-24 * A.squaredNorm()) || !(sbb > 1e-24 * B.squaredNorm())) {
    throw NumericError("corr2: zero variance input");
  }
  const double r = (a * b).sum() / std::sqrt(saa * sbb);
  return std::clamp(r, -1.0, 1.0);
}

}  // namespace mrcp
