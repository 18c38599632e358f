#pragma once

#include <Eigen/Dense>

namespace mrcp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Top eigenpairs of the symmetric-definite pencil (S, Q).
struct GevdResult {
  Vector eigenvalues;   ///< descending
  Matrix eigenvectors;  ///< C x P, unit Euclidean norm, largest-magnitude entry positive
};

/// Canonical correlation analysis of two column blocks. Each coefficient pair is
/// signed so the largest-magnitude entry of the A-side column is positive.
struct CcaResult {
  Matrix coeffs_a;     ///< p x d
  Matrix coeffs_b;     ///< q x d
  Vector correlations; ///< d entries in [0, 1], descending
};

/// Solves S w = lambda Q w for the P largest eigenvalues.
///
/// Q is Cholesky-factored and the problem reduced to a standard symmetric
/// eigenproblem. When Q is near singular (smallest eigenvalue below
/// 1e-10 * trace(Q) / C) a ridge of 1e-8 * trace(Q) / C is added first.
/// Throws std::invalid_argument on shape errors and NumericError when Q
/// cannot be made positive definite.
GevdResult sym_generalized_eig(const Matrix& S, const Matrix& Q, Eigen::Index P);

/// Canonical correlation between the columns of A (T x p) and B (T x q).
/// Columns are centered internally. Directions whose singular value is below
/// 1e-10 of the block's largest are dropped, so d = min(rank A, rank B).
/// Throws NumericError when either block has rank zero.
CcaResult cca(const Matrix& A, const Matrix& B);

/// One centered, whitened CCA input. Reusable when a block meets many partners.
struct CcaSide {
  Matrix centered;   ///< n x p, column means removed
  Matrix transform;  ///< p x rank, maps centered columns onto an orthonormal basis
};

CcaSide cca_side(const Matrix& X);

/// Same as cca(A, B) on prepared sides (equal row counts).
CcaResult cca(const CcaSide& a, const CcaSide& b);

/// Pearson correlation of the flattened entries of two equally shaped matrices.
double corr2(const Matrix& A, const Matrix& B);

/// Flips v so its largest-magnitude entry is positive.
void normalize_sign(Eigen::Ref<Vector> v);

}  // namespace mrcp
