#pragma once

#include <Eigen/Dense>

namespace psdsos {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Eigendecomposition of a symmetric matrix, eigenvalues in descending order.
struct SymEig {
  Vec eigenvalues;
  Mat eigenvectors;
};

/// Returns (M + M^T) / 2, or throws InvalidArgument when M is asymmetric
/// beyond 1e-9 * max(1, |M|_max).
Mat symmetrized(const Mat& M);

SymEig sym_eig(const Mat& M);

/// [M]_- = U max(0, -Lambda) U^T, so that M = [M]_+ - [M]_-.
Mat negative_part(const Mat& M);
Mat positive_part(const Mat& M);

/// negative_part without the symmetry check, for solver inner loops.
/// Assumes M is already exactly symmetric. The result is exactly symmetric.
Mat negative_part_unchecked(const Mat& M);

struct UpperCholesky {
  Mat R;              ///< upper triangular, R^T R = K + jitter * I
  double jitter = 0;  ///< absolute diagonal shift that was applied
};

/// Cholesky with a jitter ladder tau in {0, 1e-12, ..., 1e-6} * trace(K)/n.
/// A level is accepted when the factorization succeeds and every pivot
/// satisfies R_ii^2 >= 1e-14 * trace(K)/n. Throws IndefiniteError otherwise.
UpperCholesky chol_upper_jitter(const Mat& K);

double lambda_max(const Mat& M);
double lambda_min(const Mat& M);

}  // namespace psdsos
