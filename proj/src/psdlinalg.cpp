#include "psdsos/psdlinalg.hpp"

#include <array>
#include <cmath>

#include "psdsos/errors.hpp"

namespace psdsos {

Mat symmetrized(const Mat& M) {
  if (M.rows() != M.cols()) throw DimensionError("expected a square matrix");
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw InvalidArgument("matrix is not symmetric");
  }
  Mat out = M;
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = i + 1; j < M.cols(); ++j) out(i, j) = out(j, i) = 0.5 * (M(i, j) + M(j, i));
  return out;
}

SymEig sym_eig(const Mat& M) {
  const Mat S = symmetrized(M);
  Eigen::SelfAdjointEigenSolver<Mat> es(S);
  if (es.info() != Eigen::Success) throw Error("symmetric eigendecomposition failed");
  SymEig out;
  out.eigenvalues = es.eigenvalues().reverse();
  out.eigenvectors = es.eigenvectors().rowwise().reverse();
  return out;
}

namespace {

Mat exact_sym(const Mat& A) {
  Mat out(A.rows(), A.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    out(i, i) = A(i, i);
    for (Eigen::Index j = i + 1; j < A.cols(); ++j) out(i, j) = out(j, i) = 0.5 * (A(i, j) + A(j, i));
  }
  return out;
}

// U diag(f(lambda)) U^T restricted to the eigenpairs where f is nonzero.
template <class F>
Mat spectral_clamp(const Eigen::SelfAdjointEigenSolver<Mat>& es, F f) {
  const Vec& lam = es.eigenvalues();
  const Mat& U = es.eigenvectors();
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    if (f(lam[i]) != 0.0) ++count;
  if (count == 0) return Mat::Zero(lam.size(), lam.size());
  Mat V(U.rows(), count);
  Eigen::Index c = 0;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    const double v = f(lam[i]);
    if (v != 0.0) V.col(c++) = U.col(i) * std::sqrt(v);
  }
  Mat out = Mat::Zero(lam.size(), lam.size());
  out.selfadjointView<Eigen::Lower>().rankUpdate(V);
  return out.selfadjointView<Eigen::Lower>();
}

}  // namespace

Mat negative_part_unchecked(const Mat& M) {
  Eigen::SelfAdjointEigenSolver<Mat> es(M);
  if (es.info() != Eigen::Success) throw Error("symmetric eigendecomposition failed");
  return exact_sym(spectral_clamp(es, [](double l) { return l < 0.0 ? -l : 0.0; }));
}

Mat negative_part(const Mat& M) { return negative_part_unchecked(symmetrized(M)); }

Mat positive_part(const Mat& M) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrized(M));
  if (es.info() != Eigen::Success) throw Error("symmetric eigendecomposition failed");
  return exact_sym(spectral_clamp(es, [](double l) { return l > 0.0 ? l : 0.0; }));
}

UpperCholesky chol_upper_jitter(const Mat& K) {
  const Mat S = symmetrized(K);
  const Eigen::Index n = S.rows();
  if (n == 0) throw InvalidArgument("cannot factor an empty matrix");
  const double mean_diag = S.trace() / static_cast<double>(n);
  if (!(mean_diag > 0.0)) throw IndefiniteError("matrix has non-positive trace");
  constexpr std::array<double, 8> ladder{0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6};
  for (double rel : ladder) {
    const double tau = rel * mean_diag;
    Mat shifted = S;
    shifted.diagonal().array() += tau;
    Eigen::LLT<Mat> llt(shifted);
    if (llt.info() != Eigen::Success) continue;
    Mat R = llt.matrixU();
    const double min_pivot = R.diagonal().cwiseAbs2().minCoeff();
    if (!(min_pivot >= 1e-14 * mean_diag) || !R.allFinite()) continue;
    return {std::move(R), tau};
  }
  throw IndefiniteError("Cholesky factorization failed at the maximum jitter level");
}

double lambda_max(const Mat& M) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrized(M), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double lambda_min(const Mat& M) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrized(M), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace psdsos
