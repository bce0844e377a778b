#pragma once

// Dense Gaussian conditioning primitives.
//
// Three interchangeable routes compute the posterior p(x | y) and the log
// marginal likelihood log p(y) for the model
//
//   x ~ N(m, C),   y | x ~ N(A x + a, Q)
//
// * naive_inference factorizes the D_y x D_y marginal covariance of y.
// * low_rank_inference uses the matrix inversion and determinant lemmas and
//   only ever factorizes D_x x D_x matrices (Q must be diagonal).
// * bottleneck_inference handles A = B H with a narrow intermediate
//   z = H x + h, running the low-rank update on z and lifting the result back
//   to x with a single smoothing-style correction.
//
// All three return the same quantities up to round-off.

#include <Eigen/Dense>

#include <utility>

#include "stgp/errors.hpp"

namespace stgp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Gaussian {
  VectorXd mean;
  MatrixXd cov;

  Eigen::Index dim() const { return mean.size(); }
};

/// y | x ~ N(A x + a, Q). Q may be dense for transitions; the emission
/// update routes that exploit structure require it to be diagonal.
struct LinearGaussianConditional {
  MatrixXd A;
  VectorXd a;
  MatrixXd Q;

  Eigen::Index input_dim() const { return A.cols(); }
  Eigen::Index output_dim() const { return A.rows(); }

  static LinearGaussianConditional diagonal(MatrixXd A, VectorXd a,
                                            const VectorXd &q);
  static LinearGaussianConditional identity(Eigen::Index n);
};

/// Upper-triangular factor U with M = U^T U.
struct CholeskyFactor {
  MatrixXd U;

  Eigen::Index dim() const { return U.rows(); }
  /// log det M (not log det U).
  double log_det() const;
  /// U^{-T} B
  MatrixXd solve_upper_transpose(const MatrixXd &B) const;
  /// U^{-1} B
  MatrixXd solve_upper(const MatrixXd &B) const;
  /// M^{-1} B
  MatrixXd solve(const MatrixXd &B) const;
  MatrixXd reconstruct() const { return U.transpose() * U; }
};

/// Cholesky factorization with one jitter retry of 1e-10 * trace(M) / n on
/// the diagonal. Throws CholeskyFailure if the retry also fails.
CholeskyFactor cholesky(const MatrixXd &M);

/// Factor L with M = L L^T for symmetric positive *semi*-definite M. Tries
/// pivoted LDL^T, then a symmetric eigendecomposition with round-off-level
/// negative eigenvalues clamped to zero. Throws CholeskyFailure when an
/// eigenvalue is below -1e-8 of the largest.
MatrixXd psd_factor(const MatrixXd &M);

inline void symmetrize(MatrixXd &M) { M = 0.5 * (M + M.transpose()).eval(); }

bool is_diagonal(const MatrixXd &M);

struct InferenceResult {
  Gaussian posterior;
  double lml = 0.0;
};

InferenceResult naive_inference(const Gaussian &prior,
                                const LinearGaussianConditional &obs,
                                const VectorXd &y);

InferenceResult low_rank_inference(const Gaussian &prior,
                                   const LinearGaussianConditional &obs,
                                   const VectorXd &y);

/// Model z = H x + h, y | z ~ obs. obs.A is D_y x D_z.
InferenceResult bottleneck_inference(const Gaussian &prior, const MatrixXd &H,
                                     const VectorXd &h,
                                     const LinearGaussianConditional &obs,
                                     const VectorXd &y);

MatrixXd kron(const MatrixXd &A, const MatrixXd &B);

/// log N(y; mean, cov) through a dense Cholesky factorization.
double gaussian_log_density(const VectorXd &y, const VectorXd &mean,
                            const MatrixXd &cov);

} // namespace stgp
