#include "stgp/linalg.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace stgp {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

bool try_factor(const MatrixXd &M, MatrixXd &U) {
  Eigen::LLT<MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) {
    return false;
  }
  U = llt.matrixU();
  const auto d = U.diagonal();
  return U.allFinite() && (d.array() > 0.0).all();
}

void check_conditional(const Gaussian &prior,
                       const LinearGaussianConditional &obs,
                       const VectorXd &y) {
  if (prior.cov.rows() != prior.mean.size() ||
      prior.cov.cols() != prior.mean.size()) {
    throw DimensionMismatch("prior covariance does not match its mean");
  }
  if (obs.A.cols() != prior.mean.size()) {
    throw DimensionMismatch("observation matrix has " +
                            std::to_string(obs.A.cols()) +
                            " columns, state has dimension " +
                            std::to_string(prior.mean.size()));
  }
  const auto dy = obs.A.rows();
  if (obs.a.size() != dy || obs.Q.rows() != dy || obs.Q.cols() != dy ||
      y.size() != dy) {
    throw DimensionMismatch("observation offset, noise and data must all "
                            "have the observation dimension");
  }
}

} // namespace

LinearGaussianConditional
LinearGaussianConditional::diagonal(MatrixXd A, VectorXd a, const VectorXd &q) {
  LinearGaussianConditional c;
  c.Q = q.asDiagonal();
  c.A = std::move(A);
  c.a = std::move(a);
  return c;
}

LinearGaussianConditional LinearGaussianConditional::identity(Eigen::Index n) {
  return {MatrixXd::Identity(n, n), VectorXd::Zero(n), MatrixXd::Zero(n, n)};
}

double CholeskyFactor::log_det() const {
  return 2.0 * U.diagonal().array().log().sum();
}

MatrixXd CholeskyFactor::solve_upper_transpose(const MatrixXd &B) const {
  return U.transpose().triangularView<Eigen::Lower>().solve(B);
}

MatrixXd CholeskyFactor::solve_upper(const MatrixXd &B) const {
  return U.triangularView<Eigen::Upper>().solve(B);
}

MatrixXd CholeskyFactor::solve(const MatrixXd &B) const {
  return solve_upper(solve_upper_transpose(B));
}

CholeskyFactor cholesky(const MatrixXd &M) {
  if (M.rows() != M.cols()) {
    throw DimensionMismatch("cholesky of a non-square matrix");
  }
  const auto n = M.rows();
  CholeskyFactor f;
  if (n == 0) {
    f.U.resize(0, 0);
    return f;
  }
  if (try_factor(M, f.U)) {
    return f;
  }
  const double jitter = 1e-10 * M.trace() / static_cast<double>(n);
  if (std::isfinite(jitter) && jitter > 0.0) {
    MatrixXd J = M;
    J.diagonal().array() += jitter;
    if (try_factor(J, f.U)) {
      return f;
    }
  }
  throw CholeskyFailure("matrix of size " + std::to_string(n) +
                        " is not numerically positive definite");
}

MatrixXd psd_factor(const MatrixXd &M) {
  const auto n = M.rows();
  if (n == 0) {
    return MatrixXd(0, 0);
  }
  Eigen::LDLT<MatrixXd> ldlt(M);
  if (ldlt.info() == Eigen::Success) {
    VectorXd d = ldlt.vectorD();
    const double scale = std::max(d.cwiseAbs().maxCoeff(), 1e-300);
    if ((d.array() >= -1e-10 * scale).all()) {
      MatrixXd L = ldlt.matrixL();
      L = L * d.cwiseMax(0.0).cwiseSqrt().asDiagonal();
      return ldlt.transpositionsP().transpose() * L;
    }
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(M);
  if (eig.info() != Eigen::Success) {
    throw CholeskyFailure("eigendecomposition failed");
  }
  const VectorXd &lambda = eig.eigenvalues();
  const double scale = std::max(lambda.cwiseAbs().maxCoeff(), 1e-300);
  if (lambda.minCoeff() < -1e-8 * scale) {
    throw CholeskyFailure("matrix has a materially negative eigenvalue");
  }
  return eig.eigenvectors() * lambda.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

bool is_diagonal(const MatrixXd &M) {
  for (Eigen::Index j = 0; j < M.cols(); ++j) {
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
      if (i != j && M(i, j) != 0.0) {
        return false;
      }
    }
  }
  return true;
}

InferenceResult naive_inference(const Gaussian &prior,
                                const LinearGaussianConditional &obs,
                                const VectorXd &y) {
  check_conditional(prior, obs, y);
  const auto dy = y.size();
  if (dy == 0) {
    return {prior, 0.0};
  }
  const MatrixXd V = obs.A * prior.cov;
  MatrixXd Cy = V * obs.A.transpose() + obs.Q;
  symmetrize(Cy);
  const auto U = cholesky(Cy);
  const MatrixXd B = U.solve_upper_transpose(V);
  const VectorXd alpha =
      U.solve_upper_transpose(y - (obs.A * prior.mean + obs.a));

  InferenceResult r;
  r.lml = -0.5 * (static_cast<double>(dy) * kLog2Pi + U.log_det() +
                  alpha.squaredNorm());
  r.posterior.mean = prior.mean + B.transpose() * alpha;
  r.posterior.cov = prior.cov - B.transpose() * B;
  symmetrize(r.posterior.cov);
  return r;
}

InferenceResult low_rank_inference(const Gaussian &prior,
                                   const LinearGaussianConditional &obs,
                                   const VectorXd &y) {
  check_conditional(prior, obs, y);
  if (!is_diagonal(obs.Q)) {
    throw NonDiagonalNoise("low-rank inference requires diagonal noise");
  }
  const auto dy = y.size();
  if (dy == 0) {
    return {prior, 0.0};
  }
  const VectorXd q = obs.Q.diagonal();
  if (!((q.array() > 0.0).all())) {
    throw CholeskyFailure("observation noise is not strictly positive");
  }
  const VectorXd sq = q.array().sqrt();

  const auto Ux = cholesky(prior.cov);
  const MatrixXd B = (Ux.U * obs.A.transpose()) * sq.cwiseInverse().asDiagonal();
  MatrixXd inner = B * B.transpose();
  inner.diagonal().array() += 1.0;
  const auto U = cholesky(inner);
  const MatrixXd G = U.solve_upper_transpose(Ux.U);

  const VectorXd delta =
      (y - (obs.A * prior.mean + obs.a)).cwiseQuotient(sq);
  const VectorXd beta = B * delta;
  const VectorXd w = U.solve_upper_transpose(beta);

  InferenceResult r;
  r.posterior.cov = G.transpose() * G;
  symmetrize(r.posterior.cov);
  r.posterior.mean = prior.mean + G.transpose() * w;
  // det(A C A^T + Q) = det(Q) det(I + B B^T)
  r.lml = -0.5 * (delta.squaredNorm() - w.squaredNorm() +
                  static_cast<double>(dy) * kLog2Pi + U.log_det() +
                  q.array().log().sum());
  return r;
}

InferenceResult bottleneck_inference(const Gaussian &prior, const MatrixXd &H,
                                     const VectorXd &h,
                                     const LinearGaussianConditional &obs,
                                     const VectorXd &y) {
  if (H.cols() != prior.dim() || h.size() != H.rows() ||
      obs.A.cols() != H.rows()) {
    throw DimensionMismatch("bottleneck map does not connect state and "
                            "observation model");
  }
  if (y.size() != obs.A.rows()) {
    throw DimensionMismatch("observation vector length mismatch");
  }
  if (y.size() == 0) {
    return {prior, 0.0};
  }
  const MatrixXd HC = H * prior.cov;
  Gaussian z;
  z.mean = H * prior.mean + h;
  z.cov = HC * H.transpose();
  symmetrize(z.cov);

  auto zr = low_rank_inference(z, obs, y);

  // Gain C_x H^T C_z^{-1}.
  const auto Uz = cholesky(z.cov);
  const MatrixXd G = Uz.solve(HC);

  InferenceResult r;
  r.lml = zr.lml;
  r.posterior.mean = prior.mean + G.transpose() * (zr.posterior.mean - z.mean);
  r.posterior.cov =
      prior.cov + G.transpose() * (zr.posterior.cov - z.cov) * G;
  symmetrize(r.posterior.cov);
  return r;
}

MatrixXd kron(const MatrixXd &A, const MatrixXd &B) {
  MatrixXd K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    }
  }
  return K;
}

double gaussian_log_density(const VectorXd &y, const VectorXd &mean,
                            const MatrixXd &cov) {
  if (y.size() != mean.size() || cov.rows() != y.size()) {
    throw DimensionMismatch("gaussian_log_density dimension mismatch");
  }
  if (y.size() == 0) {
    return 0.0;
  }
  const auto U = cholesky(cov);
  const VectorXd alpha = U.solve_upper_transpose(y - mean);
  return -0.5 * (static_cast<double>(y.size()) * kLog2Pi + U.log_det() +
                 alpha.squaredNorm());
}

} // namespace stgp
