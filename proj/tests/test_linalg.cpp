#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>

#include "stgp/linalg.hpp"
#include "stgp/oracle.hpp"
#include "support.hpp"

namespace stgp {
namespace {

using testing::max_relative_error;
using testing::Rng;

void expect_same(const InferenceResult &a, const InferenceResult &b,
                 double tol) {
  EXPECT_NEAR(a.lml, b.lml, tol);
  EXPECT_LE(max_relative_error(a.posterior.mean, b.posterior.mean), tol);
  EXPECT_LE(max_relative_error(a.posterior.cov, b.posterior.cov), tol);
}

Gaussian scalar(double m, double v) {
  return {VectorXd::Constant(1, m), MatrixXd::Constant(1, 1, v)};
}

TEST(Cholesky, ReconstructsAndIsUpperTriangular) {
  Rng rng(1);
  for (int n : {1, 2, 5, 12}) {
    const MatrixXd M = testing::random_spd(rng, n);
    const auto f = cholesky(M);
    EXPECT_TRUE(f.U.isUpperTriangular(0.0));
    EXPECT_LE((f.reconstruct() - M).norm() / M.norm(), 1e-10);
    EXPECT_NEAR(f.log_det(), std::log(M.determinant()), 1e-10);
    const MatrixXd B = testing::normal_matrix(rng, n, 3);
    EXPECT_LE(max_relative_error(M * f.solve(B), B), 1e-10);
  }
}

TEST(Cholesky, JitterRescuesRoundOffSingularGram) {
  // Rank-one PSD matrix: singular in exact arithmetic.
  const VectorXd v = VectorXd::LinSpaced(4, 1.0, 2.0);
  const MatrixXd M = v * v.transpose();
  const auto f = cholesky(M);
  EXPECT_LE((f.reconstruct() - M).norm() / M.norm(), 1e-8);
}

TEST(Cholesky, RejectsIndefiniteAndNonSquare) {
  MatrixXd M(2, 2);
  M << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(cholesky(M), CholeskyFailure);
  EXPECT_THROW(cholesky(MatrixXd::Identity(2, 3)), DimensionMismatch);
  EXPECT_EQ(cholesky(MatrixXd(0, 0)).dim(), 0);
}

TEST(PsdFactor, HandlesRankDeficientMatrices) {
  Rng rng(2);
  const MatrixXd G = testing::normal_matrix(rng, 6, 2);
  const MatrixXd M = G * G.transpose();
  const MatrixXd L = psd_factor(M);
  EXPECT_LE((L * L.transpose() - M).norm() / M.norm(), 1e-10);
  EXPECT_THROW(psd_factor(-MatrixXd::Identity(2, 2)), CholeskyFailure);
}

TEST(NaiveInference, ScalarConjugateUpdate) {
  const auto obs = LinearGaussianConditional::diagonal(
      MatrixXd::Identity(1, 1), VectorXd::Zero(1), VectorXd::Ones(1));
  const auto r = naive_inference(scalar(0.0, 1.0), obs, VectorXd::Zero(1));
  EXPECT_NEAR(r.lml, -0.5 * std::log(4.0 * std::numbers::pi), 1e-14);
  EXPECT_NEAR(r.lml, -1.2655, 1e-4);
  EXPECT_NEAR(r.posterior.mean(0), 0.0, 1e-15);
  EXPECT_NEAR(r.posterior.cov(0, 0), 0.5, 1e-15);
}

TEST(NaiveInference, ZeroEmissionLeavesPriorUnchanged) {
  Rng rng(3);
  const auto prior = testing::random_gaussian(rng, 3);
  const VectorXd y = testing::normal_vector(rng, 4);
  const VectorXd q = VectorXd::Constant(4, 0.7);
  const auto obs =
      LinearGaussianConditional::diagonal(MatrixXd::Zero(4, 3), y, q);
  for (const auto &r : {naive_inference(prior, obs, y),
                        low_rank_inference(prior, obs, y)}) {
    EXPECT_LE(max_relative_error(r.posterior.mean, prior.mean), 1e-14);
    EXPECT_LE(max_relative_error(r.posterior.cov, prior.cov), 1e-14);
    EXPECT_NEAR(r.lml, 4.0 * -0.5 * std::log(2.0 * std::numbers::pi * 0.7),
                1e-12);
  }
}

TEST(NaiveInference, MatchesJointGaussianOracle) {
  Rng rng(4);
  const auto prior = testing::random_gaussian(rng, 4);
  const auto obs = testing::random_emission(rng, 6, 4);
  const VectorXd y = testing::normal_vector(rng, 6);
  expect_same(naive_inference(prior, obs, y),
              oracle::joint_conditioning(prior, obs, y), 1e-10);
}

TEST(NaiveInference, AcceptsDenseNoise) {
  Rng rng(5);
  const auto prior = testing::random_gaussian(rng, 3);
  LinearGaussianConditional obs{testing::normal_matrix(rng, 4, 3),
                                testing::normal_vector(rng, 4),
                                testing::random_spd(rng, 4)};
  const VectorXd y = testing::normal_vector(rng, 4);
  expect_same(naive_inference(prior, obs, y),
              oracle::joint_conditioning(prior, obs, y), 1e-10);
  EXPECT_THROW(low_rank_inference(prior, obs, y), NonDiagonalNoise);
}

TEST(NaiveInference, DimensionErrors) {
  Rng rng(6);
  const auto prior = testing::random_gaussian(rng, 3);
  const auto obs = testing::random_emission(rng, 4, 2);
  EXPECT_THROW(naive_inference(prior, obs, VectorXd::Zero(4)),
               DimensionMismatch);
  EXPECT_THROW(low_rank_inference(prior, obs, VectorXd::Zero(4)),
               DimensionMismatch);
  const auto ok = testing::random_emission(rng, 4, 3);
  EXPECT_THROW(naive_inference(prior, ok, VectorXd::Zero(3)),
               DimensionMismatch);
}

TEST(NaiveInference, SingularMarginalFails) {
  const auto obs = LinearGaussianConditional::diagonal(
      MatrixXd::Zero(2, 1), VectorXd::Zero(2), VectorXd::Zero(2));
  EXPECT_THROW(naive_inference(scalar(0.0, 1.0), obs, VectorXd::Ones(2)),
               CholeskyFailure);
}

TEST(LowRankInference, ScalarCaseMatchesNaive) {
  const auto obs = LinearGaussianConditional::diagonal(
      MatrixXd::Identity(1, 1), VectorXd::Zero(1), VectorXd::Ones(1));
  const auto prior = scalar(0.0, 1.0);
  expect_same(low_rank_inference(prior, obs, VectorXd::Zero(1)),
              naive_inference(prior, obs, VectorXd::Zero(1)), 1e-15);
}

TEST(LowRankInference, TallInstanceMatchesNaive) {
  Rng rng(7);
  const auto prior = testing::random_gaussian(rng, 3);
  const auto obs = testing::random_emission(rng, 50, 3);
  const VectorXd y = testing::normal_vector(rng, 50);
  expect_same(low_rank_inference(prior, obs, y),
              naive_inference(prior, obs, y), 1e-9);
}

TEST(LowRankInference, SymmetricShrinkage) {
  const Gaussian prior{VectorXd::LinSpaced(3, -1.0, 2.0),
                       MatrixXd::Identity(3, 3)};
  const auto obs = LinearGaussianConditional::diagonal(
      MatrixXd::Identity(3, 3), VectorXd::Zero(3), VectorXd::Ones(3));
  const auto r = low_rank_inference(prior, obs, prior.mean);
  EXPECT_LE(max_relative_error(r.posterior.mean, prior.mean), 1e-15);
  EXPECT_LE(max_relative_error(r.posterior.cov, 0.5 * MatrixXd::Identity(3, 3)),
            1e-15);
}

TEST(LowRankInference, RequiresPositiveNoise) {
  const auto obs = LinearGaussianConditional::diagonal(
      MatrixXd::Identity(1, 1), VectorXd::Zero(1), VectorXd::Zero(1));
  EXPECT_THROW(low_rank_inference(scalar(0.0, 1.0), obs, VectorXd::Zero(1)),
               CholeskyFailure);
}

TEST(BottleneckInference, IdentityBottleneckEqualsLowRank) {
  Rng rng(8);
  const auto prior = testing::random_gaussian(rng, 5);
  const auto obs = testing::random_emission(rng, 7, 5);
  const VectorXd y = testing::normal_vector(rng, 7);
  const auto a = bottleneck_inference(prior, MatrixXd::Identity(5, 5),
                                      VectorXd::Zero(5), obs, y);
  expect_same(a, low_rank_inference(prior, obs, y), 1e-12);
}

TEST(BottleneckInference, NarrowBottleneckMatchesComposedNaive) {
  Rng rng(9);
  // Two spatial pseudo-inputs with three latent dimensions each.
  const auto prior = testing::random_gaussian(rng, 6);
  MatrixXd H = MatrixXd::Zero(2, 6);
  H(0, 0) = 1.0;
  H(1, 3) = 1.0;
  const VectorXd h = testing::normal_vector(rng, 2);
  const auto obs = testing::random_emission(rng, 8, 2);
  const VectorXd y = testing::normal_vector(rng, 8);
  const LinearGaussianConditional composed{obs.A * H, obs.A * h + obs.a,
                                           obs.Q};
  expect_same(bottleneck_inference(prior, H, h, obs, y),
              naive_inference(prior, composed, y), 1e-9);
}

TEST(BottleneckInference, NoObservations) {
  Rng rng(10);
  const auto prior = testing::random_gaussian(rng, 4);
  const auto obs = testing::random_emission(rng, 0, 2);
  const auto r = bottleneck_inference(prior, testing::normal_matrix(rng, 2, 4),
                                      VectorXd::Zero(2), obs, VectorXd(0));
  EXPECT_EQ(r.lml, 0.0);
  EXPECT_EQ(r.posterior.mean, prior.mean);
  EXPECT_EQ(r.posterior.cov, prior.cov);
  EXPECT_EQ(naive_inference(prior, testing::random_emission(rng, 0, 4),
                            VectorXd(0))
                .lml,
            0.0);
  EXPECT_EQ(low_rank_inference(prior, testing::random_emission(rng, 0, 4),
                               VectorXd(0))
                .lml,
            0.0);
}

TEST(BottleneckInference, DimensionErrors) {
  Rng rng(11);
  const auto prior = testing::random_gaussian(rng, 4);
  const auto obs = testing::random_emission(rng, 3, 2);
  EXPECT_THROW(bottleneck_inference(prior, MatrixXd::Zero(2, 3),
                                    VectorXd::Zero(2), obs, VectorXd::Zero(3)),
               DimensionMismatch);
  EXPECT_THROW(bottleneck_inference(prior, MatrixXd::Zero(3, 4),
                                    VectorXd::Zero(3), obs, VectorXd::Zero(3)),
               DimensionMismatch);
}

TEST(Kron, HandExpansions) {
  EXPECT_EQ(kron(MatrixXd::Identity(2, 2), MatrixXd::Constant(1, 1, 3.0)),
            (MatrixXd(2, 2) << 3, 0, 0, 3).finished());
  MatrixXd A(1, 2);
  A << 1, 2;
  MatrixXd B(2, 1);
  B << 0, 1;
  EXPECT_EQ(kron(A, B), (MatrixXd(2, 2) << 0, 0, 1, 2).finished());
}

TEST(Kron, EntryFormulaAndMixedProduct) {
  Rng rng(12);
  const MatrixXd A = testing::normal_matrix(rng, 2, 3);
  const MatrixXd B = testing::normal_matrix(rng, 4, 2);
  const MatrixXd K = kron(A, B);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 4; ++k) {
        for (int l = 0; l < 2; ++l) {
          EXPECT_EQ(K(i * 4 + k, j * 2 + l), A(i, j) * B(k, l));
        }
      }
    }
  }
  const MatrixXd P = testing::normal_matrix(rng, 2, 2);
  const MatrixXd Q = testing::normal_matrix(rng, 3, 3);
  const MatrixXd R = testing::normal_matrix(rng, 2, 2);
  const MatrixXd S = testing::normal_matrix(rng, 3, 3);
  EXPECT_LE(max_relative_error(kron(P, Q) * kron(R, S), kron(P * R, Q * S)),
            1e-12);
}

TEST(InferenceProperties, AlgorithmsAgreeOnRandomInstances) {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const int dx = testing::uniform_int(rng, 1, 12);
    const int dy = testing::uniform_int(rng, 0, 60);
    const auto prior = testing::random_gaussian(rng, dx);
    const auto obs = testing::random_emission(rng, dy, dx);
    const VectorXd y = testing::normal_vector(rng, dy);
    const auto naive = naive_inference(prior, obs, y);
    expect_same(low_rank_inference(prior, obs, y), naive, 1e-8);
    expect_same(bottleneck_inference(prior, MatrixXd::Identity(dx, dx),
                                     VectorXd::Zero(dx), obs, y),
                naive, 1e-8);
    expect_same(oracle::joint_conditioning(prior, obs, y), naive, 1e-8);
  }
}

TEST(InferenceProperties, LmlInvariantUnderObservationPermutation) {
  Rng rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const int dx = testing::uniform_int(rng, 1, 6);
    const int dy = testing::uniform_int(rng, 1, 12);
    const auto prior = testing::random_gaussian(rng, dx);
    const auto obs = testing::random_emission(rng, dy, dx);
    const VectorXd y = testing::normal_vector(rng, dy);
    std::vector<int> order(static_cast<std::size_t>(dy));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(dy);
    for (int i = 0; i < dy; ++i) {
      perm.indices()(i) = order[static_cast<std::size_t>(i)];
    }
    const LinearGaussianConditional permuted{
        perm * obs.A, perm * obs.a, perm * obs.Q * perm.transpose()};
    const VectorXd py = perm * y;
    EXPECT_NEAR(low_rank_inference(prior, permuted, py).lml,
                low_rank_inference(prior, obs, y).lml, 1e-10);
    EXPECT_NEAR(naive_inference(prior, permuted, py).lml,
                naive_inference(prior, obs, y).lml, 1e-10);
  }
}

template <class F> double median_seconds(F &&f, int repeats) {
  f();
  std::vector<double> s;
  for (int r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    f();
    s.push_back(std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - start)
                    .count());
  }
  std::nth_element(s.begin(), s.begin() + s.size() / 2, s.end());
  return s[s.size() / 2];
}

TEST(InferencePerformance, BottleneckNotSlowerThanLowRankAtM100) {
  Rng rng(15);
  const int M = 100;
  const auto prior = testing::random_gaussian(rng, 3 * M);
  MatrixXd H = MatrixXd::Zero(M, 3 * M);
  for (int m = 0; m < M; ++m) {
    H(m, 3 * m) = 1.0;
  }
  const VectorXd h = VectorXd::Zero(M);
  const auto obs = testing::random_emission(rng, 10 * M, M);
  const LinearGaussianConditional composed{obs.A * H, obs.a, obs.Q};
  const VectorXd y = testing::normal_vector(rng, 10 * M);
  const double bottleneck = median_seconds(
      [&] { return bottleneck_inference(prior, H, h, obs, y); }, 5);
  const double low_rank =
      median_seconds([&] { return low_rank_inference(prior, composed, y); }, 5);
  RecordProperty("bottleneck_seconds", std::to_string(bottleneck));
  RecordProperty("low_rank_seconds", std::to_string(low_rank));
  EXPECT_LE(bottleneck, 1.5 * low_rank);
}

} // namespace
} // namespace stgp
