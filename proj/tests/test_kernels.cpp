#include <gtest/gtest.h>

#include <cmath>

#include "stgp/kernels.hpp"
#include "support.hpp"

namespace stgp {
namespace {

using testing::max_relative_error;
using testing::Rng;

constexpr MaternOrder kOrders[] = {MaternOrder::Half, MaternOrder::ThreeHalves,
                                   MaternOrder::FiveHalves};

// Textbook half-integer Matérn covariances, unit variance.
double matern(MaternOrder order, double l, double dt) {
  const double r = std::abs(dt) / l;
  switch (order) {
  case MaternOrder::Half:
    return std::exp(-r);
  case MaternOrder::ThreeHalves:
    return (1.0 + std::sqrt(3.0) * r) * std::exp(-std::sqrt(3.0) * r);
  case MaternOrder::FiveHalves:
    return (1.0 + std::sqrt(5.0) * r + 5.0 / 3.0 * r * r) *
           std::exp(-std::sqrt(5.0) * r);
  }
  return 0.0;
}

double sde_cov(const TemporalSdeKernel &k, double dt) {
  const auto e = k.emission_row();
  return (e * k.transition(dt) * k.stationary_cov() * e.transpose())(0, 0);
}

TEST(SpatialGram, ZeroDistanceGivesAmplitude) {
  const SpatialKernel k{VectorXd::Constant(2, 0.7), 1.3};
  Points x(1, 2);
  x << 0.4, -1.0;
  EXPECT_DOUBLE_EQ(spatial_gram(k, x, x)(0, 0), 1.3);
}

TEST(SpatialGram, UnitDistanceClosedForm) {
  const SpatialKernel k{VectorXd::Ones(1), 1.0};
  const Points x = Points::Zero(1, 1);
  const Points xp = Points::Ones(1, 1);
  EXPECT_NEAR(spatial_gram(k, x, xp)(0, 0), std::exp(-0.5), 1e-15);
  EXPECT_NEAR(spatial_gram(k, x, xp)(0, 0), 0.6065, 1e-4);
}

TEST(SpatialGram, MatchesScalarLoop) {
  Rng rng(1);
  const SpatialKernel k{(VectorXd(2) << 0.8, 1.7).finished(), 0.9};
  const Points X = testing::random_points(rng, 5, 2);
  const MatrixXd G = spatial_gram(k, X, X);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      double sq = 0.0;
      for (int d = 0; d < 2; ++d) {
        const double diff = k.inverse_lengthscale(d) * (X(i, d) - X(j, d));
        sq += diff * diff;
      }
      EXPECT_NEAR(G(i, j), 0.9 * std::exp(-0.5 * sq), 1e-14);
    }
  }
}

TEST(SpatialGram, DimensionMismatch) {
  const SpatialKernel k{VectorXd::Ones(2), 1.0};
  EXPECT_THROW(spatial_gram(k, Points::Zero(2, 1), Points::Zero(2, 1)),
               DimensionMismatch);
}

TEST(SpatialKernel, Validation) {
  EXPECT_THROW((SpatialKernel{VectorXd::Constant(1, -1.0), 1.0}.validate()),
               InvalidParameter);
  EXPECT_THROW((SpatialKernel{VectorXd::Ones(1), 0.0}.validate()),
               InvalidParameter);
  EXPECT_THROW(TemporalSdeKernel(MaternOrder::Half, 0.0), InvalidParameter);
}

TEST(MaternOrder, NamesRoundTrip) {
  for (auto order : kOrders) {
    EXPECT_EQ(parse_matern_order(to_string(order)), order);
  }
  EXPECT_THROW(parse_matern_order("matern72"), InvalidParameter);
}

TEST(TemporalSdeKernel, StateDimensionsAndUnitVariance) {
  int expected = 1;
  for (auto order : kOrders) {
    const TemporalSdeKernel k(order, 0.8);
    EXPECT_EQ(k.state_dim(), expected++);
    const auto e = k.emission_row();
    EXPECT_NEAR((e * k.stationary_cov() * e.transpose())(0, 0), 1.0, 1e-12);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(k.stationary_cov());
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(SdeDiscretize, OrnsteinUhlenbeckClosedForm) {
  const double l = 1.7;
  for (double dt : {0.0, 0.3, 2.0}) {
    const auto d = sde_discretize(TemporalSdeKernel(MaternOrder::Half, l), dt);
    EXPECT_NEAR(d.A(0, 0), std::exp(-dt / l), 1e-15);
    EXPECT_NEAR(d.Q(0, 0), 1.0 - std::exp(-2.0 * dt / l), 1e-15);
  }
}

TEST(SdeDiscretize, ZeroStepIsIdentity) {
  for (auto order : kOrders) {
    const TemporalSdeKernel k(order, 1.1);
    const auto d = sde_discretize(k, 0.0);
    const int D = k.state_dim();
    EXPECT_LE(max_relative_error(d.A, MatrixXd::Identity(D, D)), 1e-15);
    EXPECT_LE(d.Q.cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(SdeDiscretize, CovarianceReconstructionMatchesAnalyticMatern) {
  for (auto order : {MaternOrder::ThreeHalves, MaternOrder::FiveHalves}) {
    const TemporalSdeKernel k(order, 1.3);
    for (double dt : {0.1, 1.0, 7.3}) {
      EXPECT_NEAR(sde_cov(k, dt), matern(order, 1.3, dt), 1e-10);
    }
  }
}

TEST(SdeDiscretize, RejectsNegativeStep) {
  EXPECT_THROW(sde_discretize(TemporalSdeKernel(MaternOrder::Half, 1.0), -0.1),
               NegativeTimestep);
}

TEST(TemporalCov, ClosedForms) {
  for (auto order : kOrders) {
    EXPECT_DOUBLE_EQ(temporal_cov(TemporalSdeKernel(order, 0.4), 0.0), 1.0);
  }
  EXPECT_NEAR(temporal_cov(TemporalSdeKernel(MaternOrder::Half, 1.0), 1.0),
              std::exp(-1.0), 1e-15);
  EXPECT_NEAR(temporal_cov(TemporalSdeKernel(MaternOrder::Half, 1.0), 1.0),
              0.3679, 1e-4);
  const TemporalSdeKernel k52(MaternOrder::FiveHalves, 1.2);
  EXPECT_NEAR(temporal_cov(k52, 0.5), sde_cov(k52, 0.5), 1e-12);
  EXPECT_NEAR(temporal_cov(k52, -0.5), temporal_cov(k52, 0.5), 0.0);
}

TEST(TemporalSdeKernel, StateCrossCovRelations) {
  const TemporalSdeKernel k(MaternOrder::FiveHalves, 0.9);
  const MatrixXd fwd = k.state_cross_cov(2.0, 1.2);
  const MatrixXd bwd = k.state_cross_cov(1.2, 2.0);
  EXPECT_LE(max_relative_error(fwd, bwd.transpose()), 1e-15);
  EXPECT_LE(max_relative_error(fwd, k.transition(0.8) * k.stationary_cov()),
            1e-15);
  EXPECT_LE(max_relative_error(k.state_cross_cov(1.0, 1.0), k.stationary_cov()),
            1e-15);
}

TEST(KernelProperties, StateSpaceExactness) {
  Rng rng(2);
  for (auto order : kOrders) {
    for (int trial = 0; trial < 50; ++trial) {
      const double l = testing::uniform(rng, 0.1, 5.0);
      const double dt = testing::uniform(rng, 0.0, 10.0);
      const TemporalSdeKernel k(order, l);
      EXPECT_NEAR(temporal_cov(k, dt), sde_cov(k, dt), 1e-10);
      EXPECT_NEAR(temporal_cov(k, dt), matern(order, l, dt), 1e-10);
    }
  }
}

TEST(KernelProperties, SemigroupAndStationarity) {
  Rng rng(3);
  for (auto order : kOrders) {
    for (int trial = 0; trial < 50; ++trial) {
      const TemporalSdeKernel k(order, testing::uniform(rng, 0.2, 3.0));
      const double a = testing::uniform(rng, 0.0, 3.0);
      const double b = testing::uniform(rng, 0.0, 3.0);
      EXPECT_LE(max_relative_error(k.transition(a + b),
                                   k.transition(b) * k.transition(a)),
                1e-10);
      const auto d = sde_discretize(k, a);
      const MatrixXd &P = k.stationary_cov();
      EXPECT_LE(max_relative_error(d.A * P * d.A.transpose() + d.Q, P), 1e-10);
    }
  }
}

SumSeparableKernel two_component_kernel() {
  return {{{SpatialKernel{VectorXd::Ones(1), 0.7},
            TemporalSdeKernel(MaternOrder::Half, 1.0)},
           {SpatialKernel{VectorXd::Constant(1, 5.0), 0.3},
            TemporalSdeKernel(MaternOrder::FiveHalves, 0.5)}}};
}

TEST(FullGram, SingleTimeReducesToSpatialGram) {
  Rng rng(4);
  const auto kernel = testing::random_kernel(rng, 1, 2);
  const Points X = testing::random_points(rng, 6, 2);
  const VectorXd t = VectorXd::Constant(6, 0.3);
  EXPECT_LE(max_relative_error(full_gram(kernel, X, t),
                               spatial_gram(kernel[0].spatial, X, X)),
            1e-15);
}

TEST(FullGram, AmplitudesSumOnDiagonal) {
  Rng rng(5);
  const auto kernel = two_component_kernel();
  const Points X = testing::random_points(rng, 4, 1);
  const VectorXd t = testing::random_times(rng, 4);
  const MatrixXd G = full_gram(kernel, X, t);
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(G(i, i), 1.0, 1e-15);
  }
  EXPECT_DOUBLE_EQ(kernel.prior_variance(), 1.0);
}

TEST(FullGram, SymmetricPositiveSemidefinite) {
  Rng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const auto kernel = testing::random_kernel(rng, 2, 2);
    const Points X = testing::random_points(rng, 6, 2);
    const VectorXd t = testing::random_times(rng, 6);
    const MatrixXd G = full_gram(kernel, X, t);
    EXPECT_LE((G - G.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(G);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10);
  }
}

TEST(FullGram, RectilinearGridIsKronecker) {
  Rng rng(7);
  for (auto order : kOrders) {
    const SumSeparableKernel kernel{
        {testing::random_component(rng, 2, order)}};
    const Points R = testing::random_points(rng, 3, 2);
    const VectorXd tau = testing::random_times(rng, 4);
    // Space-major: point i * T + k is location i at time k.
    Points X(12, 2);
    VectorXd t(12);
    for (int i = 0; i < 3; ++i) {
      for (int k = 0; k < 4; ++k) {
        X.row(i * 4 + k) = R.row(i);
        t(i * 4 + k) = tau(k);
      }
    }
    MatrixXd Ct(4, 4);
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        Ct(a, b) = temporal_cov(kernel[0].temporal, tau(a) - tau(b));
      }
    }
    EXPECT_LE(max_relative_error(full_gram(kernel, X, t),
                                 kron(spatial_gram(kernel[0].spatial, R, R), Ct)),
              1e-12);
  }
}

TEST(FullGram, Errors) {
  const auto kernel = two_component_kernel();
  EXPECT_THROW(full_gram(kernel, Points::Zero(3, 1), VectorXd::Zero(2)),
               DimensionMismatch);
  EXPECT_THROW(full_gram(kernel, Points::Zero(2, 2), VectorXd::Zero(2)),
               DimensionMismatch);
  SumSeparableKernel mixed = kernel;
  mixed.components[1].spatial.inverse_lengthscale = VectorXd::Ones(2);
  EXPECT_THROW(mixed.validate(), DimensionMismatch);
  EXPECT_THROW(SumSeparableKernel{}.validate(), InvalidParameter);
}

} // namespace
} // namespace stgp
