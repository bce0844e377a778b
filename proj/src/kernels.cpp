#include "stgp/kernels.hpp"

#include <cmath>

namespace stgp {

double SpatialKernel::operator()(
    const Eigen::Ref<const Eigen::RowVectorXd> &x,
    const Eigen::Ref<const Eigen::RowVectorXd> &xp) const {
  const double r2 =
      (x - xp).cwiseProduct(inverse_lengthscale.transpose()).squaredNorm();
  return amplitude * std::exp(-0.5 * r2);
}

void SpatialKernel::validate() const {
  if (inverse_lengthscale.size() == 0) {
    throw InvalidParameter("spatial kernel needs at least one dimension");
  }
  if (!(inverse_lengthscale.array() > 0.0).all() ||
      !inverse_lengthscale.allFinite()) {
    throw InvalidParameter("spatial inverse lengthscales must be positive");
  }
  if (!(amplitude > 0.0) || !std::isfinite(amplitude)) {
    throw InvalidParameter("spatial amplitude must be positive");
  }
}

std::string_view to_string(MaternOrder order) {
  switch (order) {
  case MaternOrder::Half:
    return "matern12";
  case MaternOrder::ThreeHalves:
    return "matern32";
  case MaternOrder::FiveHalves:
    return "matern52";
  }
  return "unknown";
}

MaternOrder parse_matern_order(std::string_view name) {
  if (name == "matern12") {
    return MaternOrder::Half;
  }
  if (name == "matern32") {
    return MaternOrder::ThreeHalves;
  }
  if (name == "matern52") {
    return MaternOrder::FiveHalves;
  }
  throw InvalidParameter("unknown temporal kernel '" + std::string(name) +
                         "' (expected matern12, matern32 or matern52)");
}

TemporalSdeKernel::TemporalSdeKernel(MaternOrder order, double lengthscale)
    : order_(order), lengthscale_(lengthscale) {
  if (!(lengthscale > 0.0) || !std::isfinite(lengthscale)) {
    throw InvalidParameter("temporal lengthscale must be positive");
  }
  const double lam = rate();
  switch (order_) {
  case MaternOrder::Half:
    stationary_cov_ = MatrixXd::Ones(1, 1);
    break;
  case MaternOrder::ThreeHalves:
    stationary_cov_ = MatrixXd::Zero(2, 2);
    stationary_cov_(0, 0) = 1.0;
    stationary_cov_(1, 1) = lam * lam;
    break;
  case MaternOrder::FiveHalves: {
    const double kappa = lam * lam / 3.0;
    stationary_cov_ = MatrixXd::Zero(3, 3);
    stationary_cov_(0, 0) = 1.0;
    stationary_cov_(1, 1) = kappa;
    stationary_cov_(0, 2) = stationary_cov_(2, 0) = -kappa;
    stationary_cov_(2, 2) = lam * lam * lam * lam;
    break;
  }
  }
}

double TemporalSdeKernel::rate() const {
  switch (order_) {
  case MaternOrder::Half:
    return 1.0 / lengthscale_;
  case MaternOrder::ThreeHalves:
    return std::sqrt(3.0) / lengthscale_;
  case MaternOrder::FiveHalves:
    return std::sqrt(5.0) / lengthscale_;
  }
  return 0.0;
}

MatrixXd TemporalSdeKernel::drift() const {
  const double lam = rate();
  const int d = state_dim();
  MatrixXd F = MatrixXd::Zero(d, d);
  switch (order_) {
  case MaternOrder::Half:
    F(0, 0) = -lam;
    break;
  case MaternOrder::ThreeHalves:
    F(0, 1) = 1.0;
    F(1, 0) = -lam * lam;
    F(1, 1) = -2.0 * lam;
    break;
  case MaternOrder::FiveHalves:
    F(0, 1) = 1.0;
    F(1, 2) = 1.0;
    F(2, 0) = -lam * lam * lam;
    F(2, 1) = -3.0 * lam * lam;
    F(2, 2) = -3.0 * lam;
    break;
  }
  return F;
}

Eigen::RowVectorXd TemporalSdeKernel::emission_row() const {
  Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(state_dim());
  e(0) = 1.0;
  return e;
}

MatrixXd TemporalSdeKernel::transition(double dt) const {
  // The drift has the single eigenvalue -rate with full multiplicity, so
  // N = F + rate * I is nilpotent and exp(F dt) = exp(-rate dt) exp(N dt)
  // truncates after the D-th term.
  const double lam = rate();
  const int d = state_dim();
  MatrixXd N = drift();
  N.diagonal().array() += lam;
  MatrixXd E = MatrixXd::Identity(d, d);
  MatrixXd term = MatrixXd::Identity(d, d);
  for (int k = 1; k < d; ++k) {
    term = (term * N) * (dt / k);
    E += term;
  }
  return std::exp(-lam * dt) * E;
}

double TemporalSdeKernel::covariance(double dt) const {
  const double r = std::abs(dt);
  const double lr = rate() * r;
  switch (order_) {
  case MaternOrder::Half:
    return std::exp(-lr);
  case MaternOrder::ThreeHalves:
    return (1.0 + lr) * std::exp(-lr);
  case MaternOrder::FiveHalves:
    return (1.0 + lr + lr * lr / 3.0) * std::exp(-lr);
  }
  return 0.0;
}

MatrixXd TemporalSdeKernel::state_cross_cov(double tau,
                                            double tau_prime) const {
  if (tau >= tau_prime) {
    return transition(tau - tau_prime) * stationary_cov_;
  }
  return stationary_cov_ * transition(tau_prime - tau).transpose();
}

Eigen::Index SumSeparableKernel::input_dim() const {
  return components.empty() ? 0 : components.front().spatial.input_dim();
}

int SumSeparableKernel::total_state_dim() const {
  int total = 0;
  for (const auto &c : components) {
    total += c.temporal.state_dim();
  }
  return total;
}

void SumSeparableKernel::validate() const {
  if (components.empty()) {
    throw InvalidParameter("a kernel needs at least one component");
  }
  for (const auto &c : components) {
    c.spatial.validate();
    if (c.spatial.input_dim() != input_dim()) {
      throw DimensionMismatch("all components must share the spatial "
                              "dimension");
    }
  }
}

double SumSeparableKernel::prior_variance() const {
  double v = 0.0;
  for (const auto &c : components) {
    v += c.spatial.amplitude;
  }
  return v;
}

MatrixXd spatial_gram(const SpatialKernel &k, const Points &X,
                      const Points &Xp) {
  if (X.cols() != k.input_dim() || Xp.cols() != k.input_dim()) {
    throw DimensionMismatch("spatial points have " + std::to_string(X.cols()) +
                            " coordinates, kernel expects " +
                            std::to_string(k.input_dim()));
  }
  const MatrixXd S = X * k.inverse_lengthscale.asDiagonal();
  const MatrixXd Sp = Xp * k.inverse_lengthscale.asDiagonal();
  MatrixXd K(X.rows(), Xp.rows());
  for (Eigen::Index j = 0; j < Xp.rows(); ++j) {
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      K(i, j) = k.amplitude * std::exp(-0.5 * (S.row(i) - Sp.row(j)).squaredNorm());
    }
  }
  return K;
}

Discretization sde_discretize(const TemporalSdeKernel &k, double dt) {
  if (dt < 0.0 || std::isnan(dt)) {
    throw NegativeTimestep("time step must be nonnegative, got " +
                           std::to_string(dt));
  }
  Discretization d;
  if (dt == 0.0) {
    d.A = MatrixXd::Identity(k.state_dim(), k.state_dim());
    d.Q = MatrixXd::Zero(k.state_dim(), k.state_dim());
    return d;
  }
  d.A = k.transition(dt);
  const auto &P = k.stationary_cov();
  d.Q = P - d.A * P * d.A.transpose();
  symmetrize(d.Q);
  return d;
}

double temporal_cov(const TemporalSdeKernel &k, double dt) {
  return k.covariance(dt);
}

MatrixXd full_cross_gram(const SumSeparableKernel &k, const Points &X,
                         const VectorXd &t, const Points &Xp,
                         const VectorXd &tp) {
  if (X.rows() != t.size() || Xp.rows() != tp.size()) {
    throw DimensionMismatch("each point needs exactly one time stamp");
  }
  MatrixXd K = MatrixXd::Zero(X.rows(), Xp.rows());
  for (const auto &c : k.components) {
    const MatrixXd Kr = spatial_gram(c.spatial, X, Xp);
    for (Eigen::Index j = 0; j < Xp.rows(); ++j) {
      for (Eigen::Index i = 0; i < X.rows(); ++i) {
        K(i, j) += Kr(i, j) * c.temporal.covariance(t(i) - tp(j));
      }
    }
  }
  return K;
}

MatrixXd full_gram(const SumSeparableKernel &k, const Points &X,
                   const VectorXd &t) {
  return full_cross_gram(k, X, t, X, t);
}

} // namespace stgp
