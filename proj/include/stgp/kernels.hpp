#pragma once

// Spatial kernels, Matérn temporal kernels with their exact state-space (SDE)
// form, and sums of separable space x time products.

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stgp/linalg.hpp"

namespace stgp {

/// Spatial locations, one point per row.
using Points = Eigen::MatrixXd;

/// Exponentiated quadratic kernel s * exp(-0.5 |Lambda (x - x')|^2) with
/// Lambda = diag(inverse_lengthscale).
struct SpatialKernel {
  VectorXd inverse_lengthscale;
  double amplitude = 1.0;

  Eigen::Index input_dim() const { return inverse_lengthscale.size(); }
  double operator()(const Eigen::Ref<const Eigen::RowVectorXd> &x,
                    const Eigen::Ref<const Eigen::RowVectorXd> &xp) const;
  void validate() const;
};

enum class MaternOrder { Half = 1, ThreeHalves = 2, FiveHalves = 3 };

std::string_view to_string(MaternOrder order);
MaternOrder parse_matern_order(std::string_view name);

/// Unit-variance Matérn kernel of half-integer order, with its companion-form
/// SDE. The emitted process (first state coordinate) has variance 1.
class TemporalSdeKernel {
public:
  TemporalSdeKernel(MaternOrder order, double lengthscale);

  MaternOrder order() const { return order_; }
  double lengthscale() const { return lengthscale_; }
  int state_dim() const { return static_cast<int>(order_); }

  /// sqrt(2 nu) / lengthscale
  double rate() const;
  MatrixXd drift() const;
  const MatrixXd &stationary_cov() const { return stationary_cov_; }
  Eigen::RowVectorXd emission_row() const;

  /// exp(drift * dt), closed form.
  MatrixXd transition(double dt) const;
  /// Analytic covariance at lag |dt|.
  double covariance(double dt) const;
  /// Cov(x(tau), x(tau_prime)) over the full D-dimensional state.
  MatrixXd state_cross_cov(double tau, double tau_prime) const;

private:
  MaternOrder order_;
  double lengthscale_;
  MatrixXd stationary_cov_;
};

struct SeparableComponent {
  SpatialKernel spatial;
  TemporalSdeKernel temporal;
};

struct SumSeparableKernel {
  std::vector<SeparableComponent> components;

  std::size_t size() const { return components.size(); }
  const SeparableComponent &operator[](std::size_t p) const {
    return components[p];
  }
  Eigen::Index input_dim() const;
  /// Sum over components of D_p.
  int total_state_dim() const;
  void validate() const;
  /// kappa((x, t), (x, t)), the prior marginal variance.
  double prior_variance() const;
};

MatrixXd spatial_gram(const SpatialKernel &k, const Points &X,
                      const Points &Xp);

struct Discretization {
  MatrixXd A;
  MatrixXd Q;
};

/// Transition and process noise over a step dt >= 0, with stationary
/// initialization: Q = P_inf - A P_inf A^T.
Discretization sde_discretize(const TemporalSdeKernel &k, double dt);

double temporal_cov(const TemporalSdeKernel &k, double dt);

/// Dense gram over (space, time) points: sum_p k^r_p(x_i, x_j) k^t_p(t_i, t_j).
MatrixXd full_gram(const SumSeparableKernel &k, const Points &X,
                   const VectorXd &t);
MatrixXd full_cross_gram(const SumSeparableKernel &k, const Points &X,
                         const VectorXd &t, const Points &Xp,
                         const VectorXd &tp);

} // namespace stgp
