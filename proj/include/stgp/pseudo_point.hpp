#pragma once

// Variational pseudo-point approximation of the state-space form of a
// (sum-)separable spatio-temporal GP.
//
// Pseudo-points sit on the grid  Z x {pseudo times} x {latent dimensions}.
// Because the state-space kernel separates over space and (time, latent
// dimension), the observations at time t only interact with the function-value
// pseudo-points u_t at the same time. The optimal q(u) is then the exact
// posterior of a small LGSSM over the pseudo-point states with emissions
//
//   y_t | u_t ~ N(W_t u_t, S_t),   W_t = C_{f_t u_t} C_u^{-1},
//
// so the saturated ELBO costs O(T (M D)^3) rather than O(T^3 M^3).

#include <cstddef>
#include <vector>

#include "stgp/kernels.hpp"
#include "stgp/lgssm.hpp"

namespace stgp {

/// Diagonal jitter added to each component's pseudo-input gram, relative to
/// that component's amplitude.
inline constexpr double kPseudoJitter = 1e-8;

struct PseudoInputs {
  /// Either one shared set of spatial pseudo-inputs, or one per component.
  std::vector<Points> spatial;
  /// Strictly increasing pseudo-point times.
  VectorXd times;

  static PseudoInputs shared(Points z, VectorXd times);
  const Points &for_component(std::size_t p) const;
  Eigen::Index num_times() const { return times.size(); }
  void validate(const SumSeparableKernel &kernel) const;
};

struct TimeBucket {
  double time = 0.0;
  Points X;
  VectorXd y;
  VectorXd noise;

  Eigen::Index size() const { return y.size(); }
};

/// Observations grouped by time stamp, buckets in strictly increasing time.
struct TimeGroupedData {
  std::vector<TimeBucket> buckets;

  Eigen::Index total() const;
  VectorXd times() const;
  void validate() const;
};

/// Power-EP interpolation between the variational/DTC model (alpha = 0) and
/// FITC (alpha = 1).
struct ApproximationFamily {
  double alpha = 0.0;

  void validate() const;
};

/// Projection of one time bucket onto its pseudo-points.
struct BucketProjection {
  /// Index of the matching pseudo time.
  Eigen::Index step = 0;
  /// Per component, C_{f_t u_t} C_u^{-1} (N_t x M_p). The full B_t^p of the
  /// state-space model is this matrix followed by the function-value selector.
  std::vector<MatrixXd> weights;
  /// diag(C_{f_t} - C_{f_t u_t} C_u^{-1} C_{u_t f_t}), summed over components.
  VectorXd residual;
};

/// Union of the observation times, the default pseudo-point times.
VectorXd pseudo_times_from(const TimeGroupedData &data);

std::vector<BucketProjection>
projection_matrices(const SumSeparableKernel &kernel, const PseudoInputs &z,
                    const TimeGroupedData &data);

/// B_t^p including the selector: N_t x (M_p D_p).
MatrixXd expand_projection(const MatrixXd &weights, int state_dim);

/// Per-bucket noise S_t + alpha * residual_t.
std::vector<VectorXd> modified_noise(const SumSeparableKernel &kernel,
                                     const PseudoInputs &z,
                                     const TimeGroupedData &data,
                                     ApproximationFamily family);

Lgssm approximate_lgssm(const SumSeparableKernel &kernel,
                        const PseudoInputs &z, const TimeGroupedData &data,
                        ApproximationFamily family = {});

/// Saturated (collapsed) evidence lower bound.
double elbo(const SumSeparableKernel &kernel, const PseudoInputs &z,
            const TimeGroupedData &data);

/// Log marginal likelihood of the approximate model for any alpha; alpha = 0
/// is the DTC evidence, alpha = 1 the FITC evidence.
double approximate_lml(const SumSeparableKernel &kernel, const PseudoInputs &z,
                       const TimeGroupedData &data,
                       ApproximationFamily family);

struct MarginalPredictions {
  VectorXd mean;
  VectorXd variance;
};

/// Marginals of the latent function at query points whose times are pseudo
/// times. Throws QueryTimeNotOnGrid otherwise.
MarginalPredictions predict(const SumSeparableKernel &kernel,
                            const PseudoInputs &z, const TimeGroupedData &data,
                            const Points &query_x, const VectorXd &query_t,
                            ApproximationFamily family = {});

/// Point (space, time, latent dimension); dimension 0 is the function value.
struct LatentIndex {
  double time = 0.0;
  int dim = 0;
};

struct ConditionalIndependenceSets {
  Points x1;
  Points x2;
  std::vector<LatentIndex> y1;
  std::vector<LatentIndex> y2;
};

/// max |cov(f(X1,Y1), f(X2,Y2) | f(X2,Y1))| under the state-space kernel,
/// computed densely. Exactly zero in exact arithmetic for separable kernels.
double conditional_independence_residual(const SumSeparableKernel &kernel,
                                         const ConditionalIndependenceSets &sets);

/// Covariance of the augmented (latent-dimension) process between two
/// lists of points. Components lacking a latent dimension contribute zero.
MatrixXd latent_cross_cov(const SumSeparableKernel &kernel, const Points &X,
                          const std::vector<LatentIndex> &Y, const Points &Xp,
                          const std::vector<LatentIndex> &Yp);

namespace detail {

std::vector<BucketProjection>
projection_matrices_serial(const SumSeparableKernel &kernel,
                           const PseudoInputs &z, const TimeGroupedData &data);

std::vector<BucketProjection>
projection_matrices_parallel(const SumSeparableKernel &kernel,
                             const PseudoInputs &z,
                             const TimeGroupedData &data);

/// Index of each bucket's time among the pseudo times; throws
/// TimeAlignmentError on a miss.
std::vector<Eigen::Index> align_buckets(const VectorXd &pseudo_times,
                                        const TimeGroupedData &data);

} // namespace detail

} // namespace stgp
