#pragma once

// Dense O(n^3) reference computations. Everything here is assembled from
// kernel evaluations and plain Eigen factorizations so it can check the
// structured code paths independently. Keep it small-scale.

#include <vector>

#include "stgp/kernels.hpp"
#include "stgp/lgssm.hpp"
#include "stgp/pseudo_point.hpp"

namespace stgp::oracle {

struct DenseGpProblem {
  SumSeparableKernel kernel;
  Points X;
  VectorXd t;
  VectorXd y;
  VectorXd noise;

  Eigen::Index size() const { return y.size(); }
  static DenseGpProblem from_buckets(const SumSeparableKernel &kernel,
                                     const TimeGroupedData &data);
};

/// log N(y; 0, C_f + S).
double exact_lml(const DenseGpProblem &p);

/// Covariance of all T * M * sum_p D_p pseudo-points, ordered
/// (component, time, spatial pseudo-input, latent dimension). Uses the same
/// jittered spatial gram as the structured code.
MatrixXd pseudo_cov(const SumSeparableKernel &kernel, const PseudoInputs &z);

/// Covariance between function values at (X, t) and all pseudo-points.
MatrixXd pseudo_cross_cov(const SumSeparableKernel &kernel,
                          const PseudoInputs &z, const Points &X,
                          const VectorXd &t);

/// C_fu C_u^{-1} C_uf over the data.
MatrixXd nystrom(const DenseGpProblem &p, const PseudoInputs &z);

double dense_saturated_bound(const DenseGpProblem &p, const PseudoInputs &z);

/// log N(y; 0, Q_ff + alpha diag(C_f - Q_ff) + S).
double dense_fitc_lml(const DenseGpProblem &p, const PseudoInputs &z,
                      double alpha);

/// Predictive marginals under the optimal q(u) of the saturated bound.
MarginalPredictions dense_predictive(const DenseGpProblem &p,
                                     const PseudoInputs &z,
                                     const Points &query_x,
                                     const VectorXd &query_t);

/// Exact GP posterior marginals at the query points.
MarginalPredictions exact_predictive(const DenseGpProblem &p,
                                     const Points &query_x,
                                     const VectorXd &query_t);

/// Posterior and lml of x ~ prior, y | x ~ obs by forming the joint over
/// (x, y) and taking the Schur complement.
InferenceResult joint_conditioning(const Gaussian &prior,
                                   const LinearGaussianConditional &obs,
                                   const VectorXd &y);

/// Prior joint of an LGSSM obtained by chaining its transitions densely.
struct DenseLgssmJoint {
  Gaussian states;
  Gaussian observations;
  /// Cov(states, observations).
  MatrixXd cross;
  std::vector<Eigen::Index> state_offset;
  std::vector<Eigen::Index> obs_offset;
};

DenseLgssmJoint dense_lgssm_joint(const Lgssm &model);

double dense_lgssm_lml(const Lgssm &model);

/// Per-step state marginals conditioned on every observation.
std::vector<Gaussian> dense_lgssm_posterior(const Lgssm &model);

} // namespace stgp::oracle
