#pragma once

// ELBO-based hyperparameter fitting: constrained parameters optimized in an
// unconstrained space with L-BFGS and finite-difference gradients.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stgp/kernels.hpp"
#include "stgp/pseudo_point.hpp"

namespace stgp {

enum class Transform { LogPositive, RescaledLogit, Identity };

/// Bound on unconstrained values; transforms of the domain edges saturate
/// here instead of producing infinities.
inline constexpr double kUnconstrainedLimit = 30.0;

struct ParameterSpec {
  std::string name;
  Transform transform = Transform::Identity;
  double lo = 0.0;
  double hi = 1.0;
};

double to_constrained(const ParameterSpec &spec, double theta);
double to_unconstrained(const ParameterSpec &spec, double value);

struct ParameterVector {
  std::vector<ParameterSpec> specs;
  /// Unconstrained values.
  VectorXd theta;

  std::size_t size() const { return specs.size(); }
  double value(std::size_t i) const;
  void set_value(std::size_t i, double value);
  std::optional<std::size_t> find(const std::string &name) const;
  void push(ParameterSpec spec, double value);
};

/// Default bounds of the learned observation noise variance.
inline constexpr double kNoiseLo = 1e-2;
inline constexpr double kNoiseHi = 2.0;

/// Kernel and noise parameterization. Parameters are named
/// kernel.<p>.inverse_lengthscale.<d>, kernel.<p>.amplitude,
/// kernel.<p>.temporal_lengthscale and noise.variance.
ParameterVector pack_parameters(const SumSeparableKernel &kernel,
                                std::optional<double> noise_variance);

/// Rebuilds the kernel from a packed vector; `orders` fixes the Matérn order
/// of each component.
SumSeparableKernel unpack_kernel(const ParameterVector &params,
                                 const std::vector<MaternOrder> &orders);

std::optional<double> unpack_noise(const ParameterVector &params);

/// Initialization used in the benchmarks: Lambda = 1, s = 1, lambda = 1e-2
/// for one component; lambda = {1e-3, 1e-1}, Lambda = {1, 5},
/// s = {0.7, 0.3} for two. The temporal lengthscale is 1 / lambda.
SumSeparableKernel default_kernel(const std::vector<MaternOrder> &orders,
                                  Eigen::Index input_dim);
inline constexpr double kDefaultNoiseVariance = 0.5;

struct TrainingProblem {
  TimeGroupedData data;
  PseudoInputs z;
  std::vector<MaternOrder> orders;
};

/// Value returned when inference fails, so line searches back off.
inline constexpr double kFailurePenalty = 1e12;

/// -elbo at the given parameters. A packed noise variance replaces the
/// per-observation noise of the data.
double objective(const ParameterVector &params, const TrainingProblem &problem);

using ScalarFunction = std::function<double(const VectorXd &)>;

/// Central differences with step 1e-5 * (1 + |theta_i|); coordinates are
/// evaluated concurrently, so f must be thread-safe.
VectorXd finite_difference_gradient(const ScalarFunction &f,
                                    const VectorXd &theta);

VectorXd gradient(const ParameterVector &params,
                  const TrainingProblem &problem);

struct FitConfig {
  int memory = 50;
  int max_iterations = 200;
  double gradient_tolerance = 1e-6;
  double armijo = 1e-4;
  double shrink = 0.5;
  int max_backtracks = 40;
};

struct TraceEntry {
  int iteration = 0;
  double objective = 0.0;
  double gradient_norm = 0.0;
};

enum class FitStatus { Converged, MaxIterations, LineSearchFailure };

std::string_view to_string(FitStatus status);

struct MinimizeResult {
  VectorXd theta;
  double objective = 0.0;
  std::vector<TraceEntry> trace;
  FitStatus status = FitStatus::MaxIterations;
};

/// L-BFGS with backtracking Armijo line search. The trace holds the initial
/// point and every accepted step.
MinimizeResult minimize_lbfgs(const ScalarFunction &f, VectorXd theta,
                              const FitConfig &config);

struct FitResult {
  ParameterVector params;
  std::vector<TraceEntry> trace;
  FitStatus status = FitStatus::MaxIterations;
};

FitResult fit(const TrainingProblem &problem, const ParameterVector &init,
              const FitConfig &config = {});

} // namespace stgp
