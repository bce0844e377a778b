#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "stgp/linalg.hpp"

namespace stgp {

/// Narrow intermediate z = H x + h through which an emission acts.
struct Bottleneck {
  MatrixXd H;
  VectorXd h;
};

/// Emission y_t | x_t. When `bottleneck` is set, `model` acts on z and the
/// composed map is model.A * H.
struct Emission {
  LinearGaussianConditional model;
  std::optional<Bottleneck> bottleneck;

  /// Emission expressed directly on the state.
  LinearGaussianConditional composed() const;
  Eigen::Index output_dim() const { return model.output_dim(); }
};

/// One step of the chain. The first step's transition maps the initial
/// state x0 to the first state (builders use the identity with zero noise).
struct TimeStep {
  LinearGaussianConditional transition;
  Emission emission;
  VectorXd y;
};

enum class UpdateMethod {
  Auto,       ///< bottleneck when an emission supplies one, else low rank
  Naive,
  LowRank,
  Bottleneck,
};

struct Lgssm {
  Gaussian x0;
  std::vector<TimeStep> steps;
  UpdateMethod method = UpdateMethod::Auto;

  std::size_t size() const { return steps.size(); }
  /// Checks dimensional consistency along the chain.
  void validate() const;
};

struct FilterResult {
  double lml = 0.0;
  std::vector<Gaussian> filtered;
  /// Per-step log p(y_t | y_{1:t-1}).
  std::vector<double> step_lml;
};

struct PosteriorMarginals {
  std::vector<Gaussian> states;
  /// Noise-free emitted values, composed emission applied to each state.
  std::vector<Gaussian> emitted;
};

struct Sample {
  std::vector<VectorXd> states;
  std::vector<VectorXd> observations;
};

FilterResult filter(const Lgssm &model);

/// Log marginal likelihood only; skips storing the filtered marginals.
double log_marginal_likelihood(const Lgssm &model);

PosteriorMarginals smooth(const Lgssm &model);

Sample sample(const Lgssm &model, std::uint64_t seed);

/// Marginals of the prior chain (no conditioning on y).
std::vector<Gaussian> prior_marginals(const Lgssm &model);

} // namespace stgp
