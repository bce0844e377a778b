#pragma once

// Exact LGSSM form of a (sum-)separable GP observed on a rectilinear grid of
// times x spatial locations, with optional per-time missing entries.
//
// State layout at each time: components stacked by p; within component p the
// block is space-major, so latent dimension d of location i sits at offset
// i * D_p + d.

#include <vector>

#include "stgp/kernels.hpp"
#include "stgp/lgssm.hpp"

namespace stgp {

struct RectilinearSpec {
  VectorXd times;
  Points locations;
  /// present[t][i] is true when location i is observed at times(t).
  std::vector<std::vector<bool>> present;

  Eigen::Index num_times() const { return times.size(); }
  Eigen::Index num_locations() const { return locations.rows(); }
  void validate() const;
  /// Everything observed.
  static RectilinearSpec full(VectorXd times, Points locations);
};

struct GridObservations {
  /// y[t] holds the observed values at time t, in location order, skipping
  /// masked entries.
  std::vector<VectorXd> y;
  /// Matching per-observation noise variances.
  std::vector<VectorXd> noise;
};

class StateSpaceGp {
public:
  explicit StateSpaceGp(SumSeparableKernel kernel);

  const SumSeparableKernel &kernel() const { return kernel_; }
  /// Offset of component p's block in a state with n spatial locations.
  Eigen::Index block_offset(std::size_t p, Eigen::Index n) const;
  Eigen::Index state_dim(Eigen::Index n) const;
  /// Maps the full state to the function values at all n locations.
  MatrixXd value_selector(Eigen::Index n) const;

  Lgssm build_lgssm(const RectilinearSpec &spec,
                    const GridObservations &obs) const;

  double lml(const RectilinearSpec &spec, const GridObservations &obs) const;

  /// Smoothed marginals of the function values at every grid location
  /// (masked ones included), one Gaussian per time.
  std::vector<Gaussian>
  posterior_grid_marginals(const RectilinearSpec &spec,
                           const GridObservations &obs) const;

private:
  SumSeparableKernel kernel_;
};

} // namespace stgp
