#include "stgp/state_space_gp.hpp"

#include <algorithm>
#include <string>

namespace stgp {

void RectilinearSpec::validate() const {
  for (Eigen::Index t = 1; t < times.size(); ++t) {
    if (!(times(t) > times(t - 1))) {
      throw NonIncreasingTimes("grid times must be strictly increasing (index " +
                               std::to_string(t) + ")");
    }
  }
  if (static_cast<Eigen::Index>(present.size()) != times.size()) {
    throw MaskLengthMismatch("need one presence mask per time");
  }
  for (std::size_t t = 0; t < present.size(); ++t) {
    if (static_cast<Eigen::Index>(present[t].size()) != locations.rows()) {
      throw MaskLengthMismatch("presence mask at time index " +
                               std::to_string(t) + " has length " +
                               std::to_string(present[t].size()) +
                               ", expected " +
                               std::to_string(locations.rows()));
    }
  }
}

RectilinearSpec RectilinearSpec::full(VectorXd times, Points locations) {
  RectilinearSpec s;
  s.present.assign(static_cast<std::size_t>(times.size()),
                   std::vector<bool>(static_cast<std::size_t>(locations.rows()),
                                     true));
  s.times = std::move(times);
  s.locations = std::move(locations);
  return s;
}

StateSpaceGp::StateSpaceGp(SumSeparableKernel kernel)
    : kernel_(std::move(kernel)) {
  kernel_.validate();
}

Eigen::Index StateSpaceGp::block_offset(std::size_t p, Eigen::Index n) const {
  Eigen::Index off = 0;
  for (std::size_t q = 0; q < p; ++q) {
    off += n * kernel_[q].temporal.state_dim();
  }
  return off;
}

Eigen::Index StateSpaceGp::state_dim(Eigen::Index n) const {
  return n * kernel_.total_state_dim();
}

MatrixXd StateSpaceGp::value_selector(Eigen::Index n) const {
  MatrixXd H = MatrixXd::Zero(n, state_dim(n));
  for (std::size_t p = 0; p < kernel_.size(); ++p) {
    const auto off = block_offset(p, n);
    const int D = kernel_[p].temporal.state_dim();
    for (Eigen::Index i = 0; i < n; ++i) {
      H(i, off + i * D) = 1.0;
    }
  }
  return H;
}

Lgssm StateSpaceGp::build_lgssm(const RectilinearSpec &spec,
                                const GridObservations &obs) const {
  spec.validate();
  const auto T = spec.num_times();
  const auto n = spec.num_locations();
  if (static_cast<Eigen::Index>(obs.y.size()) != T ||
      static_cast<Eigen::Index>(obs.noise.size()) != T) {
    throw DimensionMismatch("need observations and noise for every time");
  }
  const auto dim = state_dim(n);

  std::vector<MatrixXd> spatial;
  spatial.reserve(kernel_.size());
  for (const auto &c : kernel_.components) {
    spatial.push_back(spatial_gram(c.spatial, spec.locations, spec.locations));
  }

  Lgssm model;
  model.x0.mean = VectorXd::Zero(dim);
  model.x0.cov = MatrixXd::Zero(dim, dim);
  for (std::size_t p = 0; p < kernel_.size(); ++p) {
    const auto off = block_offset(p, n);
    const auto &P = kernel_[p].temporal.stationary_cov();
    const auto w = n * P.rows();
    model.x0.cov.block(off, off, w, w) = kron(spatial[p], P);
  }

  const MatrixXd H = value_selector(n);
  model.steps.reserve(static_cast<std::size_t>(T));
  for (Eigen::Index t = 0; t < T; ++t) {
    TimeStep step;
    if (t == 0) {
      step.transition = LinearGaussianConditional::identity(dim);
    } else {
      const double dt = spec.times(t) - spec.times(t - 1);
      step.transition.A = MatrixXd::Zero(dim, dim);
      step.transition.a = VectorXd::Zero(dim);
      step.transition.Q = MatrixXd::Zero(dim, dim);
      for (std::size_t p = 0; p < kernel_.size(); ++p) {
        const auto d = sde_discretize(kernel_[p].temporal, dt);
        const auto off = block_offset(p, n);
        const auto w = n * d.A.rows();
        step.transition.A.block(off, off, w, w) =
            kron(MatrixXd::Identity(n, n), d.A);
        step.transition.Q.block(off, off, w, w) = kron(spatial[p], d.Q);
      }
    }

    const auto &mask = spec.present[static_cast<std::size_t>(t)];
    const auto n_obs = std::count(mask.begin(), mask.end(), true);
    const auto &yt = obs.y[static_cast<std::size_t>(t)];
    const auto &st = obs.noise[static_cast<std::size_t>(t)];
    if (yt.size() != n_obs || st.size() != n_obs) {
      throw DimensionMismatch("time index " + std::to_string(t) + " has " +
                              std::to_string(n_obs) +
                              " present locations but " +
                              std::to_string(yt.size()) + " values");
    }
    if (!(st.array() > 0.0).all()) {
      throw InvalidParameter("observation noise variances must be positive");
    }
    MatrixXd select = MatrixXd::Zero(n_obs, n);
    Eigen::Index row = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (mask[static_cast<std::size_t>(i)]) {
        select(row++, i) = 1.0;
      }
    }
    step.emission.model =
        LinearGaussianConditional::diagonal(select, VectorXd::Zero(n_obs), st);
    step.emission.bottleneck = Bottleneck{H, VectorXd::Zero(n)};
    step.y = yt;
    model.steps.push_back(std::move(step));
  }
  return model;
}

double StateSpaceGp::lml(const RectilinearSpec &spec,
                         const GridObservations &obs) const {
  return log_marginal_likelihood(build_lgssm(spec, obs));
}

std::vector<Gaussian>
StateSpaceGp::posterior_grid_marginals(const RectilinearSpec &spec,
                                       const GridObservations &obs) const {
  const auto model = build_lgssm(spec, obs);
  const auto smoothed = smooth(model);
  const MatrixXd H = value_selector(spec.num_locations());
  std::vector<Gaussian> out;
  out.reserve(smoothed.states.size());
  for (const auto &s : smoothed.states) {
    Gaussian g;
    g.mean = H * s.mean;
    g.cov = H * s.cov * H.transpose();
    symmetrize(g.cov);
    out.push_back(std::move(g));
  }
  return out;
}

} // namespace stgp
