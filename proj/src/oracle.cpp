#include "stgp/oracle.hpp"

#include <cmath>
#include <numbers>

namespace stgp::oracle {

DenseGpProblem DenseGpProblem::from_buckets(const SumSeparableKernel &kernel,
                                            const TimeGroupedData &data) {
  DenseGpProblem p;
  p.kernel = kernel;
  const auto n = data.total();
  p.X.resize(n, kernel.input_dim());
  p.t.resize(n);
  p.y.resize(n);
  p.noise.resize(n);
  Eigen::Index row = 0;
  for (const auto &b : data.buckets) {
    const auto m = b.size();
    if (m == 0) {
      continue;
    }
    p.X.middleRows(row, m) = b.X;
    p.t.segment(row, m).setConstant(b.time);
    p.y.segment(row, m) = b.y;
    p.noise.segment(row, m) = b.noise;
    row += m;
  }
  return p;
}

double exact_lml(const DenseGpProblem &p) {
  MatrixXd K = full_gram(p.kernel, p.X, p.t);
  K.diagonal() += p.noise;
  return gaussian_log_density(p.y, VectorXd::Zero(p.size()), K);
}

namespace {

Eigen::Index pseudo_count(const SumSeparableKernel &kernel,
                          const PseudoInputs &z) {
  Eigen::Index n = 0;
  for (std::size_t p = 0; p < kernel.size(); ++p) {
    n += z.num_times() * z.for_component(p).rows() *
         kernel[p].temporal.state_dim();
  }
  return n;
}

} // namespace

MatrixXd pseudo_cov(const SumSeparableKernel &kernel, const PseudoInputs &z) {
  const auto n = pseudo_count(kernel, z);
  MatrixXd C = MatrixXd::Zero(n, n);
  const auto T = z.num_times();
  Eigen::Index off = 0;
  for (std::size_t p = 0; p < kernel.size(); ++p) {
    const auto &c = kernel[p];
    const auto &Z = z.for_component(p);
    const auto M = Z.rows();
    const int D = c.temporal.state_dim();
    MatrixXd Kr = spatial_gram(c.spatial, Z, Z);
    Kr.diagonal().array() += kPseudoJitter * c.spatial.amplitude;
    const auto block = M * D;
    for (Eigen::Index k = 0; k < T; ++k) {
      for (Eigen::Index l = 0; l < T; ++l) {
        const MatrixXd S = c.temporal.state_cross_cov(z.times(k), z.times(l));
        C.block(off + k * block, off + l * block, block, block) = kron(Kr, S);
      }
    }
    off += T * block;
  }
  return C;
}

MatrixXd pseudo_cross_cov(const SumSeparableKernel &kernel,
                          const PseudoInputs &z, const Points &X,
                          const VectorXd &t) {
  const auto n = pseudo_count(kernel, z);
  MatrixXd C = MatrixXd::Zero(X.rows(), n);
  const auto T = z.num_times();
  Eigen::Index off = 0;
  for (std::size_t p = 0; p < kernel.size(); ++p) {
    const auto &c = kernel[p];
    const auto &Z = z.for_component(p);
    const auto M = Z.rows();
    const int D = c.temporal.state_dim();
    const MatrixXd Kr = spatial_gram(c.spatial, X, Z);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      for (Eigen::Index k = 0; k < T; ++k) {
        const MatrixXd S = c.temporal.state_cross_cov(t(i), z.times(k));
        for (Eigen::Index m = 0; m < M; ++m) {
          for (int d = 0; d < D; ++d) {
            C(i, off + (k * M + m) * D + d) = Kr(i, m) * S(0, d);
          }
        }
      }
    }
    off += T * M * D;
  }
  return C;
}

MatrixXd nystrom(const DenseGpProblem &p, const PseudoInputs &z) {
  const auto U = cholesky(pseudo_cov(p.kernel, z));
  const MatrixXd V = U.solve_upper_transpose(
      pseudo_cross_cov(p.kernel, z, p.X, p.t).transpose());
  return V.transpose() * V;
}

double dense_saturated_bound(const DenseGpProblem &p, const PseudoInputs &z) {
  if (p.size() == 0) {
    return 0.0;
  }
  MatrixXd Q = nystrom(p, z);
  const VectorXd residual =
      full_gram(p.kernel, p.X, p.t).diagonal() - Q.diagonal();
  Q.diagonal() += p.noise;
  return gaussian_log_density(p.y, VectorXd::Zero(p.size()), Q) -
         0.5 * residual.cwiseQuotient(p.noise).sum();
}

double dense_fitc_lml(const DenseGpProblem &p, const PseudoInputs &z,
                      double alpha) {
  if (p.size() == 0) {
    return 0.0;
  }
  MatrixXd Q = nystrom(p, z);
  const VectorXd residual =
      full_gram(p.kernel, p.X, p.t).diagonal() - Q.diagonal();
  Q.diagonal() += p.noise + alpha * residual;
  return gaussian_log_density(p.y, VectorXd::Zero(p.size()), Q);
}

MarginalPredictions dense_predictive(const DenseGpProblem &p,
                                     const PseudoInputs &z,
                                     const Points &query_x,
                                     const VectorXd &query_t) {
  const auto U = cholesky(pseudo_cov(p.kernel, z));
  const auto n = U.dim();
  // Whitened pseudo-points v = U^{-T} u ~ N(0, I).
  const MatrixXd V = U.solve_upper_transpose(
      pseudo_cross_cov(p.kernel, z, p.X, p.t).transpose());
  const MatrixXd Vs =
      V * p.noise.cwiseInverse().asDiagonal();
  MatrixXd precision = MatrixXd::Identity(n, n) + Vs * V.transpose();
  const auto P = cholesky(precision);
  const VectorXd mean_v = P.solve(Vs * p.y);

  const MatrixXd Vq = U.solve_upper_transpose(
      pseudo_cross_cov(p.kernel, z, query_x, query_t).transpose());
  const VectorXd prior = full_gram(p.kernel, query_x, query_t).diagonal();
  const MatrixXd W = P.solve_upper_transpose(Vq);

  MarginalPredictions out;
  out.mean = Vq.transpose() * mean_v;
  out.variance = prior - Vq.colwise().squaredNorm().transpose() +
                 W.colwise().squaredNorm().transpose();
  return out;
}

MarginalPredictions exact_predictive(const DenseGpProblem &p,
                                     const Points &query_x,
                                     const VectorXd &query_t) {
  MatrixXd K = full_gram(p.kernel, p.X, p.t);
  K.diagonal() += p.noise;
  const auto U = cholesky(K);
  const MatrixXd Kqf = full_cross_gram(p.kernel, query_x, query_t, p.X, p.t);
  const MatrixXd W = U.solve_upper_transpose(Kqf.transpose());
  MarginalPredictions out;
  out.mean = Kqf * U.solve(p.y);
  out.variance = full_gram(p.kernel, query_x, query_t).diagonal() -
                 W.colwise().squaredNorm().transpose();
  return out;
}

namespace {

struct Conditioned {
  VectorXd mean;
  MatrixXd cov;
  double lml = 0.0;
};

// x jointly Gaussian with y; condition x on the observed y.
Conditioned condition(const VectorXd &mx, const MatrixXd &Cxx,
                      const VectorXd &my, const MatrixXd &Cyy,
                      const MatrixXd &Cxy, const VectorXd &y) {
  Conditioned out;
  if (y.size() == 0) {
    out.mean = mx;
    out.cov = Cxx;
    return out;
  }
  Eigen::LLT<MatrixXd> llt(Cyy);
  if (llt.info() != Eigen::Success) {
    throw CholeskyFailure("oracle: observation covariance not positive "
                          "definite");
  }
  const VectorXd r = y - my;
  out.mean = mx + Cxy * llt.solve(r);
  out.cov = Cxx - Cxy * llt.solve(Cxy.transpose());
  symmetrize(out.cov);
  const MatrixXd L = llt.matrixL();
  const double log_det = 2.0 * L.diagonal().array().log().sum();
  out.lml = -0.5 * (static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi) +
                    log_det + r.dot(llt.solve(r)));
  return out;
}

} // namespace

InferenceResult joint_conditioning(const Gaussian &prior,
                                   const LinearGaussianConditional &obs,
                                   const VectorXd &y) {
  const auto dx = prior.dim();
  const auto dy = y.size();
  // Joint over (x, y).
  VectorXd m(dx + dy);
  MatrixXd C(dx + dy, dx + dy);
  m.head(dx) = prior.mean;
  m.tail(dy) = obs.A * prior.mean + obs.a;
  C.topLeftCorner(dx, dx) = prior.cov;
  C.topRightCorner(dx, dy) = prior.cov * obs.A.transpose();
  C.bottomLeftCorner(dy, dx) = obs.A * prior.cov;
  C.bottomRightCorner(dy, dy) = obs.A * prior.cov * obs.A.transpose() + obs.Q;

  const auto c = condition(m.head(dx), C.topLeftCorner(dx, dx), m.tail(dy),
                           C.bottomRightCorner(dy, dy),
                           C.topRightCorner(dx, dy), y);
  return {{c.mean, c.cov}, c.lml};
}

DenseLgssmJoint dense_lgssm_joint(const Lgssm &model) {
  model.validate();
  const auto T = model.size();
  DenseLgssmJoint j;
  j.state_offset.assign(T + 1, 0);
  j.obs_offset.assign(T + 1, 0);
  for (std::size_t t = 0; t < T; ++t) {
    j.state_offset[t + 1] =
        j.state_offset[t] + model.steps[t].transition.A.rows();
    j.obs_offset[t + 1] = j.obs_offset[t] + model.steps[t].y.size();
  }
  const auto nx = j.state_offset[T];
  const auto ny = j.obs_offset[T];
  j.states.mean = VectorXd::Zero(nx);
  j.states.cov = MatrixXd::Zero(nx, nx);

  VectorXd prev_mean = model.x0.mean;
  MatrixXd prev_cov = model.x0.cov;
  for (std::size_t t = 0; t < T; ++t) {
    const auto &tr = model.steps[t].transition;
    const auto o = j.state_offset[t];
    const auto d = tr.A.rows();
    j.states.mean.segment(o, d) = tr.A * prev_mean + tr.a;
    j.states.cov.block(o, o, d, d) = tr.A * prev_cov * tr.A.transpose() + tr.Q;
    // Cov(x_t, x_s) = A_t Cov(x_{t-1}, x_s) for s < t.
    for (std::size_t s = 0; s < t; ++s) {
      const auto os = j.state_offset[s];
      const auto ds = j.state_offset[s + 1] - os;
      const auto op = j.state_offset[t - 1];
      const auto dp = o - op;
      j.states.cov.block(o, os, d, ds) =
          tr.A * j.states.cov.block(op, os, dp, ds);
      j.states.cov.block(os, o, ds, d) =
          j.states.cov.block(o, os, d, ds).transpose();
    }
    prev_mean = j.states.mean.segment(o, d);
    prev_cov = j.states.cov.block(o, o, d, d);
  }

  // Block-diagonal emission map.
  MatrixXd E = MatrixXd::Zero(ny, nx);
  VectorXd e = VectorXd::Zero(ny);
  MatrixXd R = MatrixXd::Zero(ny, ny);
  for (std::size_t t = 0; t < T; ++t) {
    const auto c = model.steps[t].emission.composed();
    const auto oy = j.obs_offset[t];
    const auto dy = c.A.rows();
    E.block(oy, j.state_offset[t], dy, c.A.cols()) = c.A;
    e.segment(oy, dy) = c.a;
    R.block(oy, oy, dy, dy) = c.Q;
  }
  j.observations.mean = E * j.states.mean + e;
  j.observations.cov = E * j.states.cov * E.transpose() + R;
  j.cross = j.states.cov * E.transpose();
  return j;
}

namespace {

VectorXd stacked_observations(const Lgssm &model, Eigen::Index ny) {
  VectorXd y(ny);
  Eigen::Index o = 0;
  for (const auto &s : model.steps) {
    y.segment(o, s.y.size()) = s.y;
    o += s.y.size();
  }
  return y;
}

} // namespace

double dense_lgssm_lml(const Lgssm &model) {
  const auto j = dense_lgssm_joint(model);
  const auto y = stacked_observations(model, j.observations.dim());
  return condition(j.states.mean, j.states.cov, j.observations.mean,
                   j.observations.cov, j.cross, y)
      .lml;
}

std::vector<Gaussian> dense_lgssm_posterior(const Lgssm &model) {
  const auto j = dense_lgssm_joint(model);
  const auto y = stacked_observations(model, j.observations.dim());
  const auto c = condition(j.states.mean, j.states.cov, j.observations.mean,
                           j.observations.cov, j.cross, y);
  std::vector<Gaussian> out;
  for (std::size_t t = 0; t < model.size(); ++t) {
    const auto o = j.state_offset[t];
    const auto d = j.state_offset[t + 1] - o;
    out.push_back({c.mean.segment(o, d), c.cov.block(o, o, d, d)});
  }
  return out;
}

} // namespace stgp::oracle
