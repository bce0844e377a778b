#include "stgp/pseudo_point.hpp"

#include <omp.h>

#include <algorithm>
#include <optional>
#include <set>
#include <string>

#include "stgp/parallel.hpp"

namespace stgp {

std::string QueryTimeNotOnGrid::describe(const std::vector<double> &times) {
  std::string msg = "query times not among the pseudo-point times:";
  for (double t : times) {
    msg += " " + std::to_string(t);
  }
  return msg;
}

PseudoInputs PseudoInputs::shared(Points z, VectorXd times) {
  PseudoInputs p;
  p.spatial.push_back(std::move(z));
  p.times = std::move(times);
  return p;
}

const Points &PseudoInputs::for_component(std::size_t p) const {
  return spatial.size() == 1 ? spatial.front() : spatial.at(p);
}

void PseudoInputs::validate(const SumSeparableKernel &kernel) const {
  if (spatial.empty() ||
      (spatial.size() != 1 && spatial.size() != kernel.size())) {
    throw InvalidParameter("need one shared set of spatial pseudo-inputs or "
                           "one per kernel component");
  }
  for (const auto &z : spatial) {
    if (z.rows() == 0) {
      throw InvalidParameter("at least one spatial pseudo-input is required");
    }
    if (z.cols() != kernel.input_dim()) {
      throw DimensionMismatch("pseudo-inputs have the wrong spatial "
                              "dimension");
    }
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      for (Eigen::Index j = i + 1; j < z.rows(); ++j) {
        if (z.row(i) == z.row(j)) {
          throw SingularPseudoGram("spatial pseudo-inputs " +
                                   std::to_string(i) + " and " +
                                   std::to_string(j) + " coincide");
        }
      }
    }
  }
  for (Eigen::Index t = 1; t < times.size(); ++t) {
    if (!(times(t) > times(t - 1))) {
      throw NonIncreasingTimes("pseudo-point times must be strictly "
                               "increasing");
    }
  }
}

Eigen::Index TimeGroupedData::total() const {
  Eigen::Index n = 0;
  for (const auto &b : buckets) {
    n += b.size();
  }
  return n;
}

VectorXd TimeGroupedData::times() const {
  VectorXd t(static_cast<Eigen::Index>(buckets.size()));
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    t(static_cast<Eigen::Index>(i)) = buckets[i].time;
  }
  return t;
}

void TimeGroupedData::validate() const {
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    const auto &b = buckets[i];
    if (i > 0 && !(b.time > buckets[i - 1].time)) {
      throw NonIncreasingTimes("time buckets must be strictly increasing");
    }
    if (b.X.rows() != b.y.size() || b.noise.size() != b.y.size()) {
      throw DimensionMismatch("bucket at time " + std::to_string(b.time) +
                              " has inconsistent sizes");
    }
    if (!(b.noise.array() > 0.0).all()) {
      throw InvalidParameter("noise variances must be positive");
    }
  }
}

void ApproximationFamily::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw AlphaOutOfRange("alpha must lie in [0, 1], got " +
                          std::to_string(alpha));
  }
}

VectorXd pseudo_times_from(const TimeGroupedData &data) {
  std::set<double> times;
  for (const auto &b : data.buckets) {
    times.insert(b.time);
  }
  VectorXd t(static_cast<Eigen::Index>(times.size()));
  Eigen::Index i = 0;
  for (double v : times) {
    t(i++) = v;
  }
  return t;
}

MatrixXd expand_projection(const MatrixXd &weights, int state_dim) {
  MatrixXd B = MatrixXd::Zero(weights.rows(), weights.cols() * state_dim);
  for (Eigen::Index m = 0; m < weights.cols(); ++m) {
    B.col(m * state_dim) = weights.col(m);
  }
  return B;
}

namespace {

struct PseudoGram {
  Points z;
  MatrixXd cov;
  CholeskyFactor chol;
};

std::vector<PseudoGram> pseudo_grams(const SumSeparableKernel &kernel,
                                     const PseudoInputs &z) {
  std::vector<PseudoGram> grams;
  grams.reserve(kernel.size());
  for (std::size_t p = 0; p < kernel.size(); ++p) {
    const auto &k = kernel[p].spatial;
    PseudoGram g;
    g.z = z.for_component(p);
    g.cov = spatial_gram(k, g.z, g.z);
    g.cov.diagonal().array() += kPseudoJitter * k.amplitude;
    try {
      g.chol = cholesky(g.cov);
    } catch (const CholeskyFailure &) {
      throw SingularPseudoGram("pseudo-input gram of component " +
                               std::to_string(p) +
                               " is singular after jitter");
    }
    grams.push_back(std::move(g));
  }
  return grams;
}

BucketProjection project_bucket(const SumSeparableKernel &kernel,
                                const std::vector<PseudoGram> &grams,
                                const TimeBucket &bucket, Eigen::Index step) {
  BucketProjection out;
  out.step = step;
  const auto n = bucket.size();
  out.residual = VectorXd::Zero(n);
  out.weights.reserve(kernel.size());
  for (std::size_t p = 0; p < kernel.size(); ++p) {
    const auto &g = grams[p];
    if (n == 0) {
      out.weights.emplace_back(0, g.z.rows());
      continue;
    }
    const MatrixXd Kfu = spatial_gram(kernel[p].spatial, bucket.X, g.z);
    MatrixXd W = g.chol.solve(Kfu.transpose()).transpose();
    out.residual.array() +=
        kernel[p].spatial.amplitude - W.cwiseProduct(Kfu).rowwise().sum().array();
    out.weights.push_back(std::move(W));
  }
  out.residual = out.residual.cwiseMax(0.0);
  return out;
}

std::vector<BucketProjection>
project_serial(const SumSeparableKernel &kernel,
               const std::vector<PseudoGram> &grams,
               const TimeGroupedData &data,
               const std::vector<Eigen::Index> &steps) {
  std::vector<BucketProjection> out(data.buckets.size());
  for (std::size_t b = 0; b < data.buckets.size(); ++b) {
    out[b] = project_bucket(kernel, grams, data.buckets[b], steps[b]);
  }
  return out;
}

std::vector<BucketProjection>
project_parallel(const SumSeparableKernel &kernel,
                 const std::vector<PseudoGram> &grams,
                 const TimeGroupedData &data,
                 const std::vector<Eigen::Index> &steps) {
  const auto n = static_cast<long>(data.buckets.size());
  std::vector<BucketProjection> out(data.buckets.size());
  std::optional<Error> failure;
#pragma omp parallel for schedule(static) num_threads(thread_limit())
  for (long b = 0; b < n; ++b) {
    try {
      out[static_cast<std::size_t>(b)] =
          project_bucket(kernel, grams, data.buckets[static_cast<std::size_t>(b)],
                         steps[static_cast<std::size_t>(b)]);
    } catch (const Error &e) {
#pragma omp critical(stgp_projection_failure)
      if (!failure) {
        failure = e;
      }
    }
  }
  if (failure) {
    throw *failure;
  }
  return out;
}

void check_inputs(const SumSeparableKernel &kernel, const PseudoInputs &z,
                  const TimeGroupedData &data) {
  kernel.validate();
  z.validate(kernel);
  data.validate();
  for (const auto &b : data.buckets) {
    if (b.size() > 0 && b.X.cols() != kernel.input_dim()) {
      throw DimensionMismatch("observation locations have the wrong spatial "
                              "dimension");
    }
  }
}

struct ApproximateModel {
  Lgssm lgssm;
  std::vector<BucketProjection> projections;
  std::vector<PseudoGram> grams;
  MatrixXd selector;
};

ApproximateModel build_approximate(const SumSeparableKernel &kernel,
                                   const PseudoInputs &z,
                                   const TimeGroupedData &data,
                                   ApproximationFamily family) {
  check_inputs(kernel, z, data);
  family.validate();
  const auto steps = detail::align_buckets(z.times, data);

  ApproximateModel out;
  out.grams = pseudo_grams(kernel, z);
  out.projections = project_parallel(kernel, out.grams, data, steps);

  const std::size_t P = kernel.size();
  std::vector<Eigen::Index> offset(P + 1, 0);
  std::vector<Eigen::Index> u_offset(P + 1, 0);
  for (std::size_t p = 0; p < P; ++p) {
    const auto M = out.grams[p].z.rows();
    offset[p + 1] = offset[p] + M * kernel[p].temporal.state_dim();
    u_offset[p + 1] = u_offset[p] + M;
  }
  const auto dim = offset[P];
  const auto n_u = u_offset[P];

  out.selector = MatrixXd::Zero(n_u, dim);
  for (std::size_t p = 0; p < P; ++p) {
    const int D = kernel[p].temporal.state_dim();
    for (Eigen::Index m = 0; m < out.grams[p].z.rows(); ++m) {
      out.selector(u_offset[p] + m, offset[p] + m * D) = 1.0;
    }
  }

  auto &model = out.lgssm;
  model.x0.mean = VectorXd::Zero(dim);
  model.x0.cov = MatrixXd::Zero(dim, dim);
  for (std::size_t p = 0; p < P; ++p) {
    const auto w = offset[p + 1] - offset[p];
    model.x0.cov.block(offset[p], offset[p], w, w) =
        kron(out.grams[p].cov, kernel[p].temporal.stationary_cov());
  }

  std::vector<std::optional<std::size_t>> bucket_at(
      static_cast<std::size_t>(z.num_times()));
  for (std::size_t b = 0; b < steps.size(); ++b) {
    bucket_at[static_cast<std::size_t>(steps[b])] = b;
  }

  const Bottleneck bottleneck{out.selector, VectorXd::Zero(n_u)};
  model.steps.reserve(bucket_at.size());
  for (Eigen::Index k = 0; k < z.num_times(); ++k) {
    TimeStep step;
    if (k == 0) {
      step.transition = LinearGaussianConditional::identity(dim);
    } else {
      const double dt = z.times(k) - z.times(k - 1);
      step.transition.A = MatrixXd::Zero(dim, dim);
      step.transition.a = VectorXd::Zero(dim);
      step.transition.Q = MatrixXd::Zero(dim, dim);
      for (std::size_t p = 0; p < P; ++p) {
        const auto d = sde_discretize(kernel[p].temporal, dt);
        const auto M = out.grams[p].z.rows();
        const auto w = offset[p + 1] - offset[p];
        step.transition.A.block(offset[p], offset[p], w, w) =
            kron(MatrixXd::Identity(M, M), d.A);
        step.transition.Q.block(offset[p], offset[p], w, w) =
            kron(out.grams[p].cov, d.Q);
      }
    }

    const auto &slot = bucket_at[static_cast<std::size_t>(k)];
    if (slot) {
      const auto &bucket = data.buckets[*slot];
      const auto &proj = out.projections[*slot];
      const auto n = bucket.size();
      MatrixXd W(n, n_u);
      for (std::size_t p = 0; p < P; ++p) {
        W.middleCols(u_offset[p], u_offset[p + 1] - u_offset[p]) =
            proj.weights[p];
      }
      const VectorXd noise = bucket.noise + family.alpha * proj.residual;
      step.emission.model =
          LinearGaussianConditional::diagonal(std::move(W), VectorXd::Zero(n),
                                              noise);
      step.y = bucket.y;
    } else {
      step.emission.model = LinearGaussianConditional::diagonal(
          MatrixXd(0, n_u), VectorXd(0), VectorXd(0));
      step.y = VectorXd(0);
    }
    step.emission.bottleneck = bottleneck;
    model.steps.push_back(std::move(step));
  }
  return out;
}

} // namespace

namespace detail {

std::vector<Eigen::Index> align_buckets(const VectorXd &pseudo_times,
                                        const TimeGroupedData &data) {
  std::vector<Eigen::Index> steps;
  steps.reserve(data.buckets.size());
  const double *begin = pseudo_times.data();
  const double *end = begin + pseudo_times.size();
  for (const auto &b : data.buckets) {
    const double *it = std::lower_bound(begin, end, b.time);
    if (it == end || *it != b.time) {
      throw TimeAlignmentError("observation time " + std::to_string(b.time) +
                               " matches no pseudo-point time");
    }
    steps.push_back(it - begin);
  }
  return steps;
}

std::vector<BucketProjection>
projection_matrices_serial(const SumSeparableKernel &kernel,
                           const PseudoInputs &z, const TimeGroupedData &data) {
  check_inputs(kernel, z, data);
  return project_serial(kernel, pseudo_grams(kernel, z), data,
                        align_buckets(z.times, data));
}

std::vector<BucketProjection>
projection_matrices_parallel(const SumSeparableKernel &kernel,
                             const PseudoInputs &z,
                             const TimeGroupedData &data) {
  check_inputs(kernel, z, data);
  return project_parallel(kernel, pseudo_grams(kernel, z), data,
                          align_buckets(z.times, data));
}

} // namespace detail

std::vector<BucketProjection>
projection_matrices(const SumSeparableKernel &kernel, const PseudoInputs &z,
                    const TimeGroupedData &data) {
  return detail::projection_matrices_parallel(kernel, z, data);
}

std::vector<VectorXd> modified_noise(const SumSeparableKernel &kernel,
                                     const PseudoInputs &z,
                                     const TimeGroupedData &data,
                                     ApproximationFamily family) {
  family.validate();
  const auto proj = projection_matrices(kernel, z, data);
  std::vector<VectorXd> out;
  out.reserve(proj.size());
  for (std::size_t b = 0; b < proj.size(); ++b) {
    out.push_back(data.buckets[b].noise + family.alpha * proj[b].residual);
  }
  return out;
}

Lgssm approximate_lgssm(const SumSeparableKernel &kernel,
                        const PseudoInputs &z, const TimeGroupedData &data,
                        ApproximationFamily family) {
  return build_approximate(kernel, z, data, family).lgssm;
}

double elbo(const SumSeparableKernel &kernel, const PseudoInputs &z,
            const TimeGroupedData &data) {
  const auto approx = build_approximate(kernel, z, data, {});
  double trace = 0.0;
  for (std::size_t b = 0; b < data.buckets.size(); ++b) {
    trace += approx.projections[b]
                 .residual.cwiseQuotient(data.buckets[b].noise)
                 .sum();
  }
  return log_marginal_likelihood(approx.lgssm) - 0.5 * trace;
}

double approximate_lml(const SumSeparableKernel &kernel, const PseudoInputs &z,
                       const TimeGroupedData &data,
                       ApproximationFamily family) {
  return log_marginal_likelihood(approximate_lgssm(kernel, z, data, family));
}

MarginalPredictions predict(const SumSeparableKernel &kernel,
                            const PseudoInputs &z, const TimeGroupedData &data,
                            const Points &query_x, const VectorXd &query_t,
                            ApproximationFamily family) {
  if (query_x.rows() != query_t.size()) {
    throw DimensionMismatch("each query point needs one time stamp");
  }
  const auto nq = query_t.size();
  if (nq > 0 && query_x.cols() != kernel.input_dim()) {
    throw DimensionMismatch("query points have the wrong spatial dimension");
  }

  std::vector<Eigen::Index> query_step(static_cast<std::size_t>(nq));
  std::set<double> off_grid;
  const double *begin = z.times.data();
  const double *end = begin + z.times.size();
  for (Eigen::Index i = 0; i < nq; ++i) {
    const double *it = std::lower_bound(begin, end, query_t(i));
    if (it == end || *it != query_t(i)) {
      off_grid.insert(query_t(i));
    } else {
      query_step[static_cast<std::size_t>(i)] = it - begin;
    }
  }
  if (!off_grid.empty()) {
    throw QueryTimeNotOnGrid({off_grid.begin(), off_grid.end()});
  }

  const auto approx = build_approximate(kernel, z, data, family);
  const auto smoothed = smooth(approx.lgssm);
  const auto &H = approx.selector;

  std::vector<std::optional<Gaussian>> u_marginal(smoothed.states.size());
  MarginalPredictions out;
  out.mean.resize(nq);
  out.variance.resize(nq);
  for (Eigen::Index i = 0; i < nq; ++i) {
    const auto k = static_cast<std::size_t>(query_step[static_cast<std::size_t>(i)]);
    if (!u_marginal[k]) {
      Gaussian g;
      g.mean = H * smoothed.states[k].mean;
      g.cov = H * smoothed.states[k].cov * H.transpose();
      u_marginal[k] = std::move(g);
    }
    const auto &u = *u_marginal[k];

    Eigen::RowVectorXd w(H.rows());
    double prior_residual = 0.0;
    Eigen::Index col = 0;
    const Points x = query_x.row(i);
    for (std::size_t p = 0; p < kernel.size(); ++p) {
      const auto &g = approx.grams[p];
      const MatrixXd kxu = spatial_gram(kernel[p].spatial, x, g.z);
      const MatrixXd wp = g.chol.solve(kxu.transpose()).transpose();
      prior_residual += kernel[p].spatial.amplitude - (wp * kxu.transpose())(0, 0);
      w.segment(col, wp.cols()) = wp.row(0);
      col += wp.cols();
    }
    out.mean(i) = w * u.mean;
    out.variance(i) = prior_residual + (w * u.cov * w.transpose())(0, 0);
  }
  return out;
}

MatrixXd latent_cross_cov(const SumSeparableKernel &kernel, const Points &X,
                          const std::vector<LatentIndex> &Y, const Points &Xp,
                          const std::vector<LatentIndex> &Yp) {
  if (X.rows() != static_cast<Eigen::Index>(Y.size()) ||
      Xp.rows() != static_cast<Eigen::Index>(Yp.size())) {
    throw DimensionMismatch("each spatial point needs one (time, dim) index");
  }
  MatrixXd K = MatrixXd::Zero(X.rows(), Xp.rows());
  for (const auto &c : kernel.components) {
    const int D = c.temporal.state_dim();
    const MatrixXd Kr = spatial_gram(c.spatial, X, Xp);
    for (Eigen::Index j = 0; j < Xp.rows(); ++j) {
      const auto &b = Yp[static_cast<std::size_t>(j)];
      if (b.dim >= D) {
        continue;
      }
      for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const auto &a = Y[static_cast<std::size_t>(i)];
        if (a.dim >= D) {
          continue;
        }
        K(i, j) += Kr(i, j) * c.temporal.state_cross_cov(a.time, b.time)(a.dim, b.dim);
      }
    }
  }
  return K;
}

double conditional_independence_residual(const SumSeparableKernel &kernel,
                                         const ConditionalIndependenceSets &sets) {
  auto product = [](const Points &X, const std::vector<LatentIndex> &Y) {
    Points P(X.rows() * static_cast<Eigen::Index>(Y.size()), X.cols());
    std::vector<LatentIndex> L;
    L.reserve(static_cast<std::size_t>(P.rows()));
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      for (const auto &y : Y) {
        P.row(r++) = X.row(i);
        L.push_back(y);
      }
    }
    return std::pair{P, L};
  };
  const auto [xa, ya] = product(sets.x1, sets.y1);
  const auto [xb, yb] = product(sets.x2, sets.y2);
  const auto [xc, yc] = product(sets.x2, sets.y1);
  if (xa.rows() == 0 || xb.rows() == 0) {
    return 0.0;
  }
  const MatrixXd Kab = latent_cross_cov(kernel, xa, ya, xb, yb);
  if (xc.rows() == 0) {
    return Kab.cwiseAbs().maxCoeff();
  }
  const MatrixXd Kac = latent_cross_cov(kernel, xa, ya, xc, yc);
  const MatrixXd Kcc = latent_cross_cov(kernel, xc, yc, xc, yc);
  const MatrixXd Kcb = latent_cross_cov(kernel, xc, yc, xb, yb);
  Eigen::LLT<MatrixXd> llt(Kcc);
  if (llt.info() != Eigen::Success) {
    throw SingularConditioningSet("conditioning covariance is singular");
  }
  return (Kab - Kac * llt.solve(Kcb)).cwiseAbs().maxCoeff();
}

} // namespace stgp
