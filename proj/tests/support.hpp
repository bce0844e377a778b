#pragma once

// Random instance generators shared by the unit and acceptance tests.

#include <random>
#include <vector>

#include "stgp/kernels.hpp"
#include "stgp/lgssm.hpp"
#include "stgp/pseudo_point.hpp"

namespace stgp::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng &rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng &rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline VectorXd normal_vector(Rng &rng, Eigen::Index n) {
  std::normal_distribution<double> normal;
  VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v(i) = normal(rng);
  }
  return v;
}

inline MatrixXd normal_matrix(Rng &rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal;
  MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      m(i, j) = normal(rng);
    }
  }
  return m;
}

/// SPD with eigenvalues bounded below by `floor`.
inline MatrixXd random_spd(Rng &rng, Eigen::Index n, double floor = 0.1) {
  const MatrixXd G = normal_matrix(rng, n, n);
  MatrixXd S = G * G.transpose() / static_cast<double>(n);
  S.diagonal().array() += floor;
  return S;
}

inline Gaussian random_gaussian(Rng &rng, Eigen::Index n) {
  return {normal_vector(rng, n), random_spd(rng, n)};
}

inline LinearGaussianConditional random_emission(Rng &rng, Eigen::Index dy,
                                                 Eigen::Index dx) {
  VectorXd q(dy);
  for (Eigen::Index i = 0; i < dy; ++i) {
    q(i) = uniform(rng, 0.1, 1.0);
  }
  return LinearGaussianConditional::diagonal(normal_matrix(rng, dy, dx),
                                             normal_vector(rng, dy), q);
}

inline MaternOrder random_order(Rng &rng) {
  return static_cast<MaternOrder>(uniform_int(rng, 1, 3));
}

inline SeparableComponent random_component(Rng &rng, Eigen::Index dim,
                                           MaternOrder order) {
  VectorXd inv(dim);
  for (Eigen::Index d = 0; d < dim; ++d) {
    inv(d) = uniform(rng, 0.5, 1.5);
  }
  return {SpatialKernel{inv, uniform(rng, 0.5, 1.5)},
          TemporalSdeKernel(order, uniform(rng, 0.5, 2.0))};
}

inline SumSeparableKernel random_kernel(Rng &rng, std::size_t P,
                                        Eigen::Index dim) {
  SumSeparableKernel k;
  for (std::size_t p = 0; p < P; ++p) {
    k.components.push_back(random_component(rng, dim, random_order(rng)));
  }
  return k;
}

/// Strictly increasing times with spacing in [0.2, 1].
inline VectorXd random_times(Rng &rng, Eigen::Index T) {
  VectorXd t(T);
  double now = uniform(rng, -1.0, 1.0);
  for (Eigen::Index i = 0; i < T; ++i) {
    now += uniform(rng, 0.2, 1.0);
    t(i) = now;
  }
  return t;
}

/// Points in [lo, hi]^dim at least `min_sep` apart.
inline Points separated_points(Rng &rng, Eigen::Index n, Eigen::Index dim,
                               double lo = 0.0, double hi = 3.0,
                               double min_sep = 0.3) {
  Points P(n, dim);
  Eigen::Index filled = 0;
  while (filled < n) {
    Eigen::RowVectorXd x(dim);
    for (Eigen::Index d = 0; d < dim; ++d) {
      x(d) = uniform(rng, lo, hi);
    }
    bool ok = true;
    for (Eigen::Index i = 0; i < filled && ok; ++i) {
      ok = (P.row(i) - x).norm() >= min_sep;
    }
    if (ok) {
      P.row(filled++) = x;
    }
  }
  return P;
}

inline Points random_points(Rng &rng, Eigen::Index n, Eigen::Index dim,
                            double lo = 0.0, double hi = 3.0) {
  Points P(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index d = 0; d < dim; ++d) {
      P(i, d) = uniform(rng, lo, hi);
    }
  }
  return P;
}

/// Buckets at the given times with between min_n and max_n random points.
inline TimeGroupedData random_data(Rng &rng, const VectorXd &times,
                                   Eigen::Index dim, int min_n, int max_n) {
  TimeGroupedData data;
  for (Eigen::Index k = 0; k < times.size(); ++k) {
    TimeBucket b;
    b.time = times(k);
    const int n = uniform_int(rng, min_n, max_n);
    b.X = random_points(rng, n, dim);
    b.y = normal_vector(rng, n);
    b.noise.resize(n);
    for (int i = 0; i < n; ++i) {
      b.noise(i) = uniform(rng, 0.05, 0.5);
    }
    data.buckets.push_back(std::move(b));
  }
  return data;
}

/// A complete pseudo-point instance with every kind of structure varied.
struct PseudoInstance {
  SumSeparableKernel kernel;
  PseudoInputs z;
  TimeGroupedData data;
};

inline PseudoInstance random_pseudo_instance(Rng &rng, int max_T = 6,
                                             int max_n = 5, int max_m = 4,
                                             std::size_t max_p = 2) {
  PseudoInstance inst;
  const Eigen::Index dim = uniform_int(rng, 1, 2);
  inst.kernel = random_kernel(
      rng, static_cast<std::size_t>(uniform_int(rng, 1, static_cast<int>(max_p))),
      dim);
  const VectorXd times = random_times(rng, uniform_int(rng, 1, max_T));
  inst.data = random_data(rng, times, dim, 0, max_n);
  inst.z = PseudoInputs::shared(
      separated_points(rng, uniform_int(rng, 1, max_m), dim), times);
  return inst;
}

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

inline double max_relative_error(const MatrixXd &a, const MatrixXd &b) {
  if (a.size() == 0) {
    return 0.0;
  }
  return (a - b).cwiseAbs().maxCoeff() /
         std::max(1.0, std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()));
}

} // namespace stgp::testing
