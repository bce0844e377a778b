#include "stgp/cli/kmeans.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "stgp/cli/config.hpp"

namespace stgp::cli {

Points kmeans(const Points &X, int k, std::uint64_t seed, int iterations) {
  const auto n = X.rows();
  if (k < 1) {
    throw ConfigError("k-means needs at least one center");
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  Points centers(k, X.cols());
  Eigen::Index chosen = 0;
  for (auto i : order) {
    if (chosen == k) {
      break;
    }
    bool fresh = true;
    for (Eigen::Index c = 0; c < chosen && fresh; ++c) {
      fresh = centers.row(c) != X.row(i);
    }
    if (fresh) {
      centers.row(chosen++) = X.row(i);
    }
  }
  if (chosen < k) {
    throw ConfigError("pseudo.count=" + std::to_string(k) + " exceeds the " +
                      std::to_string(chosen) + " distinct spatial locations");
  }

  std::vector<Eigen::Index> assign(static_cast<std::size_t>(n), -1);
  for (int iter = 0; iter < iterations; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      double best_d = (centers.row(0) - X.row(i)).squaredNorm();
      for (Eigen::Index c = 1; c < k; ++c) {
        const double d = (centers.row(c) - X.row(i)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assign[static_cast<std::size_t>(i)] != best) {
        assign[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    if (!changed) {
      break;
    }
    Points sums = Points::Zero(k, X.cols());
    VectorXd counts = VectorXd::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto c = assign[static_cast<std::size_t>(i)];
      sums.row(c) += X.row(i);
      counts(c) += 1.0;
    }
    for (Eigen::Index c = 0; c < k; ++c) {
      if (counts(c) > 0.0) {
        centers.row(c) = sums.row(c) / counts(c);
      }
    }
  }
  return centers;
}

Points regular_points(int k, double lo, double hi) {
  Points z(k, 1);
  for (int m = 0; m < k; ++m) {
    z(m, 0) = k == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * m / (k - 1);
  }
  return z;
}

} // namespace stgp::cli
