#pragma once

#include <cstdint>

#include "stgp/kernels.hpp"

namespace stgp::cli {

/// Lloyd's algorithm seeded with k distinct data points drawn uniformly.
/// Points go to the nearest center, ties to the lowest index; an emptied
/// cluster keeps its previous center.
Points kmeans(const Points &X, int k, std::uint64_t seed,
              int iterations = 100);

/// k evenly spaced 1-D points on [lo, hi], endpoints included.
Points regular_points(int k, double lo, double hi);

} // namespace stgp::cli
