#pragma once

// Synthetic benchmark datasets drawn from the prior plus observation noise.
//
// irregular: at each time, N_t locations uniform on [0, 10].
// grid-missing: 50 fixed locations on [0, 10], 5 dropped at random per time.

#include <cstdint>
#include <iosfwd>
#include <string_view>

#include "stgp/kernels.hpp"

namespace stgp::cli {

enum class Scenario { Irregular, GridMissing };

Scenario parse_scenario(std::string_view name);

/// Exponentiated quadratic with lengthscale 0.9 and amplitude 0.92 times a
/// Matérn-3/2 with lengthscale 1.2.
SumSeparableKernel benchmark_kernel();

inline constexpr int kGridLocations = 50;
inline constexpr int kGridDropped = 5;
/// Dense joint sampling is used for the irregular scenario; beyond this many
/// points it gets too slow.
inline constexpr long kMaxIrregularPoints = 6000;

struct SynthOptions {
  Scenario scenario = Scenario::Irregular;
  int T = 100;
  int N_t = 10;
  double dt = 0.1;
  double noise_variance = 0.1;
  std::uint64_t seed = 0;
};

/// Writes a dataset CSV. Deterministic given the options.
void write_synth(std::ostream &out, const SynthOptions &opts);

} // namespace stgp::cli
