#include "stgp/cli/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "stgp/cli/config.hpp"
#include "stgp/cli/dataset.hpp"
#include "stgp/cli/kmeans.hpp"
#include "stgp/state_space_gp.hpp"

namespace stgp::cli {

Scenario parse_scenario(std::string_view name) {
  if (name == "irregular") {
    return Scenario::Irregular;
  }
  if (name == "grid-missing") {
    return Scenario::GridMissing;
  }
  throw ConfigError("unknown scenario '" + std::string(name) +
                    "' (expected irregular or grid-missing)");
}

SumSeparableKernel benchmark_kernel() {
  SumSeparableKernel k;
  k.components.push_back({SpatialKernel{VectorXd::Constant(1, 1.0 / 0.9), 0.92},
                          TemporalSdeKernel(MaternOrder::ThreeHalves, 1.2)});
  return k;
}

namespace {

struct TimeStamp {
  std::string text;
  double value;
};

std::vector<TimeStamp> time_stamps(int T, double dt) {
  std::vector<TimeStamp> out;
  for (int k = 0; k < T; ++k) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", k * dt);
    out.push_back({buf, std::stod(buf)});
  }
  return out;
}

void write_row(std::ostream &out, const std::string &time, double x, double y,
               double noise) {
  out << time << ',' << format_double(x) << ',' << format_double(y) << ','
      << format_double(noise) << '\n';
}

} // namespace

void write_synth(std::ostream &out, const SynthOptions &opts) {
  if (opts.T < 1) {
    throw ConfigError("T must be at least 1");
  }
  if (!(opts.dt > 0.0) || !(opts.noise_variance > 0.0)) {
    throw ConfigError("dt and the noise variance must be positive");
  }
  const auto kernel = benchmark_kernel();
  const auto stamps = time_stamps(opts.T, opts.dt);
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  const double noise_sd = std::sqrt(opts.noise_variance);
  out << dataset_header(1) << '\n';

  if (opts.scenario == Scenario::Irregular) {
    if (opts.N_t < 1) {
      throw ConfigError("N_t must be at least 1");
    }
    const long n = static_cast<long>(opts.T) * opts.N_t;
    if (n > kMaxIrregularPoints) {
      throw ConfigError("irregular scenario is sampled exactly and is limited "
                        "to " + std::to_string(kMaxIrregularPoints) +
                        " points (T * N_t = " + std::to_string(n) + ")");
    }
    std::uniform_real_distribution<double> location(0.0, 10.0);
    Points X(n, 1);
    VectorXd t(n);
    for (long i = 0; i < n; ++i) {
      X(i, 0) = location(rng);
      t(i) = stamps[static_cast<std::size_t>(i / opts.N_t)].value;
    }
    VectorXd z(n);
    for (long i = 0; i < n; ++i) {
      z(i) = normal(rng);
    }
    const VectorXd f = psd_factor(full_gram(kernel, X, t)) * z;
    for (long i = 0; i < n; ++i) {
      const double y = f(i) + noise_sd * normal(rng);
      write_row(out, stamps[static_cast<std::size_t>(i / opts.N_t)].text,
                X(i, 0), y, opts.noise_variance);
    }
    return;
  }

  const Points locations = regular_points(kGridLocations, 0.0, 10.0);
  VectorXd times(opts.T);
  for (int k = 0; k < opts.T; ++k) {
    times(k) = stamps[static_cast<std::size_t>(k)].value;
  }
  GridObservations obs;
  obs.y.assign(static_cast<std::size_t>(opts.T), VectorXd::Zero(kGridLocations));
  obs.noise.assign(static_cast<std::size_t>(opts.T),
                   VectorXd::Constant(kGridLocations, opts.noise_variance));
  const auto model = StateSpaceGp(kernel).build_lgssm(
      RectilinearSpec::full(times, locations), obs);
  const auto draw = sample(model, rng());

  std::vector<int> index(kGridLocations);
  for (int k = 0; k < opts.T; ++k) {
    std::iota(index.begin(), index.end(), 0);
    std::shuffle(index.begin(), index.end(), rng);
    std::vector<bool> keep(kGridLocations, true);
    for (int j = 0; j < kGridDropped; ++j) {
      keep[static_cast<std::size_t>(index[static_cast<std::size_t>(j)])] = false;
    }
    const auto &y = draw.observations[static_cast<std::size_t>(k)];
    for (int i = 0; i < kGridLocations; ++i) {
      if (keep[static_cast<std::size_t>(i)]) {
        write_row(out, stamps[static_cast<std::size_t>(k)].text,
                  locations(i, 0), y(i), opts.noise_variance);
      }
    }
  }
}

} // namespace stgp::cli
