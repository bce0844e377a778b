#pragma once

// key=value run configuration. The params file written by `fit` uses the
// same format, so it can be passed back as a config for a warm restart.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stgp/errors.hpp"
#include "stgp/kernels.hpp"
#include "stgp/training.hpp"

namespace stgp::cli {

class ConfigError : public Error {
public:
  using Error::Error;
};

using KeyValues = std::map<std::string, std::string>;

/// Blank lines and lines starting with '#' are skipped; keys may not repeat.
KeyValues parse_key_values(std::istream &in);
KeyValues load_key_values(const std::string &path);

struct Standardization {
  double mean = 0.0;
  double scale = 1.0;
};

struct ComponentConfig {
  MaternOrder temporal = MaternOrder::ThreeHalves;
  std::optional<double> temporal_lengthscale;
  /// One value (shared by every dimension) or one per dimension.
  std::vector<double> inverse_lengthscale;
  std::optional<double> amplitude;
};

struct RunConfig {
  std::vector<ComponentConfig> components{ComponentConfig{}};
  double noise_variance = kDefaultNoiseVariance;
  bool learn_noise = true;
  int pseudo_count = 20;
  std::string pseudo_path;
  std::optional<Points> pseudo_points;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  int threads = 0;
  FitConfig optimizer;
  std::optional<Standardization> standardization;

  std::vector<MaternOrder> orders() const;
  /// Initial kernel; unset values fall back to the default initialization.
  SumSeparableKernel kernel(Eigen::Index input_dim) const;
};

RunConfig parse_config(const KeyValues &kv);
RunConfig load_config(const std::string &path);

struct FittedModel {
  SumSeparableKernel kernel;
  double noise_variance = kDefaultNoiseVariance;
  bool learn_noise = true;
  Points pseudo_points;
  Standardization standardization;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  std::string status;
  double objective = 0.0;
};

void write_params(std::ostream &out, const FittedModel &model);

/// Shortest text that parses back to the same double.
std::string format_double(double v);

} // namespace stgp::cli
