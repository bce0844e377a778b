#pragma once

// Subcommands behind the `stgp` executable. Each returns a process exit
// code and reports failures on `err`.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stgp/cli/config.hpp"
#include "stgp/cli/dataset.hpp"
#include "stgp/cli/synth.hpp"

namespace stgp::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInference = 1,
  kExitData = 2,
  kExitQuery = 3,
};

struct SynthArgs {
  SynthOptions options;
  std::string out;
  /// When positive, also write this many regular pseudo-inputs on [0, 10].
  int pseudo_count = 0;
  std::string pseudo_out;
};

struct FitArgs {
  std::string config;
  std::string data;
  std::string out;
  std::string trace;
  std::optional<std::uint64_t> seed;
};

struct PredictArgs {
  std::string config;
  std::string params;
  std::string data;
  std::string query;
  std::string out;
};

struct ElboArgs {
  std::string config;
  std::string data;
  std::string out;
  std::optional<std::uint64_t> seed;
};

struct BenchArgs {
  std::string config;
  std::vector<int> T;
  /// structured, oracle or both.
  std::string method = "structured";
  int N_t = 10;
  int M_tau = 10;
  int repeats = 3;
  int threads = 1;
  std::string out;
  std::optional<std::uint64_t> seed;
};

int cmd_synth(const SynthArgs &args, std::ostream &err);
int cmd_fit(const FitArgs &args, std::ostream &err);
int cmd_predict(const PredictArgs &args, std::ostream &err);
int cmd_elbo(const ElboArgs &args, std::ostream &err);
int cmd_bench(const BenchArgs &args, std::ostream &err);

/// Data the inference commands share after ingestion.
struct PreparedProblem {
  RunConfig config;
  Dataset dataset;
  Standardization standardization;
  SumSeparableKernel kernel;
  PseudoInputs z;
  /// Standardized observations, with the configured noise applied when it
  /// is learned.
  TimeGroupedData data;
};

/// Loads the config (empty path: defaults) and data, standardizes, and
/// places the pseudo-inputs.
PreparedProblem prepare(const std::string &config_path,
                        const std::string &data_path,
                        std::optional<std::uint64_t> seed);

/// Oracle runs are refused above this many points.
inline constexpr long kOracleMaxPoints = 3000;

} // namespace stgp::cli
