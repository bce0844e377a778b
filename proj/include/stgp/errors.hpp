#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace stgp {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A matrix that should be positive definite could not be factorized, even
/// after the single jitter retry.
class CholeskyFailure : public Error {
public:
  explicit CholeskyFailure(const std::string &what,
                           std::optional<std::size_t> step = std::nullopt)
      : Error(step ? what + " (time step " + std::to_string(*step) + ")"
                   : what),
        step_(step) {}

  /// Index of the LGSSM step at which the failure happened, when known.
  std::optional<std::size_t> step() const { return step_; }

private:
  std::optional<std::size_t> step_;
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

class NonDiagonalNoise : public Error {
public:
  using Error::Error;
};

class NegativeTimestep : public Error {
public:
  using Error::Error;
};

class NonIncreasingTimes : public Error {
public:
  using Error::Error;
};

class MaskLengthMismatch : public Error {
public:
  using Error::Error;
};

class SingularPseudoGram : public Error {
public:
  using Error::Error;
};

class TimeAlignmentError : public Error {
public:
  using Error::Error;
};

class QueryTimeNotOnGrid : public Error {
public:
  explicit QueryTimeNotOnGrid(std::vector<double> times)
      : Error(describe(times)), times_(std::move(times)) {}

  const std::vector<double> &times() const { return times_; }

private:
  static std::string describe(const std::vector<double> &times);
  std::vector<double> times_;
};

class AlphaOutOfRange : public Error {
public:
  using Error::Error;
};

class SingularConditioningSet : public Error {
public:
  using Error::Error;
};

class InvalidParameter : public Error {
public:
  using Error::Error;
};

} // namespace stgp
