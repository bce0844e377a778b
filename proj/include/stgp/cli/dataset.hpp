#pragma once

// CSV datasets: header `time,x1,...,xd,value,noise_var`. Rows are bucketed by
// the exact text of the time field, then buckets are ordered by time.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stgp/cli/config.hpp"
#include "stgp/pseudo_point.hpp"

namespace stgp::cli {

class DataError : public Error {
public:
  explicit DataError(const std::string &what,
                     std::optional<std::size_t> line = std::nullopt)
      : Error(line ? "line " + std::to_string(*line) + ": " + what : what),
        line_(line) {}

  std::optional<std::size_t> line() const { return line_; }

private:
  std::optional<std::size_t> line_;
};

class QueryError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

struct Dataset {
  Eigen::Index dim = 0;
  /// Raw (unstandardized) observations.
  TimeGroupedData data;
  /// Time field text of each bucket, as it appeared in the file.
  std::vector<std::string> time_text;
};

Dataset read_dataset(std::istream &in);
Dataset load_dataset(const std::string &path);

/// Header line for a dataset with `dim` spatial coordinates.
std::string dataset_header(Eigen::Index dim);

/// Sample mean and standard deviation of all values (std 1 if degenerate).
Standardization fit_standardization(const TimeGroupedData &data);

/// (y - mean) / std, noise / std^2.
TimeGroupedData standardize(const TimeGroupedData &data,
                            const Standardization &s);

struct QuerySet {
  Points X;
  VectorXd t;
  std::vector<std::string> time_text;
};

/// Header `time,x1,...,xd`. Throws QueryError on malformed input.
QuerySet read_queries(std::istream &in, Eigen::Index dim);
QuerySet load_queries(const std::string &path, Eigen::Index dim);

/// Pseudo-input file: header `x1,...,xd`, one point per row.
Points load_points(const std::string &path, Eigen::Index dim);

std::vector<std::string> split_csv_line(const std::string &line);

} // namespace stgp::cli
