#include "stgp/cli/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>

namespace stgp::cli {

namespace {

std::string trim(const std::string &s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) {
    return {};
  }
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

bool parse_number(const std::string &text, double &v) {
  const auto *end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  return ec == std::errc() && ptr == end && std::isfinite(v);
}

bool is_blank(const std::string &line) { return trim(line).empty(); }

} // namespace

std::vector<std::string> split_csv_line(const std::string &line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string::npos) {
      break;
    }
    start = comma + 1;
  }
  return fields;
}

std::string dataset_header(Eigen::Index dim) {
  std::string h = "time";
  for (Eigen::Index d = 1; d <= dim; ++d) {
    h += ",x" + std::to_string(d);
  }
  return h + ",value,noise_var";
}

Dataset read_dataset(std::istream &in) {
  std::string line;
  std::size_t number = 0;
  if (!std::getline(in, line)) {
    throw DataError("empty dataset (missing header)", 1);
  }
  ++number;
  const auto header = split_csv_line(line);
  if (header.size() < 4 || header.front() != "time" ||
      header[header.size() - 2] != "value" || header.back() != "noise_var") {
    throw DataError("header must be time,x1,...,xd,value,noise_var", 1);
  }
  Dataset ds;
  ds.dim = static_cast<Eigen::Index>(header.size()) - 3;

  struct Row {
    std::vector<double> x;
    double value;
    double noise;
  };
  std::map<std::string, std::vector<Row>> by_time;
  while (std::getline(in, line)) {
    ++number;
    if (is_blank(line)) {
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw DataError("expected " + std::to_string(header.size()) +
                          " fields, found " + std::to_string(fields.size()),
                      number);
    }
    std::vector<double> values(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (!parse_number(fields[i], values[i])) {
        throw DataError("field '" + header[i] + "' is not a finite number: '" +
                            fields[i] + "'",
                        number);
      }
    }
    Row row{{values.begin() + 1, values.end() - 2},
            values[values.size() - 2],
            values.back()};
    if (!(row.noise > 0.0)) {
      throw DataError("noise_var must be positive", number);
    }
    by_time[fields.front()].push_back(std::move(row));
  }

  std::vector<std::pair<double, std::string>> order;
  for (const auto &[text, rows] : by_time) {
    double t = 0.0;
    parse_number(text, t);
    order.emplace_back(t, text);
  }
  std::sort(order.begin(), order.end());
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (order[i].first == order[i - 1].first) {
      throw DataError("time stamps '" + order[i - 1].second + "' and '" +
                      order[i].second + "' are the same number written "
                      "differently");
    }
  }

  for (const auto &[t, text] : order) {
    const auto &rows = by_time[text];
    TimeBucket b;
    b.time = t;
    const auto n = static_cast<Eigen::Index>(rows.size());
    b.X.resize(n, ds.dim);
    b.y.resize(n);
    b.noise.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto &r = rows[static_cast<std::size_t>(i)];
      for (Eigen::Index d = 0; d < ds.dim; ++d) {
        b.X(i, d) = r.x[static_cast<std::size_t>(d)];
      }
      b.y(i) = r.value;
      b.noise(i) = r.noise;
    }
    ds.data.buckets.push_back(std::move(b));
    ds.time_text.push_back(text);
  }
  return ds;
}

Dataset load_dataset(const std::string &path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open dataset '" + path + "'");
  }
  return read_dataset(in);
}

Standardization fit_standardization(const TimeGroupedData &data) {
  const auto n = data.total();
  Standardization s;
  if (n == 0) {
    return s;
  }
  double sum = 0.0;
  for (const auto &b : data.buckets) {
    sum += b.y.sum();
  }
  s.mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (const auto &b : data.buckets) {
    ss += (b.y.array() - s.mean).square().sum();
  }
  const double sd = std::sqrt(ss / static_cast<double>(n));
  s.scale = sd > 0.0 ? sd : 1.0;
  return s;
}

TimeGroupedData standardize(const TimeGroupedData &data,
                            const Standardization &s) {
  TimeGroupedData out = data;
  for (auto &b : out.buckets) {
    b.y = (b.y.array() - s.mean) / s.scale;
    b.noise /= s.scale * s.scale;
  }
  return out;
}

QuerySet read_queries(std::istream &in, Eigen::Index dim) {
  std::string line;
  std::size_t number = 0;
  QuerySet q;
  q.X.resize(0, dim);
  if (!std::getline(in, line)) {
    return q;
  }
  ++number;
  const auto header = split_csv_line(line);
  if (static_cast<Eigen::Index>(header.size()) != dim + 1 ||
      header.front() != "time") {
    throw QueryError("query header must be time followed by " +
                     std::to_string(dim) + " coordinate columns");
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++number;
    if (is_blank(line)) {
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw QueryError("line " + std::to_string(number) + ": expected " +
                       std::to_string(header.size()) + " fields");
    }
    std::vector<double> v(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (!parse_number(fields[i], v[i])) {
        throw QueryError("line " + std::to_string(number) + ": '" + fields[i] +
                         "' is not a finite number");
      }
    }
    rows.push_back(std::move(v));
    q.time_text.push_back(fields.front());
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  q.X.resize(n, dim);
  q.t.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto &r = rows[static_cast<std::size_t>(i)];
    q.t(i) = r[0];
    for (Eigen::Index d = 0; d < dim; ++d) {
      q.X(i, d) = r[static_cast<std::size_t>(d) + 1];
    }
  }
  return q;
}

QuerySet load_queries(const std::string &path, Eigen::Index dim) {
  std::ifstream in(path);
  if (!in) {
    throw QueryError("cannot open query file '" + path + "'");
  }
  return read_queries(in, dim);
}

Points load_points(const std::string &path, Eigen::Index dim) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open pseudo-input file '" + path + "'");
  }
  std::string line;
  std::size_t number = 0;
  if (!std::getline(in, line)) {
    throw DataError("pseudo-input file '" + path + "' is empty");
  }
  ++number;
  if (static_cast<Eigen::Index>(split_csv_line(line).size()) != dim) {
    throw DataError("pseudo-input file '" + path + "' must have " +
                        std::to_string(dim) + " columns",
                    number);
  }
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++number;
    if (is_blank(line)) {
      continue;
    }
    const auto fields = split_csv_line(line);
    if (static_cast<Eigen::Index>(fields.size()) != dim) {
      throw DataError("pseudo-input row has the wrong number of columns",
                      number);
    }
    for (const auto &f : fields) {
      double v = 0.0;
      if (!parse_number(f, v)) {
        throw DataError("'" + f + "' is not a finite number", number);
      }
      values.push_back(v);
    }
  }
  const auto n = static_cast<Eigen::Index>(values.size()) / dim;
  if (n == 0) {
    throw DataError("pseudo-input file '" + path + "' has no points");
  }
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                        Eigen::RowMajor>>(values.data(), n, dim);
}

} // namespace stgp::cli
