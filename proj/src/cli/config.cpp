#include "stgp/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace stgp::cli {

namespace {

std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) {
    return {};
  }
  const auto end = s.find_last_not_of(" \t\r");
  return std::string(s.substr(begin, end - begin + 1));
}

double parse_double(const std::string &key, const std::string &text) {
  double v = 0.0;
  const auto *end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ConfigError(key + ": '" + text + "' is not a number");
  }
  return v;
}

double parse_positive(const std::string &key, const std::string &text) {
  const double v = parse_double(key, text);
  if (!(v > 0.0)) {
    throw ConfigError(key + " must be positive");
  }
  return v;
}

long long parse_integer(const std::string &key, const std::string &text) {
  long long v = 0;
  const auto *end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(key + ": '" + text + "' is not an integer");
  }
  return v;
}

bool parse_bool(const std::string &key, const std::string &text) {
  if (text == "true" || text == "1") {
    return true;
  }
  if (text == "false" || text == "0") {
    return false;
  }
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

std::vector<double> parse_list(const std::string &key,
                               const std::string &text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(parse_double(key, trim(item)));
  }
  if (out.empty()) {
    throw ConfigError(key + " is empty");
  }
  return out;
}

bool starts_with(const std::string &s, const std::string &prefix) {
  return s.rfind(prefix, 0) == 0;
}

} // namespace

KeyValues parse_key_values(std::istream &in) {
  KeyValues kv;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') {
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(number) +
                        ": expected key=value");
    }
    auto key = trim(std::string_view(text).substr(0, eq));
    auto value = trim(std::string_view(text).substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(number) + ": empty key");
    }
    if (!kv.emplace(key, value).second) {
      throw ConfigError("line " + std::to_string(number) + ": duplicate key '" +
                        key + "'");
    }
  }
  return kv;
}

KeyValues load_key_values(const std::string &path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file '" + path + "'");
  }
  return parse_key_values(in);
}

std::vector<MaternOrder> RunConfig::orders() const {
  std::vector<MaternOrder> out;
  for (const auto &c : components) {
    out.push_back(c.temporal);
  }
  return out;
}

SumSeparableKernel RunConfig::kernel(Eigen::Index input_dim) const {
  auto kernel = default_kernel(orders(), input_dim);
  for (std::size_t p = 0; p < components.size(); ++p) {
    const auto &c = components[p];
    auto &k = kernel.components[p];
    if (!c.inverse_lengthscale.empty()) {
      if (c.inverse_lengthscale.size() == 1) {
        k.spatial.inverse_lengthscale.setConstant(c.inverse_lengthscale[0]);
      } else if (static_cast<Eigen::Index>(c.inverse_lengthscale.size()) ==
                 input_dim) {
        k.spatial.inverse_lengthscale = Eigen::Map<const VectorXd>(
            c.inverse_lengthscale.data(), input_dim);
      } else {
        throw ConfigError("kernel." + std::to_string(p) +
                          ".inverse_lengthscale has " +
                          std::to_string(c.inverse_lengthscale.size()) +
                          " values but the data has " +
                          std::to_string(input_dim) + " spatial dimensions");
      }
    }
    if (c.amplitude) {
      k.spatial.amplitude = *c.amplitude;
    }
    if (c.temporal_lengthscale) {
      k.temporal = TemporalSdeKernel(c.temporal, *c.temporal_lengthscale);
    }
  }
  return kernel;
}

RunConfig parse_config(const KeyValues &kv) {
  RunConfig cfg;
  std::size_t count = 1;
  if (const auto it = kv.find("kernel.count"); it != kv.end()) {
    const auto n = parse_integer(it->first, it->second);
    if (n < 1) {
      throw ConfigError("kernel.count must be at least 1");
    }
    count = static_cast<std::size_t>(n);
  }
  cfg.components.assign(count, ComponentConfig{});

  std::map<std::size_t, std::vector<double>> pseudo_rows;
  std::optional<double> std_mean;
  std::optional<double> std_scale;

  for (const auto &[key, value] : kv) {
    if (key == "kernel.count" || starts_with(key, "fit.")) {
      continue;
    }
    if (starts_with(key, "kernel.")) {
      const auto rest = key.substr(7);
      const auto dot = rest.find('.');
      if (dot == std::string::npos) {
        throw ConfigError("unknown key '" + key + "'");
      }
      const auto p = parse_integer(key, rest.substr(0, dot));
      if (p < 0 || static_cast<std::size_t>(p) >= count) {
        throw ConfigError(key + ": component index out of range (kernel.count=" +
                          std::to_string(count) + ")");
      }
      auto &c = cfg.components[static_cast<std::size_t>(p)];
      const auto field = rest.substr(dot + 1);
      if (field == "temporal") {
        try {
          c.temporal = parse_matern_order(value);
        } catch (const InvalidParameter &e) {
          throw ConfigError(key + ": " + e.what());
        }
      } else if (field == "temporal_lengthscale") {
        c.temporal_lengthscale = parse_positive(key, value);
      } else if (field == "inverse_lengthscale") {
        c.inverse_lengthscale = parse_list(key, value);
        for (double v : c.inverse_lengthscale) {
          if (!(v > 0.0)) {
            throw ConfigError(key + " must be positive");
          }
        }
      } else if (field == "amplitude") {
        c.amplitude = parse_positive(key, value);
      } else {
        throw ConfigError("unknown key '" + key + "'");
      }
    } else if (key == "noise.variance") {
      cfg.noise_variance = parse_positive(key, value);
    } else if (key == "noise.learn") {
      cfg.learn_noise = parse_bool(key, value);
    } else if (key == "pseudo.count") {
      const auto n = parse_integer(key, value);
      if (n < 1) {
        throw ConfigError("pseudo.count must be at least 1");
      }
      cfg.pseudo_count = static_cast<int>(n);
    } else if (key == "pseudo.path") {
      cfg.pseudo_path = value;
    } else if (starts_with(key, "pseudo.z.")) {
      const auto m = parse_integer(key, key.substr(9));
      if (m < 0) {
        throw ConfigError(key + ": negative index");
      }
      pseudo_rows[static_cast<std::size_t>(m)] = parse_list(key, value);
    } else if (key == "alpha") {
      cfg.alpha = parse_double(key, value);
      if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) {
        throw ConfigError("alpha must lie in [0, 1]");
      }
    } else if (key == "seed") {
      const auto s = parse_integer(key, value);
      if (s < 0) {
        throw ConfigError("seed must be nonnegative");
      }
      cfg.seed = static_cast<std::uint64_t>(s);
    } else if (key == "threads") {
      cfg.threads = static_cast<int>(parse_integer(key, value));
    } else if (key == "optimizer.memory") {
      cfg.optimizer.memory = static_cast<int>(parse_integer(key, value));
      if (cfg.optimizer.memory < 1) {
        throw ConfigError("optimizer.memory must be at least 1");
      }
    } else if (key == "optimizer.max_iterations") {
      cfg.optimizer.max_iterations = static_cast<int>(parse_integer(key, value));
      if (cfg.optimizer.max_iterations < 0) {
        throw ConfigError("optimizer.max_iterations must be nonnegative");
      }
    } else if (key == "optimizer.gradient_tolerance") {
      cfg.optimizer.gradient_tolerance = parse_positive(key, value);
    } else if (key == "standardize.mean") {
      std_mean = parse_double(key, value);
    } else if (key == "standardize.std") {
      std_scale = parse_positive(key, value);
    } else {
      throw ConfigError("unknown key '" + key + "'");
    }
  }

  if (cfg.learn_noise &&
      !(cfg.noise_variance >= kNoiseLo && cfg.noise_variance <= kNoiseHi)) {
    throw ConfigError("noise.variance must lie in [" + format_double(kNoiseLo) +
                      ", " + format_double(kNoiseHi) + "] when learned");
  }
  if (std_mean.has_value() != std_scale.has_value()) {
    throw ConfigError("standardize.mean and standardize.std go together");
  }
  if (std_mean) {
    cfg.standardization = Standardization{*std_mean, *std_scale};
  }
  if (!pseudo_rows.empty()) {
    const auto dim = pseudo_rows.begin()->second.size();
    Points z(static_cast<Eigen::Index>(pseudo_rows.size()),
             static_cast<Eigen::Index>(dim));
    std::size_t expected = 0;
    for (const auto &[m, row] : pseudo_rows) {
      if (m != expected++) {
        throw ConfigError("pseudo.z indices must run 0, 1, 2, ...");
      }
      if (row.size() != dim) {
        throw ConfigError("pseudo.z." + std::to_string(m) +
                          " has the wrong number of coordinates");
      }
      for (std::size_t d = 0; d < dim; ++d) {
        z(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d)) = row[d];
      }
    }
    cfg.pseudo_points = std::move(z);
  }
  return cfg;
}

RunConfig load_config(const std::string &path) {
  return parse_config(load_key_values(path));
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_params(std::ostream &out, const FittedModel &model) {
  out << "kernel.count=" << model.kernel.size() << '\n';
  for (std::size_t p = 0; p < model.kernel.size(); ++p) {
    const auto &c = model.kernel[p];
    const auto prefix = "kernel." + std::to_string(p) + ".";
    out << prefix << "temporal=" << to_string(c.temporal.order()) << '\n';
    out << prefix << "temporal_lengthscale="
        << format_double(c.temporal.lengthscale()) << '\n';
    out << prefix << "inverse_lengthscale=";
    for (Eigen::Index d = 0; d < c.spatial.input_dim(); ++d) {
      out << (d ? "," : "") << format_double(c.spatial.inverse_lengthscale(d));
    }
    out << '\n';
    out << prefix << "amplitude=" << format_double(c.spatial.amplitude) << '\n';
  }
  out << "noise.variance=" << format_double(model.noise_variance) << '\n';
  out << "noise.learn=" << (model.learn_noise ? "true" : "false") << '\n';
  out << "pseudo.count=" << model.pseudo_points.rows() << '\n';
  for (Eigen::Index m = 0; m < model.pseudo_points.rows(); ++m) {
    out << "pseudo.z." << m << '=';
    for (Eigen::Index d = 0; d < model.pseudo_points.cols(); ++d) {
      out << (d ? "," : "") << format_double(model.pseudo_points(m, d));
    }
    out << '\n';
  }
  out << "standardize.mean=" << format_double(model.standardization.mean)
      << '\n';
  out << "standardize.std=" << format_double(model.standardization.scale)
      << '\n';
  out << "alpha=" << format_double(model.alpha) << '\n';
  out << "seed=" << model.seed << '\n';
  out << "fit.status=" << model.status << '\n';
  out << "fit.objective=" << format_double(model.objective) << '\n';
}

} // namespace stgp::cli
