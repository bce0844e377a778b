#include "stgp/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>

#include "json.hpp"
#include "stgp/cli/kmeans.hpp"
#include "stgp/oracle.hpp"
#include "stgp/parallel.hpp"
#include "stgp/training.hpp"

namespace stgp::cli {

namespace {

std::ofstream open_output(const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write '" + path + "'");
  }
  return out;
}

// Runs a command body and maps failures onto exit codes.
int guarded(std::ostream &err, const std::function<int()> &body) {
  try {
    return body();
  } catch (const QueryTimeNotOnGrid &e) {
    err << "query error: " << e.what() << '\n';
    return kExitQuery;
  } catch (const QueryError &e) {
    err << "query error: " << e.what() << '\n';
    return kExitQuery;
  } catch (const DataError &e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const ConfigError &e) {
    err << "config error: " << e.what() << '\n';
    return kExitData;
  } catch (const IoError &e) {
    err << "io error: " << e.what() << '\n';
    return kExitData;
  } catch (const Error &e) {
    err << "inference failure: " << e.what() << '\n';
    return kExitInference;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kExitInference;
  }
}

PreparedProblem prepare_from(RunConfig cfg, const std::string &data_path) {
  PreparedProblem p;
  p.dataset = load_dataset(data_path);
  const auto dim = p.dataset.dim;
  p.standardization =
      cfg.standardization.value_or(fit_standardization(p.dataset.data));
  p.kernel = cfg.kernel(dim);

  Points z;
  if (cfg.pseudo_points) {
    z = *cfg.pseudo_points;
    if (z.cols() != dim) {
      throw ConfigError("pseudo.z points have " + std::to_string(z.cols()) +
                        " coordinates but the data has " +
                        std::to_string(dim));
    }
  } else if (!cfg.pseudo_path.empty()) {
    z = load_points(cfg.pseudo_path, dim);
  } else {
    Points all(p.dataset.data.total(), dim);
    Eigen::Index row = 0;
    for (const auto &b : p.dataset.data.buckets) {
      all.middleRows(row, b.size()) = b.X;
      row += b.size();
    }
    z = kmeans(all, cfg.pseudo_count, cfg.seed);
  }
  p.z = PseudoInputs::shared(std::move(z), pseudo_times_from(p.dataset.data));

  p.data = standardize(p.dataset.data, p.standardization);
  if (cfg.learn_noise) {
    for (auto &b : p.data.buckets) {
      b.noise.setConstant(b.size(), cfg.noise_variance);
    }
  }
  if (cfg.threads > 0) {
    set_thread_limit(cfg.threads);
  }
  p.config = std::move(cfg);
  return p;
}

RunConfig config_or_default(const std::string &path) {
  return path.empty() ? RunConfig{} : load_config(path);
}

} // namespace

PreparedProblem prepare(const std::string &config_path,
                        const std::string &data_path,
                        std::optional<std::uint64_t> seed) {
  auto cfg = config_or_default(config_path);
  if (seed) {
    cfg.seed = *seed;
  }
  return prepare_from(std::move(cfg), data_path);
}

int cmd_synth(const SynthArgs &args, std::ostream &err) {
  return guarded(err, [&] {
    {
      auto out = open_output(args.out);
      write_synth(out, args.options);
    }
    if (args.pseudo_count > 0) {
      if (args.pseudo_out.empty()) {
        throw ConfigError("--pseudo-out is required with --M");
      }
      auto out = open_output(args.pseudo_out);
      out << "x1\n";
      const Points z = regular_points(args.pseudo_count, 0.0, 10.0);
      for (Eigen::Index m = 0; m < z.rows(); ++m) {
        out << format_double(z(m, 0)) << '\n';
      }
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_fit(const FitArgs &args, std::ostream &err) {
  return guarded(err, [&] {
    const auto p = prepare(args.config, args.data, args.seed);
    const auto &cfg = p.config;
    const TrainingProblem problem{p.data, p.z, cfg.orders()};
    const auto init = pack_parameters(
        p.kernel, cfg.learn_noise ? std::optional<double>(cfg.noise_variance)
                                  : std::nullopt);
    const auto result = fit(problem, init, cfg.optimizer);

    FittedModel model;
    model.kernel = unpack_kernel(result.params, cfg.orders());
    model.noise_variance = unpack_noise(result.params).value_or(cfg.noise_variance);
    model.learn_noise = cfg.learn_noise;
    model.pseudo_points = p.z.spatial.front();
    model.standardization = p.standardization;
    model.alpha = cfg.alpha;
    model.seed = cfg.seed;
    model.status = std::string(to_string(result.status));
    model.objective = result.trace.back().objective;
    {
      auto out = open_output(args.out);
      write_params(out, model);
    }
    {
      auto out = open_output(args.trace.empty() ? args.out + ".trace.csv"
                                                : args.trace);
      out << "iter,objective,grad_norm\n";
      for (const auto &t : result.trace) {
        out << t.iteration << ',' << format_double(t.objective) << ','
            << format_double(t.gradient_norm) << '\n';
      }
    }
    if (model.objective >= kFailurePenalty) {
      throw Error("inference failed at every visited parameter setting");
    }
    if (result.status == FitStatus::LineSearchFailure) {
      err << "warning: line search failed; wrote the best parameters found\n";
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_predict(const PredictArgs &args, std::ostream &err) {
  return guarded(err, [&] {
    if (args.params.empty()) {
      throw ConfigError("--params is required");
    }
    KeyValues kv = args.config.empty() ? KeyValues{}
                                       : load_key_values(args.config);
    for (auto &[key, value] : load_key_values(args.params)) {
      kv[key] = value;
    }
    const auto p = prepare_from(parse_config(kv), args.data);
    const auto q = load_queries(args.query, p.dataset.dim);
    const auto pred =
        predict(p.kernel, p.z, p.data, q.X, q.t, {p.config.alpha});

    auto out = open_output(args.out);
    out << "time";
    for (Eigen::Index d = 1; d <= p.dataset.dim; ++d) {
      out << ",x" << d;
    }
    out << ",mean,variance\n";
    const auto &s = p.standardization;
    for (Eigen::Index i = 0; i < q.t.size(); ++i) {
      out << q.time_text[static_cast<std::size_t>(i)];
      for (Eigen::Index d = 0; d < p.dataset.dim; ++d) {
        out << ',' << format_double(q.X(i, d));
      }
      out << ',' << format_double(s.mean + s.scale * pred.mean(i)) << ','
          << format_double(s.scale * s.scale * pred.variance(i)) << '\n';
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_elbo(const ElboArgs &args, std::ostream &err) {
  return guarded(err, [&] {
    const auto p = prepare(args.config, args.data, args.seed);
    const double value = elbo(p.kernel, p.z, p.data);
    nlohmann::json j;
    j["elbo"] = value;
    j["N"] = p.data.total();
    j["T"] = p.data.buckets.size();
    j["M_tau"] = p.z.spatial.front().rows();
    j["alpha"] = p.config.alpha;
    if (p.config.alpha > 0.0) {
      j["approximate_lml"] =
          approximate_lml(p.kernel, p.z, p.data, {p.config.alpha});
    }
    if (args.out.empty()) {
      std::cout << j.dump(2) << '\n';
    } else {
      auto out = open_output(args.out);
      out << j.dump(2) << '\n';
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_bench(const BenchArgs &args, std::ostream &err) {
  return guarded(err, [&] {
    auto cfg = config_or_default(args.config);
    if (args.seed) {
      cfg.seed = *args.seed;
    }
    const auto kernel =
        args.config.empty() ? benchmark_kernel() : cfg.kernel(1);
    std::vector<std::string> methods;
    if (args.method == "structured" || args.method == "oracle") {
      methods = {args.method};
    } else if (args.method == "both") {
      methods = {"structured", "oracle"};
    } else {
      throw ConfigError("unknown method '" + args.method +
                        "' (expected structured, oracle or both)");
    }
    if (args.T.empty() || args.N_t < 1 || args.M_tau < 1 || args.repeats < 1) {
      throw ConfigError("bench needs a T list and positive N_t, M_tau, "
                        "repeats");
    }
    for (const auto &m : methods) {
      for (int T : args.T) {
        if (T < 1) {
          throw ConfigError("T values must be positive");
        }
        if (m == "oracle" &&
            static_cast<long>(T) * args.N_t > kOracleMaxPoints) {
          throw ConfigError("oracle refuses T * N_t = " +
                            std::to_string(static_cast<long>(T) * args.N_t) +
                            " > " + std::to_string(kOracleMaxPoints) +
                            " points");
        }
      }
    }

    set_thread_limit(args.threads);
    nlohmann::json results = nlohmann::json::array();
    for (const auto &m : methods) {
      for (int T : args.T) {
        std::mt19937_64 rng(cfg.seed + static_cast<std::uint64_t>(T));
        std::uniform_real_distribution<double> location(0.0, 10.0);
        std::normal_distribution<double> normal;
        TimeGroupedData data;
        VectorXd times(T);
        for (int k = 0; k < T; ++k) {
          TimeBucket b;
          b.time = 0.1 * k;
          times(k) = b.time;
          b.X.resize(args.N_t, 1);
          b.y.resize(args.N_t);
          b.noise = VectorXd::Constant(args.N_t, 0.1);
          for (int i = 0; i < args.N_t; ++i) {
            b.X(i, 0) = location(rng);
            b.y(i) = normal(rng);
          }
          data.buckets.push_back(std::move(b));
        }
        const auto z =
            PseudoInputs::shared(regular_points(args.M_tau, 0.0, 10.0), times);
        const auto dense = oracle::DenseGpProblem::from_buckets(kernel, data);

        std::function<double()> run;
        if (m == "structured") {
          run = [&] { return elbo(kernel, z, data); };
        } else {
          run = [&] { return oracle::dense_saturated_bound(dense, z); };
        }
        run();
        std::vector<double> seconds;
        for (int r = 0; r < args.repeats; ++r) {
          const auto start = std::chrono::steady_clock::now();
          run();
          seconds.push_back(std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - start)
                                .count());
        }
        std::nth_element(seconds.begin(), seconds.begin() + seconds.size() / 2,
                         seconds.end());
        results.push_back({{"method", m},
                           {"T", T},
                           {"M_tau", args.M_tau},
                           {"seconds", seconds[seconds.size() / 2]}});
      }
    }
    set_thread_limit(0);

    if (args.out.empty()) {
      std::cout << results.dump(2) << '\n';
    } else {
      auto out = open_output(args.out);
      out << results.dump(2) << '\n';
    }
    return static_cast<int>(kExitOk);
  });
}

} // namespace stgp::cli
