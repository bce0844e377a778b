#include "stgp/training.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <exception>
#include <limits>
#include <numeric>

#include "stgp/parallel.hpp"

namespace stgp {

namespace {

double clamp_theta(double theta) {
  return std::clamp(theta, -kUnconstrainedLimit, kUnconstrainedLimit);
}

// Lexicographic row order on (x, y, noise) within every bucket.
TimeGroupedData canonical_order(const TimeGroupedData &data) {
  TimeGroupedData out;
  out.buckets.reserve(data.buckets.size());
  for (const auto &b : data.buckets) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(b.size()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index i, Eigen::Index j) {
      for (Eigen::Index d = 0; d < b.X.cols(); ++d) {
        if (b.X(i, d) != b.X(j, d)) {
          return b.X(i, d) < b.X(j, d);
        }
      }
      if (b.y(i) != b.y(j)) {
        return b.y(i) < b.y(j);
      }
      return b.noise(i) < b.noise(j);
    });
    TimeBucket sorted{b.time, Points(b.X.rows(), b.X.cols()), VectorXd(b.size()),
                      VectorXd(b.size())};
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const auto k = static_cast<Eigen::Index>(r);
      sorted.X.row(k) = b.X.row(idx[r]);
      sorted.y(k) = b.y(idx[r]);
      sorted.noise(k) = b.noise(idx[r]);
    }
    out.buckets.push_back(std::move(sorted));
  }
  return out;
}

} // namespace

double to_constrained(const ParameterSpec &spec, double theta) {
  theta = clamp_theta(theta);
  switch (spec.transform) {
  case Transform::LogPositive:
    return std::exp(theta);
  case Transform::RescaledLogit:
    return spec.lo + (spec.hi - spec.lo) / (1.0 + std::exp(-theta));
  case Transform::Identity:
    break;
  }
  return theta;
}

double to_unconstrained(const ParameterSpec &spec, double value) {
  double theta = value;
  switch (spec.transform) {
  case Transform::LogPositive:
    if (!(value >= 0.0)) {
      throw InvalidParameter(spec.name + " must be positive");
    }
    theta = std::log(value);
    break;
  case Transform::RescaledLogit: {
    if (!(value >= spec.lo && value <= spec.hi)) {
      throw InvalidParameter(spec.name + " must lie in [" +
                             std::to_string(spec.lo) + ", " +
                             std::to_string(spec.hi) + "]");
    }
    const double u = (value - spec.lo) / (spec.hi - spec.lo);
    theta = std::log(u) - std::log1p(-u);
    break;
  }
  case Transform::Identity:
    break;
  }
  return clamp_theta(theta);
}

double ParameterVector::value(std::size_t i) const {
  return to_constrained(specs.at(i), theta(static_cast<Eigen::Index>(i)));
}

void ParameterVector::set_value(std::size_t i, double value) {
  theta(static_cast<Eigen::Index>(i)) = to_unconstrained(specs.at(i), value);
}

std::optional<std::size_t>
ParameterVector::find(const std::string &name) const {
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].name == name) {
      return i;
    }
  }
  return std::nullopt;
}

void ParameterVector::push(ParameterSpec spec, double value) {
  const double t = to_unconstrained(spec, value);
  specs.push_back(std::move(spec));
  theta.conservativeResize(theta.size() + 1);
  theta(theta.size() - 1) = t;
}

ParameterVector pack_parameters(const SumSeparableKernel &kernel,
                                std::optional<double> noise_variance) {
  kernel.validate();
  ParameterVector params;
  for (std::size_t p = 0; p < kernel.size(); ++p) {
    const auto prefix = "kernel." + std::to_string(p) + ".";
    const auto &c = kernel[p];
    for (Eigen::Index d = 0; d < c.spatial.input_dim(); ++d) {
      params.push({prefix + "inverse_lengthscale." + std::to_string(d),
                   Transform::LogPositive},
                  c.spatial.inverse_lengthscale(d));
    }
    params.push({prefix + "amplitude", Transform::LogPositive},
                c.spatial.amplitude);
    params.push({prefix + "temporal_lengthscale", Transform::LogPositive},
                c.temporal.lengthscale());
  }
  if (noise_variance) {
    params.push({"noise.variance", Transform::RescaledLogit, kNoiseLo, kNoiseHi},
                *noise_variance);
  }
  return params;
}

SumSeparableKernel unpack_kernel(const ParameterVector &params,
                                 const std::vector<MaternOrder> &orders) {
  SumSeparableKernel kernel;
  std::size_t i = 0;
  for (std::size_t p = 0; p < orders.size(); ++p) {
    const auto prefix = "kernel." + std::to_string(p) + ".";
    SpatialKernel spatial;
    std::vector<double> inv;
    while (i < params.size() &&
           params.specs[i].name.rfind(prefix + "inverse_lengthscale.", 0) == 0) {
      inv.push_back(params.value(i++));
    }
    spatial.inverse_lengthscale =
        Eigen::Map<const VectorXd>(inv.data(), static_cast<Eigen::Index>(inv.size()));
    if (i + 2 > params.size() || params.specs[i].name != prefix + "amplitude" ||
        params.specs[i + 1].name != prefix + "temporal_lengthscale") {
      throw InvalidParameter("parameter vector does not describe component " +
                             std::to_string(p));
    }
    spatial.amplitude = params.value(i++);
    const double lengthscale = params.value(i++);
    kernel.components.push_back(
        {std::move(spatial), TemporalSdeKernel(orders[p], lengthscale)});
  }
  return kernel;
}

std::optional<double> unpack_noise(const ParameterVector &params) {
  if (const auto i = params.find("noise.variance")) {
    return params.value(*i);
  }
  return std::nullopt;
}

SumSeparableKernel default_kernel(const std::vector<MaternOrder> &orders,
                                  Eigen::Index input_dim) {
  SumSeparableKernel kernel;
  for (std::size_t p = 0; p < orders.size(); ++p) {
    double lambda = 1e-2;
    double inverse_lengthscale = 1.0;
    double amplitude = 1.0;
    if (orders.size() == 2) {
      lambda = p == 0 ? 1e-3 : 1e-1;
      inverse_lengthscale = p == 0 ? 1.0 : 5.0;
      amplitude = p == 0 ? 0.7 : 0.3;
    }
    kernel.components.push_back(
        {SpatialKernel{VectorXd::Constant(input_dim, inverse_lengthscale),
                       amplitude},
         TemporalSdeKernel(orders[p], 1.0 / lambda)});
  }
  return kernel;
}

double objective(const ParameterVector &params,
                 const TrainingProblem &problem) {
  try {
    const auto kernel = unpack_kernel(params, problem.orders);
    const auto noise = unpack_noise(params);
    double value = 0.0;
    if (noise) {
      TimeGroupedData data = problem.data;
      for (auto &b : data.buckets) {
        b.noise.setConstant(b.size(), *noise);
      }
      value = -elbo(kernel, problem.z, data);
    } else {
      value = -elbo(kernel, problem.z, problem.data);
    }
    return std::isfinite(value) ? value : kFailurePenalty;
  } catch (const Error &) {
    return kFailurePenalty;
  }
}

VectorXd finite_difference_gradient(const ScalarFunction &f,
                                    const VectorXd &theta) {
  const auto n = static_cast<long>(theta.size());
  VectorXd g(theta.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) num_threads(thread_limit())
  for (long i = 0; i < n; ++i) {
    try {
      const double h = 1e-5 * (1.0 + std::abs(theta(i)));
      VectorXd plus = theta;
      VectorXd minus = theta;
      plus(i) += h;
      minus(i) -= h;
      g(i) = (f(plus) - f(minus)) / (2.0 * h);
    } catch (...) {
#pragma omp critical(stgp_gradient_failure)
      if (!failure) {
        failure = std::current_exception();
      }
    }
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
  return g;
}

VectorXd gradient(const ParameterVector &params,
                  const TrainingProblem &problem) {
  return finite_difference_gradient(
      [&](const VectorXd &theta) {
        ParameterVector p = params;
        p.theta = theta;
        return objective(p, problem);
      },
      params.theta);
}

std::string_view to_string(FitStatus status) {
  switch (status) {
  case FitStatus::Converged:
    return "converged";
  case FitStatus::MaxIterations:
    return "max_iterations";
  case FitStatus::LineSearchFailure:
    return "line_search_failure";
  }
  return "unknown";
}

MinimizeResult minimize_lbfgs(const ScalarFunction &f, VectorXd theta,
                              const FitConfig &config) {
  struct Pair {
    VectorXd s;
    VectorXd y;
    double rho;
  };
  std::deque<Pair> history;

  MinimizeResult out;
  double value = f(theta);
  VectorXd g = finite_difference_gradient(f, theta);
  out.trace.push_back({0, value, g.norm()});
  out.status = FitStatus::MaxIterations;

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    if (g.norm() <= config.gradient_tolerance) {
      out.status = FitStatus::Converged;
      break;
    }

    // Two-loop recursion.
    VectorXd d = -g;
    std::vector<double> alpha(history.size());
    for (std::size_t k = history.size(); k-- > 0;) {
      alpha[k] = history[k].rho * history[k].s.dot(d);
      d -= alpha[k] * history[k].y;
    }
    if (!history.empty()) {
      const auto &last = history.back();
      d *= last.s.dot(last.y) / last.y.squaredNorm();
    } else {
      d /= std::max(1.0, g.norm());
    }
    for (std::size_t k = 0; k < history.size(); ++k) {
      const double beta = history[k].rho * history[k].y.dot(d);
      d += (alpha[k] - beta) * history[k].s;
    }
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      history.clear();
      d = -g / std::max(1.0, g.norm());
      slope = g.dot(d);
    }

    double step = 1.0;
    bool accepted = false;
    VectorXd next;
    double next_value = 0.0;
    for (int b = 0; b <= config.max_backtracks; ++b) {
      next = theta + step * d;
      next_value = f(next);
      if (next_value <= value + config.armijo * step * slope) {
        accepted = true;
        break;
      }
      step *= config.shrink;
    }
    if (!accepted) {
      out.status = FitStatus::LineSearchFailure;
      break;
    }

    const VectorXd next_g = finite_difference_gradient(f, next);
    Pair pair{next - theta, next_g - g, 0.0};
    const double sy = pair.s.dot(pair.y);
    if (sy > 1e-12 * pair.s.norm() * pair.y.norm()) {
      pair.rho = 1.0 / sy;
      history.push_back(std::move(pair));
      if (static_cast<int>(history.size()) > config.memory) {
        history.pop_front();
      }
    }
    theta = std::move(next);
    value = next_value;
    g = next_g;
    out.trace.push_back({iter, value, g.norm()});
  }
  if (out.status == FitStatus::MaxIterations &&
      g.norm() <= config.gradient_tolerance) {
    out.status = FitStatus::Converged;
  }
  out.theta = std::move(theta);
  out.objective = value;
  return out;
}

FitResult fit(const TrainingProblem &problem, const ParameterVector &init,
              const FitConfig &config) {
  TrainingProblem canonical = problem;
  canonical.data = canonical_order(problem.data);
  auto f = [&](const VectorXd &theta) {
    ParameterVector p = init;
    p.theta = theta;
    return objective(p, canonical);
  };
  auto r = minimize_lbfgs(f, init.theta, config);
  FitResult out;
  out.params = init;
  out.params.theta = std::move(r.theta);
  out.trace = std::move(r.trace);
  out.status = r.status;
  return out;
}

} // namespace stgp
