#include "stgp/lgssm.hpp"

#include <random>
#include <string>

namespace stgp {

LinearGaussianConditional Emission::composed() const {
  if (!bottleneck) {
    return model;
  }
  return {model.A * bottleneck->H, model.A * bottleneck->h + model.a,
          model.Q};
}

void Lgssm::validate() const {
  if (x0.cov.rows() != x0.mean.size() || x0.cov.cols() != x0.mean.size()) {
    throw DimensionMismatch("initial state covariance does not match mean");
  }
  Eigen::Index dim = x0.mean.size();
  for (std::size_t t = 0; t < steps.size(); ++t) {
    const auto &s = steps[t];
    const auto where = " at step " + std::to_string(t);
    if (s.transition.A.cols() != dim) {
      throw DimensionMismatch("transition input dimension" + where);
    }
    dim = s.transition.A.rows();
    if (s.transition.a.size() != dim || s.transition.Q.rows() != dim ||
        s.transition.Q.cols() != dim) {
      throw DimensionMismatch("transition offset or noise" + where);
    }
    const auto &e = s.emission;
    const auto in = e.bottleneck ? e.bottleneck->H.cols() : e.model.A.cols();
    if (in != dim) {
      throw DimensionMismatch("emission input dimension" + where);
    }
    if (e.bottleneck && (e.bottleneck->H.rows() != e.model.A.cols() ||
                         e.bottleneck->h.size() != e.bottleneck->H.rows())) {
      throw DimensionMismatch("emission bottleneck" + where);
    }
    if (s.y.size() != e.model.A.rows() || e.model.a.size() != s.y.size() ||
        e.model.Q.rows() != s.y.size() || e.model.Q.cols() != s.y.size()) {
      throw DimensionMismatch("observation vector" + where);
    }
  }
}

namespace {

bool strictly_positive_diagonal(const MatrixXd &Q) {
  return is_diagonal(Q) && (Q.diagonal().array() > 0.0).all();
}

InferenceResult update(const Gaussian &predicted, const Emission &e,
                       const VectorXd &y, UpdateMethod method) {
  switch (method) {
  case UpdateMethod::Naive:
    return naive_inference(predicted, e.composed(), y);
  case UpdateMethod::LowRank:
    return low_rank_inference(predicted, e.composed(), y);
  case UpdateMethod::Bottleneck:
    if (!e.bottleneck) {
      return low_rank_inference(predicted, e.composed(), y);
    }
    return bottleneck_inference(predicted, e.bottleneck->H, e.bottleneck->h,
                                e.model, y);
  case UpdateMethod::Auto:
    break;
  }
  if (!strictly_positive_diagonal(e.model.Q)) {
    return naive_inference(predicted, e.composed(), y);
  }
  if (e.bottleneck) {
    return bottleneck_inference(predicted, e.bottleneck->H, e.bottleneck->h,
                                e.model, y);
  }
  return low_rank_inference(predicted, e.composed(), y);
}

Gaussian predict(const Gaussian &g, const LinearGaussianConditional &tr) {
  Gaussian p;
  p.mean = tr.A * g.mean + tr.a;
  p.cov = tr.A * g.cov * tr.A.transpose() + tr.Q;
  symmetrize(p.cov);
  return p;
}

double run_filter(const Lgssm &model, std::vector<Gaussian> *filtered,
                  std::vector<Gaussian> *predicted,
                  std::vector<double> *step_lml) {
  model.validate();
  Gaussian state = model.x0;
  double lml = 0.0;
  for (std::size_t t = 0; t < model.steps.size(); ++t) {
    const auto &s = model.steps[t];
    Gaussian pred = predict(state, s.transition);
    InferenceResult r;
    try {
      r = update(pred, s.emission, s.y, model.method);
    } catch (const CholeskyFailure &err) {
      throw CholeskyFailure(err.what(), t);
    }
    lml += r.lml;
    if (step_lml) {
      step_lml->push_back(r.lml);
    }
    if (predicted) {
      predicted->push_back(std::move(pred));
    }
    state = std::move(r.posterior);
    if (filtered) {
      filtered->push_back(state);
    }
  }
  return lml;
}

Gaussian emit(const Gaussian &state, const Emission &e) {
  const auto c = e.composed();
  Gaussian g;
  g.mean = c.A * state.mean + c.a;
  g.cov = c.A * state.cov * c.A.transpose();
  symmetrize(g.cov);
  return g;
}

} // namespace

FilterResult filter(const Lgssm &model) {
  FilterResult r;
  r.filtered.reserve(model.size());
  r.step_lml.reserve(model.size());
  r.lml = run_filter(model, &r.filtered, nullptr, &r.step_lml);
  return r;
}

double log_marginal_likelihood(const Lgssm &model) {
  return run_filter(model, nullptr, nullptr, nullptr);
}

PosteriorMarginals smooth(const Lgssm &model) {
  std::vector<Gaussian> filtered;
  std::vector<Gaussian> predicted;
  run_filter(model, &filtered, &predicted, nullptr);

  PosteriorMarginals out;
  const auto T = model.size();
  out.states.resize(T);
  if (T == 0) {
    return out;
  }
  out.states[T - 1] = filtered[T - 1];
  for (std::size_t k = T - 1; k-- > 0;) {
    const auto &A = model.steps[k + 1].transition.A;
    const auto &f = filtered[k];
    const auto &p = predicted[k + 1];
    const auto &next = out.states[k + 1];
    MatrixXd J;
    try {
      J = cholesky(p.cov).solve(A * f.cov).transpose();
    } catch (const CholeskyFailure &err) {
      throw CholeskyFailure(err.what(), k + 1);
    }
    Gaussian s;
    s.mean = f.mean + J * (next.mean - p.mean);
    s.cov = f.cov + J * (next.cov - p.cov) * J.transpose();
    symmetrize(s.cov);
    out.states[k] = std::move(s);
  }
  out.emitted.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    out.emitted.push_back(emit(out.states[t], model.steps[t].emission));
  }
  return out;
}

std::vector<Gaussian> prior_marginals(const Lgssm &model) {
  model.validate();
  std::vector<Gaussian> out;
  out.reserve(model.size());
  Gaussian state = model.x0;
  for (const auto &s : model.steps) {
    state = predict(state, s.transition);
    out.push_back(state);
  }
  return out;
}

Sample sample(const Lgssm &model, std::uint64_t seed) {
  model.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&](Eigen::Index n) {
    VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      z(i) = normal(rng);
    }
    return z;
  };

  Sample out;
  VectorXd x = model.x0.mean + psd_factor(model.x0.cov) * draw(model.x0.dim());
  for (const auto &s : model.steps) {
    const auto &tr = s.transition;
    x = tr.A * x + tr.a + psd_factor(tr.Q) * draw(tr.A.rows());
    const auto e = s.emission.composed();
    VectorXd y = e.A * x + e.a + psd_factor(e.Q) * draw(e.A.rows());
    out.states.push_back(x);
    out.observations.push_back(std::move(y));
  }
  return out;
}

} // namespace stgp
