#include <benchmark/benchmark.h>

#include <random>

#include "stgp/linalg.hpp"
#include "stgp/parallel.hpp"
#include "stgp/pseudo_point.hpp"
#include "stgp/training.hpp"

namespace {

using namespace stgp;

struct Instance {
  SumSeparableKernel kernel;
  PseudoInputs z;
  TimeGroupedData data;
};

Instance make_instance(int T, int n_t, int m) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> loc(0.0, 10.0);
  std::normal_distribution<double> normal;
  Instance inst;
  inst.kernel.components.push_back(
      {SpatialKernel{VectorXd::Constant(1, 1.0 / 0.9), 0.92},
       TemporalSdeKernel(MaternOrder::ThreeHalves, 1.2)});
  VectorXd times(T);
  for (int k = 0; k < T; ++k) {
    TimeBucket b;
    b.time = 0.1 * k;
    times(k) = b.time;
    b.X.resize(n_t, 1);
    b.y.resize(n_t);
    b.noise = VectorXd::Constant(n_t, 0.1);
    for (int i = 0; i < n_t; ++i) {
      b.X(i, 0) = loc(rng);
      b.y(i) = normal(rng);
    }
    inst.data.buckets.push_back(std::move(b));
  }
  Points z(m, 1);
  for (int i = 0; i < m; ++i) {
    z(i, 0) = 10.0 * i / std::max(1, m - 1);
  }
  inst.z = PseudoInputs::shared(z, times);
  return inst;
}

void BM_ProjectionSerial(benchmark::State &state) {
  const auto inst = make_instance(static_cast<int>(state.range(0)), 50, 20);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        detail::projection_matrices_serial(inst.kernel, inst.z, inst.data));
  }
}
BENCHMARK(BM_ProjectionSerial)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_ProjectionParallel(benchmark::State &state) {
  const auto inst = make_instance(static_cast<int>(state.range(0)), 50, 20);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        detail::projection_matrices_parallel(inst.kernel, inst.z, inst.data));
  }
  state.counters["threads"] = thread_limit();
}
BENCHMARK(BM_ProjectionParallel)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_Elbo(benchmark::State &state) {
  const auto inst = make_instance(static_cast<int>(state.range(0)), 10, 10);
  for (auto _ : state) {
    benchmark::DoNotOptimize(elbo(inst.kernel, inst.z, inst.data));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Elbo)->RangeMultiplier(2)->Range(128, 1024)->Complexity(benchmark::oN)
    ->Unit(benchmark::kMillisecond);

// Finite-difference gradient of the training objective at 1 thread
// (argument 1) and at the default thread count (argument 0).
void BM_Gradient(benchmark::State &state) {
  const auto inst = make_instance(100, 10, 10);
  const TrainingProblem problem{inst.data, inst.z, {MaternOrder::ThreeHalves}};
  const auto params = pack_parameters(inst.kernel, 0.1);
  set_thread_limit(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(gradient(params, problem));
  }
  set_thread_limit(0);
}
BENCHMARK(BM_Gradient)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

// One emission update with D_x = 3M, D_z = M, D_y = 10M.
struct UpdateInstance {
  Gaussian prior;
  MatrixXd H;
  LinearGaussianConditional obs;
  LinearGaussianConditional composed;
  VectorXd y;
};

UpdateInstance make_update(int m) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  auto random = [&](Eigen::Index r, Eigen::Index c) {
    MatrixXd out(r, c);
    for (Eigen::Index j = 0; j < c; ++j) {
      for (Eigen::Index i = 0; i < r; ++i) {
        out(i, j) = normal(rng);
      }
    }
    return out;
  };
  const int dx = 3 * m;
  const int dz = m;
  const int dy = 10 * m;
  UpdateInstance u;
  const MatrixXd G = random(dx, dx);
  u.prior.mean = random(dx, 1);
  u.prior.cov = G * G.transpose() / dx + MatrixXd::Identity(dx, dx);
  u.H = MatrixXd::Zero(dz, dx);
  for (int i = 0; i < dz; ++i) {
    u.H(i, 3 * i) = 1.0;
  }
  u.obs = LinearGaussianConditional::diagonal(random(dy, dz), VectorXd::Zero(dy),
                                              VectorXd::Constant(dy, 0.5));
  u.composed = {u.obs.A * u.H, u.obs.a, u.obs.Q};
  u.y = random(dy, 1);
  return u;
}

void BM_NaiveUpdate(benchmark::State &state) {
  const auto u = make_update(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(naive_inference(u.prior, u.composed, u.y));
  }
}
BENCHMARK(BM_NaiveUpdate)->Arg(10)->Arg(25)->Arg(50)->Arg(100)
    ->Unit(benchmark::kMillisecond);

void BM_LowRankUpdate(benchmark::State &state) {
  const auto u = make_update(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(low_rank_inference(u.prior, u.composed, u.y));
  }
}
BENCHMARK(BM_LowRankUpdate)->Arg(10)->Arg(25)->Arg(50)->Arg(100)
    ->Unit(benchmark::kMillisecond);

void BM_BottleneckUpdate(benchmark::State &state) {
  const auto u = make_update(static_cast<int>(state.range(0)));
  const VectorXd h = VectorXd::Zero(u.H.rows());
  for (auto _ : state) {
    benchmark::DoNotOptimize(bottleneck_inference(u.prior, u.H, h, u.obs, u.y));
  }
}
BENCHMARK(BM_BottleneckUpdate)->Arg(10)->Arg(25)->Arg(50)->Arg(100)
    ->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
