#include "stgp/parallel.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>

namespace stgp {

namespace {

std::atomic<int> override_limit{0};

int env_limit() {
  const char *v = std::getenv("STGP_THREADS");
  if (v == nullptr) {
    return 0;
  }
  try {
    return std::max(0, std::stoi(v));
  } catch (...) {
    return 0;
  }
}

} // namespace

int thread_limit() {
  if (const int o = override_limit.load(); o > 0) {
    return o;
  }
  const int hw = std::max(1, omp_get_max_threads());
  const int env = env_limit();
  return env > 0 ? std::min(env, hw) : hw;
}

void set_thread_limit(int threads) { override_limit.store(std::max(0, threads)); }

} // namespace stgp
