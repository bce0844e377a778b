#pragma once

namespace stgp {

/// Thread budget for the OpenMP kernels: the STGP_THREADS environment
/// variable caps it, set_thread_limit overrides it (0 restores the default).
int thread_limit();
void set_thread_limit(int threads);

} // namespace stgp
