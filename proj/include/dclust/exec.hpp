#pragma once

namespace dclust {

// Thread budget for the OpenMP kernels. Results never depend on it.
struct ExecPolicy {
  int threads = 1;  // <= 0 means the OpenMP default
};

int thread_count(const ExecPolicy& exec);

}  // namespace dclust
