#include "dclust/exec.hpp"

#include <omp.h>

namespace dclust {

int thread_count(const ExecPolicy& exec) { return exec.threads > 0 ? exec.threads : omp_get_max_threads(); }

}  // namespace dclust
