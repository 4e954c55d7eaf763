#include "kgroups/cpu_timer.hpp"

#include <time.h>

namespace kgroups {

namespace {
double read_clock(clockid_t id) {
  timespec ts{};
  clock_gettime(id, &ts);
  return static_cast<double>(ts.tv_sec) + static_cast<double>(ts.tv_nsec) * 1e-9;
}
}  // namespace

double cpu_seconds(CpuScope scope) {
  return read_clock(scope == CpuScope::Process ? CLOCK_PROCESS_CPUTIME_ID : CLOCK_THREAD_CPUTIME_ID);
}

double wall_seconds() { return read_clock(CLOCK_MONOTONIC); }

}  // namespace kgroups
