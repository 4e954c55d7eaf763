#pragma once

#include <utility>

namespace kgroups {

/// Which threads a CPU-time measurement is charged to.
///  - Process: user+system time of every thread in the process, including
///    workers the measured block spawns (and anything else running meanwhile).
///  - Thread: only the calling thread; used for per-cell timing inside a
///    concurrent sweep so unrelated cells are never counted.
enum class CpuScope { Process, Thread };

double cpu_seconds(CpuScope scope);
double wall_seconds();

class CpuTimer {
 public:
  explicit CpuTimer(CpuScope scope = CpuScope::Process) : scope_(scope), start_(cpu_seconds(scope)) {}
  [[nodiscard]] double elapsed() const { return cpu_seconds(scope_) - start_; }
  void restart() { start_ = cpu_seconds(scope_); }

 private:
  CpuScope scope_;
  double start_;
};

/// CPU seconds consumed by `block`; never negative.
template <typename Block>
double cpu_timer(Block&& block, CpuScope scope = CpuScope::Process) {
  CpuTimer timer(scope);
  std::forward<Block>(block)();
  const double t = timer.elapsed();
  return t > 0.0 ? t : 0.0;
}

}  // namespace kgroups
