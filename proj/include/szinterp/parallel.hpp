// Execution mode for the data-parallel kernels.  Every parallel loop in the
// library writes disjoint slots, and every reduction accumulates per-item
// partials in index order, so the serial and OpenMP paths produce identical
// bits.  The serial path is the reference implementation used in tests and
// the benchmark.

#pragma once

#include <cstddef>
#include <numeric>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace szinterp {

enum class ExecMode { Serial, OpenMP };

ExecMode exec_mode();
void set_exec_mode(ExecMode mode);

/// Runs fn(i) for i in [0, n).  Iterations must not share mutable state.
/// Loops below the grain size stay serial.
template <typename F>
void parallel_for(std::ptrdiff_t n, F&& fn) {
#ifdef _OPENMP
  constexpr std::ptrdiff_t grain = 32;
  if (n >= grain && exec_mode() == ExecMode::OpenMP) {
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < n; ++i) fn(i);
    return;
  }
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) fn(i);
}

/// Deterministic sum of fn(i): partials are computed in parallel and reduced
/// in index order regardless of the execution mode or thread count.
template <typename F>
double parallel_sum(std::ptrdiff_t n, F&& fn) {
  std::vector<double> partial(static_cast<std::size_t>(n), 0.0);
  parallel_for(n, [&](std::ptrdiff_t i) { partial[static_cast<std::size_t>(i)] = fn(i); });
  return std::accumulate(partial.begin(), partial.end(), 0.0);
}

}  // namespace szinterp
