#pragma once

#include <cstddef>
#include <vector>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace pairsim {

// Execution mode for the data-parallel kernels. The serial path is the
// reference implementation; the OpenMP path must produce bit-identical
// results, which the tests enforce.
enum class Exec { Serial, OpenMP };

inline Exec& exec_mode() {
  static Exec mode = Exec::OpenMP;
  return mode;
}

// Parallel loop over [0, n). The body must only write to disjoint state
// per index.
template <typename F>
void parallel_for(std::size_t n, F&& body, Exec mode) {
  if (mode == Exec::OpenMP) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      body(static_cast<std::size_t>(i));
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) body(i);
  }
}

template <typename F>
void parallel_for(std::size_t n, F&& body) {
  parallel_for(n, body, exec_mode());
}

// Deterministic sum of n per-index terms: partial sums are accumulated
// per index in parallel, then combined in index order. The result does
// not depend on the thread count, so OpenMP and serial runs are
// bit-identical.
template <typename F>
double deterministic_sum(std::size_t n, F&& term, Exec mode) {
  std::vector<double> partial(n);
  parallel_for(
      n, [&](std::size_t i) { partial[i] = term(i); }, mode);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += partial[i];
  return acc;
}

template <typename F>
double deterministic_sum(std::size_t n, F&& term) {
  return deterministic_sum(n, term, exec_mode());
}

}  // namespace pairsim
