#ifndef ECCBF_KERNELS_HPP
#define ECCBF_KERNELS_HPP

// Data-parallel loop drivers. Every hot loop in the library (boundary tracing,
// covering-radius probes, constraint rows, grid scans) goes through one of
// these, so each has an OpenMP path and a plain serial reference path that
// the tests compare against. Reductions only use min/max with lowest-index
// tie-breaking, so both paths give bit-identical results.

#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace eccbf::kernels {

enum class Exec { Serial, Parallel };

struct IndexedValue {
  double value;
  std::size_t index;
};

namespace detail {

inline bool better_max(const IndexedValue& a, const IndexedValue& b) {
  return a.value > b.value || (a.value == b.value && a.index < b.index);
}

inline int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline int thread_id() {
#ifdef _OPENMP
  return omp_get_thread_num();
#else
  return 0;
#endif
}

}  // namespace detail

/// Calls body(i) for i in [0, n). body must only write to slot i of its output.
template <class Body>
void for_each_index(std::size_t n, Body&& body, Exec exec = Exec::Parallel) {
  const auto count = static_cast<std::ptrdiff_t>(n);
  if (exec == Exec::Serial) {
    for (std::ptrdiff_t i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
    return;
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
}

/// Maximum of f(i) over [0, n) and the lowest index attaining it.
/// Returns {-inf, n} for n == 0.
template <class F>
IndexedValue argmax(std::size_t n, F&& f, Exec exec = Exec::Parallel) {
  IndexedValue best{-std::numeric_limits<double>::infinity(), n};
  const auto count = static_cast<std::ptrdiff_t>(n);
  if (exec == Exec::Serial) {
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      const IndexedValue c{f(static_cast<std::size_t>(i)), static_cast<std::size_t>(i)};
      if (detail::better_max(c, best)) best = c;
    }
    return best;
  }
  std::vector<IndexedValue> local(static_cast<std::size_t>(detail::thread_count()), best);
#pragma omp parallel
  {
    IndexedValue mine = best;
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      const IndexedValue c{f(static_cast<std::size_t>(i)), static_cast<std::size_t>(i)};
      if (detail::better_max(c, mine)) mine = c;
    }
    local[static_cast<std::size_t>(detail::thread_id())] = mine;
  }
  for (const auto& c : local)
    if (detail::better_max(c, best)) best = c;
  return best;
}

/// Minimum of f(i) over [0, n) and the lowest index attaining it.
template <class F>
IndexedValue argmin(std::size_t n, F&& f, Exec exec = Exec::Parallel) {
  IndexedValue r = argmax(n, [&](std::size_t i) { return -f(i); }, exec);
  r.value = -r.value;
  return r;
}

}  // namespace eccbf::kernels

#endif  // ECCBF_KERNELS_HPP
