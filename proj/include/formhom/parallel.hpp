#ifndef FORMHOM_PARALLEL_HPP
#define FORMHOM_PARALLEL_HPP

#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace formhom {

/// Runs fn(i) for i in [0,n).  Each index writes only its own output slot,
/// so results are identical for every thread count; reductions must happen
/// afterwards in fixed index order.
template <typename Fn>
void parallelFor(std::size_t n, int threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  int nt = static_cast<int>(std::min<std::size_t>(threads, n));
  std::vector<std::exception_ptr> errs(nt);
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([&, t]() {
      try {
        for (std::size_t i = t; i < n; i += nt) fn(i);
      } catch (...) {
        errs[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

int defaultThreads();  // FORMHOM_THREADS env var, else 1

}  // namespace formhom

#endif
