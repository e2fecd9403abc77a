#ifndef TMDECOMP_PARALLEL_HPP
#define TMDECOMP_PARALLEL_HPP

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "tmdecomp/common.hpp"

namespace tmdecomp {

/// Worker count for column-parallel loops. TMDECOMP_THREADS caps it; the
/// default is the hardware concurrency.
inline unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("TMDECOMP_THREADS")) {
    try {
      const long cap = std::stol(env);
      if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    } catch (const std::exception&) {
      // ignore unparsable values
    }
  }
  return n;
}

/// Calls body(begin, end) over disjoint contiguous chunks of [0, count).
/// Each index is visited by exactly one call, so results that only depend on
/// per-index work are identical for every thread count.
template <typename Body>
void parallel_chunks(Index count, Body&& body) {
  const unsigned workers =
      static_cast<unsigned>(std::min<Index>(worker_count(), std::max<Index>(count, 1)));
  if (workers <= 1 || count < 2) {
    body(Index{0}, count);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const Index chunk = (count + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const Index begin = w * chunk;
    const Index end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace tmdecomp

#endif  // TMDECOMP_PARALLEL_HPP
