#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace pdet {

/// Partitions [0, count) into contiguous chunks, one per worker thread, and
/// runs body(chunk_index, begin, end) on each. Results must be merged by the
/// caller from per-chunk state so the outcome is independent of scheduling.
/// The first exception thrown by any chunk is rethrown on the calling thread
/// after all workers join. min_per_thread guards against spawning threads
/// for trivially small jobs; pass 1 when individual items are expensive.
template <typename Body>
void parallel_chunks(std::uint64_t count, Body&& body, unsigned max_threads = 0,
                     std::uint64_t min_per_thread = 4096) {
  unsigned n_threads = max_threads ? max_threads : std::thread::hardware_concurrency();
  if (n_threads == 0) n_threads = 1;
  while (n_threads > 1 && count < min_per_thread * n_threads) --n_threads;
  const std::uint64_t chunk = (count + n_threads - 1) / n_threads;
  std::vector<std::thread> workers;
  workers.reserve(n_threads);
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (unsigned i = 0; i < n_threads; ++i) {
    const std::uint64_t begin = static_cast<std::uint64_t>(i) * chunk;
    if (begin >= count) break;
    const std::uint64_t end = std::min<std::uint64_t>(begin + chunk, count);
    workers.emplace_back([&, i, begin, end] {
      try {
        body(i, begin, end);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace pdet
