#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace gweave::detail {

inline unsigned resolve_threads(unsigned requested, std::uint64_t work) {
  unsigned t = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  const std::uint64_t useful = work / 256 + 1;
  return static_cast<unsigned>(std::min<std::uint64_t>(t, useful));
}

/// Splits [0, total) into contiguous chunks, one per worker, and calls
/// fn(chunk, begin, end). Chunk c covers a range below chunk c + 1, so a merge
/// that walks chunks in order sees items in increasing order.
template <class Fn>
void parallel_chunks(std::uint64_t total, unsigned threads, Fn&& fn) {
  const unsigned workers = resolve_threads(threads, total);
  if (workers <= 1) {
    fn(0u, std::uint64_t{0}, total);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  for (unsigned c = 0; c < workers; ++c) {
    const std::uint64_t begin = total * c / workers;
    const std::uint64_t end = total * (c + 1) / workers;
    pool.emplace_back([&, c, begin, end] {
      try {
        fn(c, begin, end);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline unsigned chunk_count(unsigned threads, std::uint64_t total) {
  return std::max(1u, resolve_threads(threads, total));
}

}  // namespace gweave::detail
