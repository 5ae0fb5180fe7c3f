#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace gausscov {

// Upper bound on worker threads from the GAUSSCOV_THREADS environment
// variable; 0 when unset or unparsable.
inline std::size_t env_thread_cap() {
  const char* raw = std::getenv("GAUSSCOV_THREADS");
  if (raw == nullptr) return 0;
  try {
    const long v = std::stol(raw);
    return v > 0 ? static_cast<std::size_t>(v) : 0;
  } catch (...) {
    return 0;
  }
}

// `requested` of 0 means "use the hardware". The environment cap applies
// either way.
inline std::size_t resolve_threads(std::size_t requested) {
  std::size_t t = requested;
  if (t == 0) t = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  if (const std::size_t cap = env_thread_cap(); cap > 0) t = std::min(t, cap);
  return std::max<std::size_t>(1, t);
}

// Splits [begin, end) into at most `threads` contiguous blocks of at least
// `min_block` items and calls body(lo, hi, block_index) for each. Blocks run
// on their own threads except the first, which runs on the caller. The first
// exception thrown by any block is rethrown after all blocks finish.
template <class Body>
void parallel_blocks(std::size_t begin, std::size_t end, std::size_t threads,
                     std::size_t min_block, Body&& body) {
  if (end <= begin) return;
  const std::size_t count = end - begin;
  std::size_t blocks = std::max<std::size_t>(1, std::min(threads, count / std::max<std::size_t>(1, min_block)));
  if (blocks <= 1) {
    body(begin, end, std::size_t{0});
    return;
  }
  const std::size_t step = (count + blocks - 1) / blocks;
  blocks = (count + step - 1) / step;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&](std::size_t b) {
    const std::size_t lo = begin + b * step;
    const std::size_t hi = std::min(end, lo + step);
    try {
      body(lo, hi, b);
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };
  std::vector<std::thread> workers;
  workers.reserve(blocks - 1);
  for (std::size_t b = 1; b < blocks; ++b) workers.emplace_back(run, b);
  run(0);
  for (auto& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);
}

// Block count parallel_blocks will use for the same arguments.
inline std::size_t block_count(std::size_t count, std::size_t threads, std::size_t min_block) {
  if (count == 0) return 0;
  std::size_t blocks = std::max<std::size_t>(1, std::min(threads, count / std::max<std::size_t>(1, min_block)));
  const std::size_t step = (count + blocks - 1) / blocks;
  return (count + step - 1) / step;
}

}  // namespace gausscov
