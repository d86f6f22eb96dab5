#pragma once

#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace phaselab {

// Worker count: explicit request > PHASELAB_THREADS > hardware concurrency.
int resolve_threads(int requested);

// Runs fn(block_index, begin, end) over [0, total) split into fixed-size
// blocks. Block boundaries are independent of the worker count, so per-block
// results reduced afterwards in block order are reproducible.
template <class Fn>
void for_blocks(std::uint64_t total, std::uint64_t block_size, int threads, Fn&& fn) {
  if (total == 0) return;
  if (block_size == 0) block_size = 1;
  const std::uint64_t n_blocks = (total + block_size - 1) / block_size;
  const auto run_block = [&](std::uint64_t b) {
    const std::uint64_t lo = b * block_size;
    const std::uint64_t hi = std::min(total, lo + block_size);
    fn(b, lo, hi);
  };
  if (threads <= 1 || n_blocks == 1) {
    for (std::uint64_t b = 0; b < n_blocks; ++b) run_block(b);
    return;
  }
  const unsigned n_workers =
      static_cast<unsigned>(std::min<std::uint64_t>(static_cast<std::uint64_t>(threads), n_blocks));
  std::atomic<std::uint64_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (unsigned w = 0; w < n_workers; ++w) {
    pool.emplace_back([&] {
      for (std::uint64_t b = next.fetch_add(1); b < n_blocks; b = next.fetch_add(1)) run_block(b);
    });
  }
  for (auto& t : pool) t.join();
}

inline std::uint64_t block_count(std::uint64_t total, std::uint64_t block_size) {
  if (total == 0) return 0;
  if (block_size == 0) block_size = 1;
  return (total + block_size - 1) / block_size;
}

}  // namespace phaselab
