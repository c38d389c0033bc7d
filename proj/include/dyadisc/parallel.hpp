#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace dyadisc {

// Worker-count resolution: an explicit request wins, then the
// DYADISC_THREADS environment variable, then the hardware hint.
// Always at least 1.
inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("DYADISC_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v <= 1024)
      return static_cast<unsigned>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

// Items per reduction block.  Fixed independently of the worker count so
// that the block decomposition, and hence any fold over the per-block
// results, is identical for every thread configuration.
inline constexpr std::uint64_t kBlockSize = 32;

// Runs fn(lo, hi, block) over consecutive blocks covering [0, total) and
// returns the per-block results in block order.  Workers pull block
// indices from a shared counter; the caller folds the returned vector
// sequentially, so the reduction order never depends on scheduling.
// If blocks throw, the exception from the lowest block index is rethrown.
template <class R, class Fn>
std::vector<R> map_blocks(std::uint64_t total, unsigned threads, Fn&& fn) {
  const std::uint64_t nblocks = total == 0 ? 0 : (total - 1) / kBlockSize + 1;
  std::vector<R> results(nblocks);
  if (nblocks == 0) return results;

  auto run = [&](std::uint64_t b) {
    const std::uint64_t lo = b * kBlockSize;
    const std::uint64_t hi = std::min(total, lo + kBlockSize);
    results[b] = fn(lo, hi, b);
  };

  const unsigned workers = static_cast<unsigned>(
      std::min<std::uint64_t>(resolve_threads(threads), nblocks));
  if (workers <= 1) {
    for (std::uint64_t b = 0; b < nblocks; ++b) run(b);
    return results;
  }

  std::atomic<std::uint64_t> next{0};
  std::vector<std::exception_ptr> errors(nblocks);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::uint64_t b = next.fetch_add(1);
        if (b >= nblocks) return;
        try {
          run(b);
        } catch (...) {
          errors[b] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

}  // namespace dyadisc
