#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace semifit {

/// Hardware concurrency, capped by the SEMIFIT_THREADS environment variable
/// when it holds a positive integer.
std::size_t worker_count();

/// Runs fn(0) .. fn(count - 1) on up to `threads` workers. Indices are handed
/// out dynamically; callers write results into per-index slots so the output
/// order never depends on scheduling. The first exception is rethrown after
/// all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                  std::size_t threads = worker_count());

/// Deterministic 64-bit stream derivation (splitmix64 of seed and index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace semifit
