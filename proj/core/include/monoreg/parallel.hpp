#pragma once

#include <cstddef>
#include <functional>

namespace monoreg {

/// Number of worker threads used when a caller passes 0: hardware concurrency, at least 1.
unsigned default_threads() noexcept;

/** Runs body(i) for i in [0, count) on up to `threads` workers (0 = default_threads()).
 *
 * Indices are handed out dynamically, so bodies must write only to slots owned by their index;
 * results are then independent of scheduling. The first exception thrown by a body is rethrown
 * on the calling thread after all workers stop.
 */
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace monoreg
