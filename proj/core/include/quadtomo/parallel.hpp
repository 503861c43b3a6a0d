#pragma once

#include <cstddef>
#include <functional>

namespace quadtomo {

// Number of workers to use when the caller passes 0.
unsigned defaultThreadCount();

// Runs body(i) for i in [0, count) on up to `threads` workers. Each index is
// processed exactly once; results must be written to per-index slots so the
// outcome does not depend on scheduling. The first exception is rethrown.
void parallelFor(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace quadtomo
