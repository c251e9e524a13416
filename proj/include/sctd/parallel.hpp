#pragma once

#include <cstddef>
#include <functional>

namespace sctd {

// Number of worker threads: SCTD_THREADS env var, 0 or unset = hardware auto.
std::size_t thread_count();

// Runs fn(i) for i in [0, n). Work items must be independent; results must be
// written to pre-sized slots so the outcome does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace sctd
