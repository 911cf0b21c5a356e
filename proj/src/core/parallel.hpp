#pragma once

#include <cstddef>
#include <functional>

namespace metastab {

/// Worker count: hardware concurrency capped by METASTAB_THREADS.
std::size_t worker_count();

/// Runs body(i) for i in [0, count). Callers write results into
/// pre-allocated slots indexed by i and reduce them in index order, so
/// outputs do not depend on the number of workers. The exception of the
/// lowest failing index is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace metastab
