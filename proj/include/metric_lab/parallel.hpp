#pragma once

#include <cstddef>
#include <functional>

namespace metric_lab {

/// Number of worker threads used by per-point loops. Defaults to 1.
void set_worker_count(unsigned workers);
unsigned worker_count();

/// Runs body(i) for i in [0, n), partitioned into contiguous chunks across
/// worker_count() threads. Each index is visited exactly once; results must
/// be written to disjoint slots so the outcome is partition-independent.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace metric_lab
