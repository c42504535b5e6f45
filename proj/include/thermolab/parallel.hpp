#pragma once

#include <cstddef>
#include <functional>

namespace thermolab {

/// Worker count: THERMOLAB_THREADS if set, else hardware concurrency.
int thread_count();

/// Runs body(i) for i in [0, n) on up to thread_count() threads. Results must
/// be written by index so that output does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Pairwise (cascade) summation, independent of thread count.
double pairwise_sum(const double* x, std::size_t n);

}  // namespace thermolab
