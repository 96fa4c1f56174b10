#pragma once

#include <cstddef>
#include <functional>

namespace adcprune {

/// Worker count to use when a config asks for 0 ("auto").
int default_workers();

/// Runs fn(0..n-1) on up to `workers` threads and returns after all calls
/// finish. The first exception thrown by any call is rethrown here.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace adcprune
