#pragma once

#include <cstddef>
#include <functional>

namespace nvscat {

// Runs fn(i) for i in [0, n) on up to `threads` workers. Work is claimed
// dynamically; callers write results by index so output order is fixed.
// The first exception thrown by any worker is rethrown after joining.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace nvscat
