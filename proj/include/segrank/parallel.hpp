#pragma once

#include <cstdint>
#include <functional>

namespace segrank {

int default_jobs() noexcept;

// Runs body(i) for i in [0, count). With jobs <= 1 the loop is serial.
// Work items must write disjoint state; outputs are then independent of
// the schedule. The first exception thrown by any item is rethrown.
void parallel_for(std::int64_t count, int jobs,
                  const std::function<void(std::int64_t)>& body);

}  // namespace segrank
