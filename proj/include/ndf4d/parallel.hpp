#pragma once

#include <cstddef>
#include <functional>

namespace ndf4d {

/// Worker count used when callers pass 0.
int default_workers();

/// Runs fn(i) for i in [0, count) on up to `workers` threads (0 = default).
/// Tasks must write only to their own output slots; callers merge results in
/// index order, so output never depends on scheduling.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace ndf4d
