#pragma once

#include <cstddef>
#include <functional>

namespace donet {

// Worker count for per-sample loops. Reductions never depend on it: partial
// results are always combined in sample order.
void set_num_threads(int n);
int num_threads();

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace donet
