#pragma once

#include <cstddef>
#include <functional>

namespace mapperscope {

/// Number of worker threads used by parallel_for. 0 means hardware concurrency.
void set_thread_count(std::size_t threads);
std::size_t thread_count();

/// Runs body(i) for every i in [begin, end). Iterations are handed out
/// dynamically; body must only write to state owned by index i so results do
/// not depend on scheduling.
void parallel_for(std::size_t begin, std::size_t end, const std::function<void(std::size_t)>& body);

}  // namespace mapperscope
