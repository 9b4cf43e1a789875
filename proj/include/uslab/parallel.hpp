#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace uslab {

/// Worker count used by sharded evaluation and experiment sweeps.
/// 0 means "auto": USLAB_THREADS if set, otherwise hardware concurrency.
void set_thread_count(unsigned count);
unsigned thread_count();

/// Runs task(i) for i in [0, count) on up to thread_count() workers.
/// Each index is executed exactly once; callers write into index-addressed
/// slots so results never depend on scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task);

template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t count, Fn&& fn) {
  std::vector<T> out(count);
  parallel_for(count, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

}  // namespace uslab
