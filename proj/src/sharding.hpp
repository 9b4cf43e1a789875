#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "uslab/parallel.hpp"
#include "uslab/rng.hpp"

namespace uslab::detail {

inline constexpr std::size_t kShardSize = 4096;

/// Splits `count` Monte Carlo draws into fixed-size shards. Shard s always
/// draws from substream s of `seed`, and per-shard accumulators are returned
/// in shard order, so the combined estimate is independent of thread count.
template <typename Acc, typename Fn>
std::vector<Acc> run_shards(std::size_t count, std::uint64_t seed, Fn&& fn) {
  const std::size_t shards = (count + kShardSize - 1) / kShardSize;
  const Rng root(seed);
  return parallel_map<Acc>(shards, [&](std::size_t s) {
    Rng rng = root.substream(static_cast<std::uint64_t>(s));
    const std::size_t begin = s * kShardSize;
    const std::size_t end = std::min(count, begin + kShardSize);
    return fn(rng, end - begin);
  });
}

}  // namespace uslab::detail
