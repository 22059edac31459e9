#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "sdca/rng.hpp"

namespace sdca {

/// Model entries that share one cache line. Both arguments must be powers of
/// two with cache_line_bytes >= entry_bytes.
std::size_t compute_bucket_size(std::size_t cache_line_bytes, std::size_t entry_bytes);

/// Entry count used as the last-level-cache cut-off when the LLC size is unknown.
inline constexpr std::size_t kBucketFallbackEntries = 500'000;

/// Bucketing pays off only when the model vector spills out of the LLC.
bool buckets_enabled(std::size_t n, std::optional<std::size_t> llc_bytes, std::size_t entry_bytes);

/// In-place Fisher-Yates shuffle driven by Rng::uniform_index.
template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto k = static_cast<std::size_t>(rng.uniform_index(i));
    std::swap(items[i - 1], items[k]);
  }
}

struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool operator==(const IndexRange&) const = default;
};

/// Groups consecutive examples into buckets and keeps the epoch's bucket order.
/// bucket_size == 1 degenerates to per-example shuffling.
class BucketPlan {
 public:
  BucketPlan(std::size_t n, std::size_t bucket_size);

  std::size_t n() const { return n_; }
  std::size_t bucket_size() const { return bucket_size_; }
  std::size_t num_buckets() const { return order_.size(); }

  /// Example indices covered by bucket b.
  IndexRange bucket(std::size_t b) const {
    const std::size_t begin = b * bucket_size_;
    return {begin, std::min(begin + bucket_size_, n_)};
  }

  std::span<const std::uint32_t> order() const { return order_; }
  std::span<std::uint32_t> order() { return order_; }

  void shuffle(Rng& rng) { sdca::shuffle(std::span<std::uint32_t>(order_), rng); }

 private:
  std::size_t n_;
  std::size_t bucket_size_;
  std::vector<std::uint32_t> order_;
};

/// Splits [0, num_items) into k contiguous ranges whose sizes differ by at most
/// one; the first (num_items mod k) ranges get the extra item.
std::vector<IndexRange> static_partition(std::size_t num_items, std::size_t k);

/// Shared claim cursor over one epoch's bucket order. claim_next is a single
/// fetch_add, so it is linearizable and no thread can block another.
class WorkQueue {
 public:
  explicit WorkQueue(std::span<const std::uint32_t> order) : order_(order) {}

  WorkQueue(const WorkQueue&) = delete;
  WorkQueue& operator=(const WorkQueue&) = delete;

  /// Next unclaimed bucket, or nullopt once the order is exhausted.
  std::optional<std::uint32_t> claim_next() {
    if (cursor_.load(std::memory_order_relaxed) >= order_.size()) return std::nullopt;
    const std::size_t slot = cursor_.fetch_add(1, std::memory_order_relaxed);
    if (slot >= order_.size()) return std::nullopt;
    return order_[slot];
  }

  /// Rearm for a new epoch; must not race with claim_next.
  void reset(std::span<const std::uint32_t> order) {
    order_ = order;
    cursor_.store(0, std::memory_order_relaxed);
  }

 private:
  std::span<const std::uint32_t> order_;
  alignas(64) std::atomic<std::size_t> cursor_{0};
};

}  // namespace sdca
