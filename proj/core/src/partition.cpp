#include "sdca/partition.hpp"

#include <bit>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sdca {

std::size_t compute_bucket_size(std::size_t cache_line_bytes, std::size_t entry_bytes) {
  if (!std::has_single_bit(cache_line_bytes) || !std::has_single_bit(entry_bytes) ||
      cache_line_bytes < entry_bytes) {
    throw std::invalid_argument("bucket size: cache line " + std::to_string(cache_line_bytes) +
                                "B is not a power-of-two multiple of entry size " +
                                std::to_string(entry_bytes) + "B");
  }
  return cache_line_bytes / entry_bytes;
}

bool buckets_enabled(std::size_t n, std::optional<std::size_t> llc_bytes, std::size_t entry_bytes) {
  if (!llc_bytes) return n > kBucketFallbackEntries;
  return n * entry_bytes > *llc_bytes;
}

BucketPlan::BucketPlan(std::size_t n, std::size_t bucket_size) : n_(n), bucket_size_(bucket_size) {
  if (bucket_size == 0) throw std::invalid_argument("bucket plan: bucket size must be >= 1");
  const std::size_t count = n == 0 ? 0 : (n + bucket_size - 1) / bucket_size;
  if (count > std::numeric_limits<std::uint32_t>::max()) {
    throw std::invalid_argument("bucket plan: too many buckets");
  }
  order_.resize(count);
  std::iota(order_.begin(), order_.end(), std::uint32_t{0});
}

std::vector<IndexRange> static_partition(std::size_t num_items, std::size_t k) {
  if (k == 0) throw std::invalid_argument("static partition: need at least one part");
  std::vector<IndexRange> parts(k);
  const std::size_t base = num_items / k;
  const std::size_t extra = num_items % k;
  std::size_t begin = 0;
  for (std::size_t t = 0; t < k; ++t) {
    const std::size_t len = base + (t < extra ? 1 : 0);
    parts[t] = {begin, begin + len};
    begin += len;
  }
  return parts;
}

}  // namespace sdca
