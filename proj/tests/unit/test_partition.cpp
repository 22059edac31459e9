#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <map>
#include <numeric>
#include <thread>

#include "sdca/partition.hpp"

using namespace sdca;

TEST(BucketSize, Examples) {
  EXPECT_EQ(compute_bucket_size(64, 8), 8u);
  EXPECT_EQ(compute_bucket_size(128, 8), 16u);
  EXPECT_EQ(compute_bucket_size(8, 8), 1u);
  EXPECT_THROW(compute_bucket_size(4, 8), std::invalid_argument);
  EXPECT_THROW(compute_bucket_size(96, 8), std::invalid_argument);
  EXPECT_THROW(compute_bucket_size(64, 0), std::invalid_argument);
}

TEST(BucketsEnabled, Examples) {
  EXPECT_FALSE(buckets_enabled(1000, 32u << 20, 8));
  EXPECT_TRUE(buckets_enabled(10'000'000, 32u << 20, 8));
  EXPECT_FALSE(buckets_enabled(400'000, std::nullopt, 8));
  EXPECT_TRUE(buckets_enabled(600'000, std::nullopt, 8));
}

TEST(BucketPlan, CoversEveryExampleOnce) {
  for (std::size_t n : {1u, 7u, 8u, 9u, 100u}) {
    for (std::size_t b : {1u, 3u, 8u}) {
      BucketPlan plan(n, b);
      EXPECT_EQ(plan.num_buckets(), (n + b - 1) / b);
      std::size_t next = 0;
      for (std::size_t k = 0; k < plan.num_buckets(); ++k) {
        const auto r = plan.bucket(k);
        EXPECT_EQ(r.begin, next);
        EXPECT_LE(r.size(), b);
        EXPECT_GT(r.size(), 0u);
        next = r.end;
      }
      EXPECT_EQ(next, n);
    }
  }
}

TEST(BucketPlan, PartialLastBucket) {
  BucketPlan plan(20, 8);
  EXPECT_EQ(plan.bucket(2), (IndexRange{16, 20}));
}

TEST(Shuffle, SingleElementUnchanged) {
  std::array<int, 1> one{42};
  Rng rng(1);
  shuffle(std::span<int>(one), rng);
  EXPECT_EQ(one[0], 42);
}

TEST(Shuffle, IsDeterministicPermutation) {
  std::vector<int> a(100), b(100);
  std::iota(a.begin(), a.end(), 0);
  b = a;
  Rng r1(5), r2(5);
  shuffle(std::span<int>(a), r1);
  shuffle(std::span<int>(b), r2);
  EXPECT_EQ(a, b);
  auto sorted = a;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> ident(100);
  std::iota(ident.begin(), ident.end(), 0);
  EXPECT_EQ(sorted, ident);
  EXPECT_NE(a, ident);
}

TEST(Shuffle, AllPermutationsEquallyLikely) {
  Rng rng(77);
  std::map<std::array<int, 3>, int> counts;
  const int trials = 60000;
  for (int t = 0; t < trials; ++t) {
    std::array<int, 3> p{0, 1, 2};
    shuffle(std::span<int>(p), rng);
    ++counts[p];
  }
  ASSERT_EQ(counts.size(), 6u);
  // each count is binomial(60000, 1/6): sd ~ 91
  for (const auto& [perm, c] : counts) EXPECT_NEAR(c, trials / 6, 4 * 91);
}

TEST(StaticPartition, Examples) {
  auto sizes = [](std::size_t n, std::size_t k) {
    std::vector<std::size_t> out;
    for (const auto& r : static_partition(n, k)) out.push_back(r.size());
    return out;
  };
  EXPECT_EQ(sizes(10, 4), (std::vector<std::size_t>{3, 3, 2, 2}));
  EXPECT_EQ(sizes(4, 4), (std::vector<std::size_t>{1, 1, 1, 1}));
  EXPECT_EQ(sizes(2, 4), (std::vector<std::size_t>{1, 1, 0, 0}));
  EXPECT_THROW(static_partition(5, 0), std::invalid_argument);
}

TEST(StaticPartition, ContiguousAndBalanced) {
  for (std::size_t n = 0; n < 40; ++n) {
    for (std::size_t k = 1; k < 9; ++k) {
      const auto parts = static_partition(n, k);
      ASSERT_EQ(parts.size(), k);
      std::size_t next = 0, lo = n, hi = 0;
      for (const auto& r : parts) {
        ASSERT_EQ(r.begin, next);
        next = r.end;
        lo = std::min(lo, r.size());
        hi = std::max(hi, r.size());
      }
      EXPECT_EQ(next, n);
      EXPECT_LE(hi - lo, 1u);
    }
  }
}

TEST(WorkQueue, SequentialClaims) {
  std::vector<std::uint32_t> order{2, 0, 1};
  WorkQueue q(order);
  EXPECT_EQ(q.claim_next(), 2u);
  EXPECT_EQ(q.claim_next(), 0u);
  EXPECT_EQ(q.claim_next(), 1u);
  EXPECT_EQ(q.claim_next(), std::nullopt);
  EXPECT_EQ(q.claim_next(), std::nullopt);
  q.reset(order);
  EXPECT_EQ(q.claim_next(), 2u);
}

TEST(WorkQueue, ConcurrentClaimsAreExactlyOnce) {
  std::vector<std::uint32_t> order(1000);
  std::iota(order.begin(), order.end(), 0u);
  for (int round = 0; round < 20; ++round) {
    WorkQueue q(order);
    std::vector<std::vector<std::uint32_t>> got(4);
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < 4; ++t) {
      threads.emplace_back([&, t] {
        while (auto b = q.claim_next()) got[t].push_back(*b);
      });
    }
    for (auto& th : threads) th.join();
    std::vector<std::uint32_t> all;
    for (const auto& g : got) all.insert(all.end(), g.begin(), g.end());
    std::sort(all.begin(), all.end());
    ASSERT_EQ(all, order);
  }
}
