#pragma once

#include <cstdint>
#include <random>

namespace sdca {

/// Reproducible random source used everywhere in the trainer.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The derived draws below are implemented here rather than through
/// <random> distributions, whose algorithms are implementation-defined, so a
/// seed produces the same datasets and shuffles with any standard library.
///
///  - uniform01: top 53 bits of one engine output, scaled to [0, 1).
///  - uniform_index: Lemire's multiply-shift with rejection (unbiased).
///  - normal: Marsaglia polar method, caching the second variate.
///
/// Independent streams (per thread, per group) use seed = master_seed + stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng stream(std::uint64_t master_seed, std::uint64_t stream_id) {
    return Rng(master_seed + stream_id);
  }

  std::uint64_t next_u64() { return engine_(); }
  double uniform01();
  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t uniform_index(std::uint64_t bound);
  double normal();

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace sdca
