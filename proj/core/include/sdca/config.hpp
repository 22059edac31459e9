#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sdca/objective.hpp"

namespace sdca {

enum class Engine { sequential, wild, static_partitioned, dynamic_hierarchical };

std::string_view to_string(Engine engine);
/// Accepts the short CLI names (sequential, wild, static, dynamic) and the long ones.
Engine parse_engine(std::string_view name);

struct BucketMode {
  enum class Kind { automatic, on, off, fixed };
  Kind kind = Kind::automatic;
  std::size_t size = 0;  ///< only for Kind::fixed

  static BucketMode automatic() { return {Kind::automatic, 0}; }
  static BucketMode on() { return {Kind::on, 0}; }
  static BucketMode off() { return {Kind::off, 0}; }
  static BucketMode fixed(std::size_t size) { return {Kind::fixed, size}; }

  /// "auto" | "on" | "off" | positive integer
  static BucketMode parse(std::string_view text);
  std::string to_string() const;
  bool operator==(const BucketMode&) const = default;
};

enum class PinMode { none, group, core };

PinMode parse_pin_mode(std::string_view text);
std::string_view to_string(PinMode mode);

struct SolverConfig {
  Engine engine = Engine::sequential;
  std::size_t threads = 1;
  std::size_t max_epochs = 100;
  double tol = 1e-3;  ///< relative change in alpha between epochs
  Objective objective{};
  BucketMode bucket = BucketMode::automatic();
  /// Weight applied when replica updates are merged, per non-trivial level.
  double gamma = 1.0;
  /// Curvature scaling of each replica's local subproblem. Unset means the
  /// effective merge weight times the replica count, which keeps additive
  /// merging stable; 1.0 gives unscaled local updates.
  std::optional<double> sigma;
  std::uint64_t seed = 0;
  /// Evaluate primal/dual/gap after every epoch (timed separately).
  bool eval_objective = false;
  /// Allow more threads than the topology has cores.
  bool oversubscribe = true;
  PinMode pin = PinMode::none;

  void validate() const;
};

/// Dual coordinates and the primal-scaled shared vector w = v / (lambda n).
struct Model {
  std::vector<double> alpha;
  std::vector<double> w;
};

}  // namespace sdca
