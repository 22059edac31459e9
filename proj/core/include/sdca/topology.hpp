#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sdca {

/// A set of cores with shared memory locality (a NUMA node, or the whole
/// machine when no node information is available).
struct CoreGroup {
  std::size_t id = 0;
  std::size_t cores = 1;   ///< physical cores when distinguishable, else logical
  std::vector<int> cpus;   ///< OS cpu ids usable for pinning; empty when unknown

  bool operator==(const CoreGroup&) const = default;
};

struct SystemTopology {
  std::size_t cache_line_bytes = 64;
  std::optional<std::size_t> llc_bytes;
  std::vector<CoreGroup> groups;
  std::optional<std::size_t> data_group;

  std::size_t total_cores() const;
  const CoreGroup* find_group(std::size_t id) const;
  void validate() const;
};

/// Values that replace whatever the host reports. Groups given here have ids
/// 0..k-1 in order and no cpu lists.
struct TopologyOverrides {
  std::optional<std::size_t> cache_line_bytes;
  std::optional<std::size_t> llc_bytes;
  std::optional<std::vector<std::size_t>> group_cores;
  std::optional<std::size_t> data_group;
};

/// Parses "8,8,8,8" (cores per group).
std::vector<std::size_t> parse_group_layout(std::string_view text);

/// Reads SDCA_CACHE_LINE, SDCA_LLC_BYTES, SDCA_GROUPS and SDCA_DATA_GROUP.
TopologyOverrides overrides_from_env();

/// Host description: OS-derived values where available, overrides where
/// given, and otherwise cache line 64, unknown LLC, one group holding every
/// logical core and unknown data group. Never fails on the host side; invalid
/// override values throw std::invalid_argument.
SystemTopology probe(const TopologyOverrides& overrides = {});

/// Topology built from overrides alone, ignoring the host.
SystemTopology synthetic_topology(const TopologyOverrides& overrides);

struct GroupAssignment {
  std::size_t group_id = 0;
  std::size_t threads = 0;

  bool operator==(const GroupAssignment&) const = default;
};

struct ThreadPlan {
  std::vector<GroupAssignment> assignments;  ///< ordered by group id
  std::size_t total_threads = 0;
};

/// Places `requested` threads. A request that fits in one group stays in one
/// group (the data group when it fits). Larger requests are spread as evenly as
/// capacities allow over the fewest groups that can hold them, always
/// including the data group. With oversubscribe, requests beyond the machine
/// are spread evenly over every group instead of failing.
ThreadPlan plan_threads(std::size_t requested, const SystemTopology& topo, bool oversubscribe = false);

std::string describe(const SystemTopology& topo);
std::string describe(const ThreadPlan& plan);

}  // namespace sdca
