#include "sdca/topology.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <utility>

#if defined(__linux__)
#include <unistd.h>
#endif

namespace sdca {

namespace {

bool valid_cache_line(std::size_t bytes) {
  return bytes == 32 || bytes == 64 || bytes == 128 || bytes == 256;
}

std::optional<std::size_t> parse_count(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\n')) text.remove_suffix(1);
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::optional<std::string> read_first_line(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::string line;
  if (!in || !std::getline(in, line)) return std::nullopt;
  return line;
}

/// "0-3,8,10-11" -> {0,1,2,3,8,10,11}
std::vector<int> parse_cpu_list(std::string_view text) {
  std::vector<int> cpus;
  while (!text.empty()) {
    const auto comma = text.find(',');
    auto item = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    const auto dash = item.find('-');
    auto first = parse_count(item.substr(0, dash));
    auto last = dash == std::string_view::npos ? first : parse_count(item.substr(dash + 1));
    if (!first || !last || *last < *first) return {};
    for (std::size_t c = *first; c <= *last; ++c) cpus.push_back(static_cast<int>(c));
  }
  return cpus;
}

#if defined(__linux__)

std::optional<std::size_t> os_cache_line() {
#ifdef _SC_LEVEL1_DCACHE_LINESIZE
  const long v = ::sysconf(_SC_LEVEL1_DCACHE_LINESIZE);
  if (v > 0 && valid_cache_line(static_cast<std::size_t>(v))) return static_cast<std::size_t>(v);
#endif
  if (auto line = read_first_line("/sys/devices/system/cpu/cpu0/cache/index0/coherency_line_size")) {
    if (auto v = parse_count(*line); v && valid_cache_line(*v)) return v;
  }
  return std::nullopt;
}

std::optional<std::size_t> os_llc_bytes() {
  long best = 0;
#ifdef _SC_LEVEL3_CACHE_SIZE
  best = std::max(best, ::sysconf(_SC_LEVEL3_CACHE_SIZE));
#endif
#ifdef _SC_LEVEL2_CACHE_SIZE
  best = std::max(best, ::sysconf(_SC_LEVEL2_CACHE_SIZE));
#endif
  if (best > 0) return static_cast<std::size_t>(best);
  return std::nullopt;
}

std::size_t physical_cores(const std::vector<int>& cpus) {
  std::set<std::pair<std::string, std::string>> cores;
  for (int cpu : cpus) {
    const std::filesystem::path base =
        "/sys/devices/system/cpu/cpu" + std::to_string(cpu) + "/topology";
    auto package = read_first_line(base / "physical_package_id");
    auto core = read_first_line(base / "core_id");
    if (!package || !core) return cpus.size();
    cores.emplace(*package, *core);
  }
  return cores.empty() ? cpus.size() : cores.size();
}

std::vector<CoreGroup> os_groups() {
  std::vector<CoreGroup> groups;
  std::error_code ec;
  const std::filesystem::path root = "/sys/devices/system/node";
  if (!std::filesystem::is_directory(root, ec)) return groups;
  for (const auto& entry : std::filesystem::directory_iterator(root, ec)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("node", 0) != 0) continue;
    auto id = parse_count(std::string_view(name).substr(4));
    if (!id) continue;
    auto list = read_first_line(entry.path() / "cpulist");
    if (!list) continue;
    auto cpus = parse_cpu_list(*list);
    if (cpus.empty()) continue;
    const std::size_t cores = physical_cores(cpus);
    groups.push_back({*id, cores, std::move(cpus)});
  }
  std::sort(groups.begin(), groups.end(),
            [](const CoreGroup& a, const CoreGroup& b) { return a.id < b.id; });
  return groups;
}

#else

std::optional<std::size_t> os_cache_line() { return std::nullopt; }
std::optional<std::size_t> os_llc_bytes() { return std::nullopt; }
std::vector<CoreGroup> os_groups() { return {}; }

#endif

void apply_overrides(SystemTopology& topo, const TopologyOverrides& o) {
  if (o.cache_line_bytes) {
    if (!valid_cache_line(*o.cache_line_bytes)) {
      throw std::invalid_argument("cache line override must be 32, 64, 128 or 256 bytes");
    }
    topo.cache_line_bytes = *o.cache_line_bytes;
  }
  if (o.llc_bytes) {
    if (*o.llc_bytes == 0) throw std::invalid_argument("LLC override must be positive");
    topo.llc_bytes = o.llc_bytes;
  }
  if (o.group_cores) {
    if (o.group_cores->empty()) throw std::invalid_argument("group layout override is empty");
    topo.groups.clear();
    for (std::size_t g = 0; g < o.group_cores->size(); ++g) {
      if ((*o.group_cores)[g] == 0) {
        throw std::invalid_argument("group layout override: every group needs >= 1 core");
      }
      topo.groups.push_back({g, (*o.group_cores)[g], {}});
    }
    topo.data_group.reset();
  }
  if (o.data_group) {
    if (!topo.find_group(*o.data_group)) {
      throw std::invalid_argument("data group override " + std::to_string(*o.data_group) +
                                  " does not name a group");
    }
    topo.data_group = o.data_group;
  }
}

SystemTopology fallback_topology() {
  SystemTopology topo;
  const std::size_t logical = std::max(1u, std::thread::hardware_concurrency());
  topo.groups.push_back({0, logical, {}});
  return topo;
}

}  // namespace

std::size_t SystemTopology::total_cores() const {
  return std::accumulate(groups.begin(), groups.end(), std::size_t{0},
                         [](std::size_t acc, const CoreGroup& g) { return acc + g.cores; });
}

const CoreGroup* SystemTopology::find_group(std::size_t id) const {
  for (const auto& g : groups) {
    if (g.id == id) return &g;
  }
  return nullptr;
}

void SystemTopology::validate() const {
  if (!valid_cache_line(cache_line_bytes)) throw std::invalid_argument("topology: bad cache line size");
  if (groups.empty()) throw std::invalid_argument("topology: no groups");
  std::set<std::size_t> ids;
  for (const auto& g : groups) {
    if (g.cores == 0) throw std::invalid_argument("topology: group without cores");
    if (!ids.insert(g.id).second) throw std::invalid_argument("topology: duplicate group id");
  }
  if (data_group && !find_group(*data_group)) throw std::invalid_argument("topology: unknown data group");
}

std::vector<std::size_t> parse_group_layout(std::string_view text) {
  std::vector<std::size_t> cores;
  std::string_view rest = text;
  while (true) {
    const auto comma = rest.find(',');
    auto value = parse_count(rest.substr(0, comma));
    if (!value || *value == 0) {
      throw std::invalid_argument("group layout '" + std::string(text) +
                                  "' must be positive core counts separated by commas");
    }
    cores.push_back(*value);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return cores;
}

TopologyOverrides overrides_from_env() {
  TopologyOverrides o;
  auto count_from = [](const char* name) -> std::optional<std::size_t> {
    const char* raw = std::getenv(name);
    if (!raw || !*raw) return std::nullopt;
    auto v = parse_count(raw);
    if (!v) throw std::invalid_argument(std::string(name) + " must be a non-negative integer");
    return v;
  };
  o.cache_line_bytes = count_from("SDCA_CACHE_LINE");
  o.llc_bytes = count_from("SDCA_LLC_BYTES");
  o.data_group = count_from("SDCA_DATA_GROUP");
  if (const char* groups = std::getenv("SDCA_GROUPS"); groups && *groups) {
    o.group_cores = parse_group_layout(groups);
  }
  return o;
}

SystemTopology probe(const TopologyOverrides& overrides) {
  SystemTopology topo;
  if (auto line = os_cache_line()) topo.cache_line_bytes = *line;
  topo.llc_bytes = os_llc_bytes();
  topo.groups = os_groups();
  if (topo.groups.empty()) topo.groups = fallback_topology().groups;
  apply_overrides(topo, overrides);
  topo.validate();
  return topo;
}

SystemTopology synthetic_topology(const TopologyOverrides& overrides) {
  SystemTopology topo = fallback_topology();
  apply_overrides(topo, overrides);
  topo.validate();
  return topo;
}

ThreadPlan plan_threads(std::size_t requested, const SystemTopology& topo, bool oversubscribe) {
  if (requested == 0) throw std::invalid_argument("plan_threads: at least one thread is required");
  topo.validate();

  std::vector<const CoreGroup*> by_id;
  for (const auto& g : topo.groups) by_id.push_back(&g);
  std::sort(by_id.begin(), by_id.end(), [](auto* a, auto* b) { return a->id < b->id; });

  ThreadPlan plan;
  plan.total_threads = requested;

  // Single group when one can hold every thread.
  const CoreGroup* single = nullptr;
  if (topo.data_group) {
    const auto* dg = topo.find_group(*topo.data_group);
    if (dg->cores >= requested) single = dg;
  }
  if (!single) {
    for (auto* g : by_id) {
      if (g->cores >= requested) {
        single = g;
        break;
      }
    }
  }
  if (single) {
    plan.assignments.push_back({single->id, requested});
    return plan;
  }

  const std::size_t total = topo.total_cores();
  if (requested > total) {
    if (!oversubscribe) {
      throw std::invalid_argument("plan_threads: " + std::to_string(requested) +
                                  " threads requested but only " + std::to_string(total) +
                                  " cores available");
    }
    const std::size_t g_count = by_id.size();
    for (std::size_t k = 0; k < g_count; ++k) {
      const std::size_t share = requested / g_count + (k < requested % g_count ? 1 : 0);
      if (share > 0) plan.assignments.push_back({by_id[k]->id, share});
    }
    return plan;
  }

  // Fewest groups: the data group first, then the largest remaining ones.
  std::vector<const CoreGroup*> candidates = by_id;
  std::stable_sort(candidates.begin(), candidates.end(), [&](auto* a, auto* b) {
    const bool a_data = topo.data_group && a->id == *topo.data_group;
    const bool b_data = topo.data_group && b->id == *topo.data_group;
    if (a_data != b_data) return a_data;
    return a->cores > b->cores;
  });
  std::vector<const CoreGroup*> chosen;
  std::size_t capacity = 0;
  for (auto* g : candidates) {
    if (capacity >= requested) break;
    chosen.push_back(g);
    capacity += g->cores;
  }
  std::sort(chosen.begin(), chosen.end(), [](auto* a, auto* b) { return a->id < b->id; });

  // Even split, capped by each group's cores.
  std::vector<std::size_t> alloc(chosen.size(), 0);
  std::size_t remaining = requested;
  while (remaining > 0) {
    std::vector<std::size_t> open;
    for (std::size_t k = 0; k < chosen.size(); ++k) {
      if (alloc[k] < chosen[k]->cores) open.push_back(k);
    }
    const std::size_t share = remaining / open.size();
    if (share == 0) {
      for (std::size_t k = 0; k < remaining; ++k) ++alloc[open[k]];
      break;
    }
    for (auto k : open) {
      const std::size_t add = std::min(share, chosen[k]->cores - alloc[k]);
      alloc[k] += add;
      remaining -= add;
    }
  }
  for (std::size_t k = 0; k < chosen.size(); ++k) {
    plan.assignments.push_back({chosen[k]->id, alloc[k]});
  }
  return plan;
}

std::string describe(const SystemTopology& topo) {
  std::ostringstream out;
  out << "cache_line=" << topo.cache_line_bytes << "B llc=";
  if (topo.llc_bytes) {
    out << *topo.llc_bytes << "B";
  } else {
    out << "unknown";
  }
  out << " groups=";
  for (std::size_t k = 0; k < topo.groups.size(); ++k) {
    out << (k ? "," : "") << topo.groups[k].id << ":" << topo.groups[k].cores;
  }
  out << " data_group=";
  if (topo.data_group) {
    out << *topo.data_group;
  } else {
    out << "unknown";
  }
  return out.str();
}

std::string describe(const ThreadPlan& plan) {
  std::ostringstream out;
  out << "threads=" << plan.total_threads << " placement=";
  for (std::size_t k = 0; k < plan.assignments.size(); ++k) {
    out << (k ? "," : "") << plan.assignments[k].group_id << ":" << plan.assignments[k].threads;
  }
  return out.str();
}

}  // namespace sdca
