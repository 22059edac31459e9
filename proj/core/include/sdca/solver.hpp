#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "sdca/config.hpp"
#include "sdca/data.hpp"
#include "sdca/metrics.hpp"
#include "sdca/objective.hpp"
#include "sdca/partition.hpp"
#include "sdca/rng.hpp"
#include "sdca/topology.hpp"
#include "sdca/worker_team.hpp"

namespace sdca {

/// Coordinates visited in one epoch, one list per worker, in visit order.
using EpochTrace = std::vector<std::vector<std::size_t>>;

struct VisitTrace {
  std::vector<EpochTrace> epochs;
};

/// Read-only inputs shared by every epoch of a training run.
struct EpochContext {
  const Dataset& ds;
  std::span<const double> norms;  ///< column_norms(ds)
  Objective obj;
  EpochTrace* trace = nullptr;

  double step_scale() const { return 1.0 / (obj.lambda * static_cast<double>(ds.n())); }
};

/// One single-threaded pass: shuffle the bucket order, then update every
/// example of every bucket in index order against the global w.
void epoch_sequential(const EpochContext& ctx, Model& model, BucketPlan& plan, Rng& rng);

/// Unsynchronized baseline. The shuffled bucket order is split statically
/// across the team; every worker reads and adds into the one global w with
/// relaxed element-wise atomic loads and stores, so racing adds may be lost
/// but values are never torn. Each worker owns its alpha coordinates.
void epoch_wild(const EpochContext& ctx, Model& model, BucketPlan& plan, Rng& rng, WorkerTeam& team);

struct OwnedUpdate {
  std::size_t coord = 0;
  double delta = 0.0;
};

/// Worker-local view of the shared vector for one epoch.
///
/// w_local starts as the epoch-start w and accumulates sigma-scaled local
/// steps, so w_local == w + sigma * delta_w where delta_w is the replica's
/// own contribution.
struct Replica {
  std::vector<double> w_local;
  std::vector<OwnedUpdate> owned_updates;

  void reset(std::span<const double> w);
};

/// Merges replica contributions into the global state and resets the replicas:
///   w       <- w + gamma * sum_k (w_local_k - w) / sigma
///   alpha_j <- alpha_j + gamma * delta   for every owned update (j, delta)
/// With gamma == sigma == 1, an element changed by a single replica takes that
/// replica's value unchanged. Coordinates must be owned by at most one replica
/// (asserted in debug builds).
void reduce_replicas(std::span<double> w, std::span<double> alpha, std::span<Replica> replicas,
                     double gamma, double sigma = 1.0);

enum class PartitionMode { static_assignment, dynamic };

/// Replica-based engines (static and dynamic) over a two-level layout.
///
/// Buckets are split once, contiguously and in proportion to thread counts,
/// across the groups of the thread plan. Inside a group, static mode fixes
/// each worker's buckets for the whole run and reshuffles them per epoch;
/// dynamic mode reshuffles the group's buckets every epoch and hands them out
/// through a claim cursor. Every worker trains against its own Replica; at
/// epoch end replicas merge into their group, then groups merge into the
/// global state. gamma applies at the thread level only if some group has
/// more than one worker, and at the group level only if there is more than one
/// group; otherwise that level merges with weight 1.
class PartitionedEngine {
 public:
  PartitionedEngine(const Dataset& ds, std::size_t bucket_size, const ThreadPlan& plan,
                    PartitionMode mode, double gamma, std::optional<double> sigma,
                    std::uint64_t seed);

  void run_epoch(const EpochContext& ctx, Model& model, WorkerTeam& team);

  std::size_t threads() const { return replicas_.size(); }
  std::size_t groups() const { return groups_.size(); }
  double sigma() const { return sigma_; }
  /// Product of the merge weights applied to a local update.
  double effective_gamma() const { return thread_gamma_ * group_gamma_; }

  /// Buckets a worker trained on in the last epoch, in visit order.
  std::span<const std::uint32_t> last_buckets(std::size_t worker) const {
    return visited_[worker];
  }

 private:
  struct Group {
    std::size_t first_thread = 0;
    std::size_t thread_count = 0;
    std::vector<std::uint32_t> buckets;
    Rng rng{0};
    std::unique_ptr<WorkQueue> queue;
    Replica merged;
  };

  void train_worker(const EpochContext& ctx, const Model& model, std::size_t worker);
  void merge_group(Group& group, std::span<const double> w);

  BucketPlan plan_;
  PartitionMode mode_;
  double thread_gamma_ = 1.0;
  double group_gamma_ = 1.0;
  double sigma_ = 1.0;
  std::vector<Group> groups_;
  std::vector<std::size_t> group_of_;
  std::vector<std::vector<std::uint32_t>> thread_buckets_;
  std::vector<Rng> thread_rngs_;
  std::vector<Replica> replicas_;
  std::vector<std::vector<std::uint32_t>> visited_;
};

struct ConvergenceCheck {
  bool converged = false;
  double rel_change = 0.0;
};

/// |cur - prev|_2 / max(|prev|_2, 1e-10) compared against tol.
ConvergenceCheck check_convergence(std::span<const double> prev, std::span<const double> cur,
                                   double tol);

/// Bucket size implied by a bucket mode for n examples on this topology.
std::size_t resolve_bucket_size(const BucketMode& mode, std::size_t n, const SystemTopology& topo);

/// Runs SDCA from alpha = 0, w = 0 until the relative change in alpha drops
/// below cfg.tol or cfg.max_epochs epochs have run.
std::pair<Model, TrainReport> train(const Dataset& ds, const SolverConfig& cfg,
                                    const SystemTopology& topo, VisitTrace* trace = nullptr);

}  // namespace sdca
