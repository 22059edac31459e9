#include <atomic>
#include <cassert>
#include <stdexcept>

#include "sdca/solver.hpp"

namespace sdca {

namespace {

double solve_coordinate(const EpochContext& ctx, std::size_t j, double alpha_j, double dot_j,
                        double sigma) {
  const CoordState s{alpha_j, ctx.ds.label(j), dot_j, ctx.norms[j] * sigma, ctx.ds.n()};
  return coordinate_delta(s, ctx.obj);
}

// Element-granular relaxed accesses: no torn values, no ordering, and a
// read-modify-write that can lose a racing add.
double wild_dot(const ExampleView& x, std::span<double> w) {
  double acc = 0.0;
  if (x.dense) {
    for (std::size_t i = 0; i < x.values.size(); ++i) {
      acc += x.values[i] * std::atomic_ref<double>(w[i]).load(std::memory_order_relaxed);
    }
  } else {
    for (std::size_t k = 0; k < x.values.size(); ++k) {
      acc += x.values[k] *
             std::atomic_ref<double>(w[x.indices[k]]).load(std::memory_order_relaxed);
    }
  }
  return acc;
}

void wild_axpy(double scale, const ExampleView& x, std::span<double> w) {
  auto add = [](double& slot, double v) {
    std::atomic_ref<double> ref(slot);
    ref.store(ref.load(std::memory_order_relaxed) + v, std::memory_order_relaxed);
  };
  if (x.dense) {
    for (std::size_t i = 0; i < x.values.size(); ++i) add(w[i], scale * x.values[i]);
  } else {
    for (std::size_t k = 0; k < x.values.size(); ++k) add(w[x.indices[k]], scale * x.values[k]);
  }
}

/// out = base + gamma/sigma * sum_k (w_local_k - base); base and out may alias.
void merge_shared_vectors(std::span<const double> base, std::span<double> out,
                          std::span<const Replica> replicas, double gamma, double sigma) {
  const bool exact = gamma == 1.0 && sigma == 1.0;
  const double factor = gamma / sigma;
  for (std::size_t i = 0; i < base.size(); ++i) {
    const double b = base[i];
    double sum = 0.0;
    std::size_t touched = 0;
    std::size_t last = 0;
    for (std::size_t k = 0; k < replicas.size(); ++k) {
      const double diff = replicas[k].w_local[i] - b;
      if (diff != 0.0) {
        sum += diff;
        ++touched;
        last = k;
      }
    }
    if (touched == 0) {
      out[i] = b;
    } else if (exact && touched == 1) {
      out[i] = replicas[last].w_local[i];
    } else {
      out[i] = b + factor * sum;
    }
  }
}

#ifndef NDEBUG
void assert_disjoint_ownership(std::span<const Replica> replicas, std::size_t n) {
  std::vector<char> seen(n, 0);
  for (const auto& r : replicas) {
    for (const auto& u : r.owned_updates) {
      assert(u.coord < n && "owned coordinate out of range");
      assert(!seen[u.coord] && "coordinate owned by more than one replica");
      seen[u.coord] = 1;
    }
  }
}
#endif

}  // namespace

void epoch_sequential(const EpochContext& ctx, Model& model, BucketPlan& plan, Rng& rng) {
  plan.shuffle(rng);
  const double scale = ctx.step_scale();
  auto* trace = ctx.trace ? &(*ctx.trace)[0] : nullptr;
  for (const auto b : plan.order()) {
    const auto range = plan.bucket(b);
    for (std::size_t j = range.begin; j < range.end; ++j) {
      const auto x = ctx.ds.example(j);
      const double delta = solve_coordinate(ctx, j, model.alpha[j], dot(x, model.w), 1.0);
      if (trace) trace->push_back(j);
      if (delta != 0.0) {
        model.alpha[j] += delta;
        axpy(delta * scale, x, model.w);
      }
    }
  }
}

void epoch_wild(const EpochContext& ctx, Model& model, BucketPlan& plan, Rng& rng, WorkerTeam& team) {
  plan.shuffle(rng);
  const auto parts = static_partition(plan.num_buckets(), team.size());
  const double scale = ctx.step_scale();
  const auto order = plan.order();
  std::span<double> w(model.w);
  team.run([&](std::size_t t) {
    auto* trace = ctx.trace ? &(*ctx.trace)[t] : nullptr;
    for (std::size_t slot = parts[t].begin; slot < parts[t].end; ++slot) {
      const auto range = plan.bucket(order[slot]);
      for (std::size_t j = range.begin; j < range.end; ++j) {
        const auto x = ctx.ds.example(j);
        const double delta = solve_coordinate(ctx, j, model.alpha[j], wild_dot(x, w), 1.0);
        if (trace) trace->push_back(j);
        if (delta != 0.0) {
          model.alpha[j] += delta;
          wild_axpy(delta * scale, x, w);
        }
      }
    }
  });
}

void Replica::reset(std::span<const double> w) {
  w_local.assign(w.begin(), w.end());
  owned_updates.clear();
}

void reduce_replicas(std::span<double> w, std::span<double> alpha, std::span<Replica> replicas,
                     double gamma, double sigma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("reduce_replicas: gamma must be in (0, 1]");
  if (!(sigma > 0.0)) throw std::invalid_argument("reduce_replicas: sigma must be positive");
  for (const auto& r : replicas) {
    if (r.w_local.size() != w.size()) throw std::invalid_argument("reduce_replicas: replica size mismatch");
  }
#ifndef NDEBUG
  assert_disjoint_ownership(replicas, alpha.size());
#endif
  merge_shared_vectors(w, w, replicas, gamma, sigma);
  for (const auto& r : replicas) {
    for (const auto& u : r.owned_updates) alpha[u.coord] += gamma * u.delta;
  }
  for (auto& r : replicas) r.reset(w);
}

PartitionedEngine::PartitionedEngine(const Dataset& ds, std::size_t bucket_size,
                                     const ThreadPlan& plan, PartitionMode mode, double gamma,
                                     std::optional<double> sigma, std::uint64_t seed)
    : plan_(ds.n(), bucket_size), mode_(mode) {
  const std::size_t total = plan.total_threads;
  if (total == 0 || plan.assignments.empty()) throw std::invalid_argument("partitioned engine: empty thread plan");
  const auto ranges = static_partition(plan_.num_buckets(), total);

  std::size_t t = 0;
  std::size_t widest = 0;
  for (std::size_t g = 0; g < plan.assignments.size(); ++g) {
    const std::size_t count = plan.assignments[g].threads;
    if (count == 0) throw std::invalid_argument("partitioned engine: group with no threads");
    Group group;
    group.first_thread = t;
    group.thread_count = count;
    group.rng = Rng::stream(seed, g);
    for (std::size_t b = ranges[t].begin; b < ranges[t + count - 1].end; ++b) {
      group.buckets.push_back(static_cast<std::uint32_t>(b));
    }
    group.queue = std::make_unique<WorkQueue>(group.buckets);
    for (std::size_t k = 0; k < count; ++k, ++t) {
      group_of_.push_back(g);
      std::vector<std::uint32_t> own;
      for (std::size_t b = ranges[t].begin; b < ranges[t].end; ++b) own.push_back(static_cast<std::uint32_t>(b));
      thread_buckets_.push_back(std::move(own));
      thread_rngs_.push_back(Rng::stream(seed, t));
    }
    widest = std::max(widest, count);
    groups_.push_back(std::move(group));
  }
  if (t != total) throw std::invalid_argument("partitioned engine: thread plan totals disagree");

  thread_gamma_ = widest > 1 ? gamma : 1.0;
  group_gamma_ = groups_.size() > 1 ? gamma : 1.0;
  sigma_ = sigma ? *sigma : effective_gamma() * static_cast<double>(total);
  if (!(sigma_ > 0.0)) throw std::invalid_argument("partitioned engine: sigma must be positive");
  replicas_.resize(total);
  visited_.resize(total);
}

void PartitionedEngine::train_worker(const EpochContext& ctx, const Model& model, std::size_t worker) {
  auto& replica = replicas_[worker];
  // Workers touch their replica first so its pages land near them.
  replica.reset(model.w);
  replica.owned_updates.reserve(ctx.ds.n() / replicas_.size() + plan_.bucket_size());
  visited_[worker].clear();
  auto* trace = ctx.trace ? &(*ctx.trace)[worker] : nullptr;
  const double scale = ctx.step_scale();

  auto train_bucket = [&](std::uint32_t b) {
    visited_[worker].push_back(b);
    const auto range = plan_.bucket(b);
    for (std::size_t j = range.begin; j < range.end; ++j) {
      const auto x = ctx.ds.example(j);
      const double delta = solve_coordinate(ctx, j, model.alpha[j], dot(x, replica.w_local), sigma_);
      if (trace) trace->push_back(j);
      if (delta != 0.0) {
        replica.owned_updates.push_back({j, delta});
        axpy(sigma_ * delta * scale, x, replica.w_local);
      }
    }
  };

  if (mode_ == PartitionMode::static_assignment) {
    for (const auto b : thread_buckets_[worker]) train_bucket(b);
  } else {
    auto& queue = *groups_[group_of_[worker]].queue;
    while (auto b = queue.claim_next()) train_bucket(*b);
  }
}

void PartitionedEngine::merge_group(Group& group, std::span<const double> w) {
  auto members = std::span<const Replica>(replicas_).subspan(group.first_thread, group.thread_count);
  group.merged.w_local.resize(w.size());
  merge_shared_vectors(w, group.merged.w_local, members, thread_gamma_, sigma_);
  group.merged.owned_updates.clear();
  for (const auto& r : members) {
    for (const auto& u : r.owned_updates) {
      group.merged.owned_updates.push_back({u.coord, thread_gamma_ * u.delta});
    }
  }
}

void PartitionedEngine::run_epoch(const EpochContext& ctx, Model& model, WorkerTeam& team) {
  if (team.size() != replicas_.size()) throw std::invalid_argument("partitioned engine: team size mismatch");

  if (mode_ == PartitionMode::static_assignment) {
    for (std::size_t t = 0; t < thread_buckets_.size(); ++t) {
      shuffle(std::span<std::uint32_t>(thread_buckets_[t]), thread_rngs_[t]);
    }
  } else {
    for (auto& g : groups_) {
      shuffle(std::span<std::uint32_t>(g.buckets), g.rng);
      g.queue->reset(g.buckets);
    }
  }

  const Model& snapshot = model;
  team.run([&](std::size_t t) { train_worker(ctx, snapshot, t); });

  if (groups_.size() == 1) {
    reduce_replicas(model.w, model.alpha, replicas_, thread_gamma_, sigma_);
    return;
  }

  std::span<const double> w(model.w);
  team.run([&](std::size_t t) {
    auto& g = groups_[group_of_[t]];
    if (g.first_thread == t) merge_group(g, w);
  });
  std::vector<Replica> merged;
  merged.reserve(groups_.size());
  for (auto& g : groups_) merged.push_back(std::move(g.merged));
  reduce_replicas(model.w, model.alpha, merged, group_gamma_, 1.0);
  for (std::size_t g = 0; g < groups_.size(); ++g) groups_[g].merged = std::move(merged[g]);
}

}  // namespace sdca
