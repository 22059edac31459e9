#include "sdca/solver.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sdca {

std::string_view to_string(Engine engine) {
  switch (engine) {
    case Engine::sequential: return "sequential";
    case Engine::wild: return "wild";
    case Engine::static_partitioned: return "static";
    case Engine::dynamic_hierarchical: return "dynamic";
  }
  return "unknown";
}

Engine parse_engine(std::string_view name) {
  if (name == "sequential") return Engine::sequential;
  if (name == "wild") return Engine::wild;
  if (name == "static" || name == "static_partitioned") return Engine::static_partitioned;
  if (name == "dynamic" || name == "dynamic_hierarchical") return Engine::dynamic_hierarchical;
  throw std::invalid_argument("unknown engine '" + std::string(name) + "'");
}

BucketMode BucketMode::parse(std::string_view text) {
  if (text == "auto") return automatic();
  if (text == "on") return on();
  if (text == "off") return off();
  std::size_t size = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), size);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || size == 0) {
    throw std::invalid_argument("bucket mode must be auto, on, off or a positive size, got '" +
                                std::string(text) + "'");
  }
  return fixed(size);
}

std::string BucketMode::to_string() const {
  switch (kind) {
    case Kind::automatic: return "auto";
    case Kind::on: return "on";
    case Kind::off: return "off";
    case Kind::fixed: return std::to_string(size);
  }
  return "auto";
}

PinMode parse_pin_mode(std::string_view text) {
  if (text == "none") return PinMode::none;
  if (text == "group") return PinMode::group;
  if (text == "core") return PinMode::core;
  throw std::invalid_argument("pin mode must be none, group or core");
}

std::string_view to_string(PinMode mode) {
  switch (mode) {
    case PinMode::none: return "none";
    case PinMode::group: return "group";
    case PinMode::core: return "core";
  }
  return "none";
}

void SolverConfig::validate() const {
  if (threads < 1) throw std::invalid_argument("solver config: threads must be >= 1");
  if (max_epochs < 1) throw std::invalid_argument("solver config: max_epochs must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("solver config: tol must be > 0");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("solver config: gamma must be in (0, 1]");
  if (sigma && !(*sigma > 0.0 && std::isfinite(*sigma))) {
    throw std::invalid_argument("solver config: sigma must be positive");
  }
  if (bucket.kind == BucketMode::Kind::fixed && bucket.size == 0) {
    throw std::invalid_argument("solver config: fixed bucket size must be >= 1");
  }
  objective.validate();
}

ConvergenceCheck check_convergence(std::span<const double> prev, std::span<const double> cur,
                                   double tol) {
  if (prev.size() != cur.size()) throw std::invalid_argument("check_convergence: length mismatch");
  double diff = 0.0;
  double base = 0.0;
  for (std::size_t i = 0; i < cur.size(); ++i) {
    const double d = cur[i] - prev[i];
    diff += d * d;
    base += prev[i] * prev[i];
  }
  const double rel = std::sqrt(diff) / std::max(std::sqrt(base), 1e-10);
  return {rel < tol, rel};
}

std::size_t resolve_bucket_size(const BucketMode& mode, std::size_t n, const SystemTopology& topo) {
  constexpr std::size_t entry = sizeof(double);
  switch (mode.kind) {
    case BucketMode::Kind::off: return 1;
    case BucketMode::Kind::fixed: return mode.size;
    case BucketMode::Kind::on: return compute_bucket_size(topo.cache_line_bytes, entry);
    case BucketMode::Kind::automatic:
      return buckets_enabled(n, topo.llc_bytes, entry) ? compute_bucket_size(topo.cache_line_bytes, entry)
                                                       : 1;
  }
  return 1;
}

namespace {

using Clock = std::chrono::steady_clock;

std::vector<std::vector<int>> cpu_sets_for(const ThreadPlan& plan, const SystemTopology& topo,
                                           PinMode pin) {
  std::vector<std::vector<int>> sets;
  for (const auto& a : plan.assignments) {
    const auto* group = topo.find_group(a.group_id);
    for (std::size_t k = 0; k < a.threads; ++k) {
      if (pin == PinMode::none || !group || group->cpus.empty()) {
        sets.emplace_back();
      } else if (pin == PinMode::group) {
        sets.push_back(group->cpus);
      } else {
        sets.push_back({group->cpus[k % group->cpus.size()]});
      }
    }
  }
  return sets;
}

void check_labels(const Dataset& ds, const Objective& obj) {
  if (obj.kind != Loss::logistic) return;
  for (std::size_t j = 0; j < ds.n(); ++j) {
    const double y = ds.label(j);
    if (y != 1.0 && y != -1.0) {
      throw std::invalid_argument("logistic objective needs labels in {-1,+1}; example " +
                                  std::to_string(j) + " has " + std::to_string(y));
    }
  }
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

std::pair<Model, TrainReport> train(const Dataset& ds, const SolverConfig& cfg,
                                    const SystemTopology& topo, VisitTrace* trace) {
  cfg.validate();
  topo.validate();
  if (ds.n() == 0) throw std::invalid_argument("train: dataset is empty");
  check_labels(ds, cfg.objective);

  const auto norms = column_norms(ds);
  TrainReport report;
  report.config = cfg;
  report.topology = topo;
  report.bucket_size = resolve_bucket_size(cfg.bucket, ds.n(), topo);

  Model model{std::vector<double>(ds.n(), 0.0), std::vector<double>(ds.d(), 0.0)};
  EpochContext ctx{ds, norms, cfg.objective, nullptr};

  const std::size_t default_group = topo.data_group ? *topo.data_group : topo.groups.front().id;
  BucketPlan plan(ds.n(), report.bucket_size);
  Rng rng(cfg.seed);
  std::unique_ptr<WorkerTeam> team;
  std::unique_ptr<PartitionedEngine> partitioned;

  switch (cfg.engine) {
    case Engine::sequential:
      report.plan = {{{default_group, 1}}, 1};
      break;
    case Engine::wild:
      // Topology-oblivious baseline: no placement, no pinning.
      report.plan = {{{default_group, cfg.threads}}, cfg.threads};
      team = std::make_unique<WorkerTeam>(cfg.threads);
      break;
    case Engine::static_partitioned:
    case Engine::dynamic_hierarchical: {
      report.plan = plan_threads(cfg.threads, topo, cfg.oversubscribe);
      const auto mode = cfg.engine == Engine::static_partitioned ? PartitionMode::static_assignment
                                                                 : PartitionMode::dynamic;
      partitioned = std::make_unique<PartitionedEngine>(ds, report.bucket_size, report.plan, mode,
                                                        cfg.gamma, cfg.sigma, cfg.seed);
      report.sigma = partitioned->sigma();
      team = std::make_unique<WorkerTeam>(cfg.threads, cpu_sets_for(report.plan, topo, cfg.pin));
      break;
    }
  }

  const std::size_t workers = team ? team->size() : 1;
  std::vector<double> prev_alpha(ds.n(), 0.0);
  std::size_t primal_rises = 0;
  bool warned = false;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    if (trace) {
      trace->epochs.emplace_back(workers);
      ctx.trace = &trace->epochs.back();
    }
    prev_alpha = model.alpha;

    const auto start = Clock::now();
    switch (cfg.engine) {
      case Engine::sequential: epoch_sequential(ctx, model, plan, rng); break;
      case Engine::wild: epoch_wild(ctx, model, plan, rng, *team); break;
      default: partitioned->run_epoch(ctx, model, *team); break;
    }
    const auto check = check_convergence(prev_alpha, model.alpha, cfg.tol);
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();

    if (!all_finite(model.w)) {
      throw std::runtime_error("training diverged: non-finite shared vector after epoch " +
                               std::to_string(epoch));
    }

    record_epoch(report, seconds, model, ds, cfg.objective, check.rel_change, check.converged,
                 cfg.eval_objective);

    if (cfg.eval_objective && report.epochs.size() >= 2) {
      const auto& cur = report.epochs.back();
      const auto& before = report.epochs[report.epochs.size() - 2];
      primal_rises = cur.primal > before.primal ? primal_rises + 1 : 0;
      if (primal_rises >= 3 && !warned) {
        report.warnings.push_back("primal objective rose for 3 consecutive epochs (epoch " +
                                  std::to_string(epoch) + "); consider a smaller gamma");
        warned = true;
      }
    }

    if (check.converged) {
      report.converged = true;
      break;
    }
  }
  return {std::move(model), std::move(report)};
}

}  // namespace sdca
