// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// gated criterion fails. Criterion 8 needs at least 4 cores and is reported
// but never gated.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "sdca/solver.hpp"

using namespace sdca;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

struct Outcome {
  enum class Status { pass, fail, info } status = Status::fail;
  std::string detail;
};

Outcome pass_if(bool ok, std::string detail) {
  return {ok ? Outcome::Status::pass : Outcome::Status::fail, std::move(detail)};
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

const SystemTopology& flat() {
  static const SystemTopology topo = synthetic_topology({});
  return topo;
}

SolverConfig logistic_config(Engine engine, std::size_t threads, double lambda) {
  SolverConfig cfg;
  cfg.engine = engine;
  cfg.threads = threads;
  cfg.objective = {Loss::logistic, lambda};
  return cfg;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// 25 000 examples split 80/20 gives the 20 000-example training set.
const std::pair<Dataset, Dataset>& dense_workload() {
  static const auto parts = split(generate_synthetic({.n = 25000, .d = 100}, 2024), 0.2, 2024);
  return parts;
}

// ---- 1 --------------------------------------------------------------------
Outcome ridge_oracle() {
  const auto ds = generate_synthetic({.n = 50, .d = 10, .task = Task::regression}, 7);
  SolverConfig cfg;
  cfg.objective = {Loss::ridge, 0.1};
  cfg.max_epochs = 500;
  cfg.tol = 1e-300;  // run all 500 epochs
  const auto start = Clock::now();
  const auto [model, report] = train(ds, cfg, flat());
  const double elapsed = seconds_since(start);
  const auto w_star = oracle::ridge_closed_form(ds, 0.1);
  const double rel = oracle::l2_distance(model.w, w_star) / oracle::l2_norm(w_star);
  // Stopping early only happens once alpha is bit-for-bit fixed; the rest of
  // the 500 epochs would all be no-ops.
  const bool full_run = report.epochs.size() == 500 || report.epochs.back().rel_change == 0.0;
  return pass_if(rel <= 1e-4 && elapsed < 1.0 && full_run,
                 fmt("relative L2 error %.3e (<= 1e-4) after %zu epochs%s, %.3f s (< 1 s)", rel,
                     report.epochs.size(),
                     report.epochs.size() < 500 ? " (alpha reached an exact fixed point)" : "",
                     elapsed));
}

// ---- 2 --------------------------------------------------------------------
Outcome subproblem_oracle() {
  Rng rng(99);
  const auto start = Clock::now();
  double worst[2] = {0.0, 0.0};
  for (int kind_index = 0; kind_index < 2; ++kind_index) {
    const Loss kind = kind_index == 0 ? Loss::ridge : Loss::logistic;
    for (int i = 0; i < 1000; ++i) {
      CoordState s;
      s.label = rng.uniform01() < 0.5 ? -1.0 : 1.0;
      if (kind == Loss::logistic) {
        s.alpha = s.label * rng.uniform01();
      } else {
        s.label *= 3.0 * rng.uniform01();
        s.alpha = 2.0 * rng.normal();
      }
      s.dot = 3.0 * rng.normal();
      s.norm_sq = 10.0 * rng.uniform01();
      s.n = 1 + rng.uniform_index(1000);
      const Objective obj{kind, std::pow(10.0, -4.0 * rng.uniform01())};
      const double ours = kind == Loss::ridge ? ridge_delta(s, obj) : logistic_delta(s, obj);
      worst[kind_index] = std::max(worst[kind_index], std::abs(ours - oracle::brute_force_delta(s, obj)));
    }
  }
  const double elapsed = seconds_since(start);
  return pass_if(worst[0] <= 1e-6 && worst[1] <= 1e-6 && elapsed < 30.0,
                 fmt("max |error| ridge %.2e, logistic %.2e (<= 1e-6) over 1000 states each, %.1f s (< 30 s)",
                     worst[0], worst[1], elapsed));
}

// ---- 3 --------------------------------------------------------------------
Outcome engine_agreement() {
  const auto& [tr, te] = dense_workload();
  struct Run {
    const char* name;
    Engine engine;
    std::size_t threads;
  };
  const Run runs[] = {{"sequential", Engine::sequential, 1},
                      {"static x4", Engine::static_partitioned, 4},
                      {"dynamic x4", Engine::dynamic_hierarchical, 4}};
  bool all_converged = true;
  double lo = INFINITY, hi = -INFINITY;
  std::string detail;
  for (const auto& r : runs) {
    auto cfg = logistic_config(r.engine, r.threads, 1e-3);
    cfg.max_epochs = 500;
    cfg.gamma = 1.0;
    const auto [model, report] = train(tr, cfg, flat());
    const double loss = evaluate_test_loss(model.w, te, cfg.objective);
    all_converged = all_converged && report.converged;
    lo = std::min(lo, loss);
    hi = std::max(hi, loss);
    detail += fmt("%s %s in %zu epochs, test loss %.6f; ", r.name,
                  report.converged ? "converged" : "DID NOT converge", report.epochs.size(), loss);
  }
  detail += fmt("spread %.2e (<= 5e-3)", hi - lo);
  return pass_if(all_converged && hi - lo <= 5e-3, detail);
}

// ---- 4 --------------------------------------------------------------------
Outcome single_thread_degeneracy() {
  const auto& tr = dense_workload().first;
  bool ok = true;
  std::string detail;
  for (auto bucket : {BucketMode::off(), BucketMode::on()}) {
    auto cfg = logistic_config(Engine::sequential, 1, 1e-3);
    cfg.max_epochs = 10;
    cfg.tol = 1e-300;
    cfg.seed = 31;
    cfg.bucket = bucket;
    const auto reference = train(tr, cfg, flat()).first.alpha;
    for (Engine e : {Engine::wild, Engine::dynamic_hierarchical}) {
      cfg.engine = e;
      cfg.gamma = 1.0;
      const bool same = train(tr, cfg, flat()).first.alpha == reference;
      ok = ok && same;
      detail += fmt("%s bucket=%s %s; ", std::string(to_string(e)).c_str(), bucket.to_string().c_str(),
                    same ? "identical" : "DIFFERS");
    }
  }
  return pass_if(ok, detail + "10 epochs, n=20000");
}

// ---- 5 --------------------------------------------------------------------
Outcome partition_trend() {
  const auto& tr = dense_workload().first;
  auto median_epochs = [&](Engine e, std::size_t threads) {
    std::vector<double> epochs;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      auto cfg = logistic_config(e, threads, 1e-3);
      cfg.max_epochs = 500;
      cfg.seed = seed;
      epochs.push_back(static_cast<double>(train(tr, cfg, flat()).second.epochs.size()));
    }
    return median(epochs);
  };
  const double s1 = median_epochs(Engine::static_partitioned, 1);
  const double s4 = median_epochs(Engine::static_partitioned, 4);
  const double s16 = median_epochs(Engine::static_partitioned, 16);
  const double s8 = median_epochs(Engine::static_partitioned, 8);
  const double d8 = median_epochs(Engine::dynamic_hierarchical, 8);
  return pass_if(s1 <= s4 && s4 <= s16 && d8 <= s8,
                 fmt("median epochs over 5 seeds: static 1/4/16 partitions = %g/%g/%g "
                     "(non-decreasing), dynamic x8 = %g <= static x8 = %g",
                     s1, s4, s16, d8, s8));
}

// ---- 6 --------------------------------------------------------------------
Outcome exactly_once() {
  const auto ds = generate_synthetic({.n = 2003, .d = 10, .sparsity = 0.5}, 5);
  std::vector<std::size_t> all(ds.n());
  std::iota(all.begin(), all.end(), 0);
  std::size_t epochs_checked = 0;
  bool ok = true;
  for (Engine e : {Engine::sequential, Engine::wild, Engine::static_partitioned,
                   Engine::dynamic_hierarchical}) {
    for (std::size_t threads : {1u, 2u, 4u, 8u}) {
      for (auto bucket : {BucketMode::off(), BucketMode::on()}) {
        auto cfg = logistic_config(e, threads, 0.01);
        cfg.max_epochs = 3;
        cfg.tol = 1e-300;
        cfg.bucket = bucket;
        VisitTrace trace;
        train(ds, cfg, flat(), &trace);
        for (const auto& epoch : trace.epochs) {
          std::vector<std::size_t> seen;
          for (const auto& worker : epoch) seen.insert(seen.end(), worker.begin(), worker.end());
          std::sort(seen.begin(), seen.end());
          ok = ok && seen == all;
          ++epochs_checked;
        }
      }
    }
  }
  std::vector<std::uint32_t> order(10000);
  std::iota(order.begin(), order.end(), 0u);
  std::size_t claim_failures = 0;
  for (int round = 0; round < 100; ++round) {
    WorkQueue queue(order);
    std::vector<std::vector<std::uint32_t>> got(8);
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < 8; ++t) {
      threads.emplace_back([&, t] {
        while (auto b = queue.claim_next()) got[t].push_back(*b);
      });
    }
    for (auto& th : threads) th.join();
    std::vector<std::uint32_t> claimed;
    for (const auto& g : got) claimed.insert(claimed.end(), g.begin(), g.end());
    std::sort(claimed.begin(), claimed.end());
    claim_failures += claimed != order;
  }
  return pass_if(ok && claim_failures == 0,
                 fmt("%zu engine epochs traced (4 engines x threads 1/2/4/8 x bucket off/on), %s; "
                     "claim_next 10000 buckets x 8 threads x 100 rounds, %zu failures",
                     epochs_checked, ok ? "all exactly-once" : "COVERAGE VIOLATED", claim_failures));
}

// ---- 7 --------------------------------------------------------------------
Outcome bucket_mechanics() {
  TopologyOverrides o;
  o.cache_line_bytes = 64;
  const auto topo = synthetic_topology(o);
  const std::size_t size = resolve_bucket_size(BucketMode::on(), 1000, topo);

  const auto ds = generate_synthetic({.n = 1003, .d = 5}, 6);
  bool consecutive = true;
  for (Engine e : {Engine::sequential, Engine::wild, Engine::static_partitioned,
                   Engine::dynamic_hierarchical}) {
    auto cfg = logistic_config(e, e == Engine::sequential ? 1 : 4, 0.01);
    cfg.max_epochs = 2;
    cfg.tol = 1e-300;
    cfg.bucket = BucketMode::on();
    VisitTrace trace;
    train(ds, cfg, topo, &trace);
    for (const auto& epoch : trace.epochs) {
      for (const auto& worker : epoch) {
        for (std::size_t k = 0; k < worker.size();) {
          const std::size_t start = worker[k];
          const std::size_t len = std::min(size, ds.n() - start);
          consecutive = consecutive && start % size == 0;
          for (std::size_t i = 0; i < len && consecutive; ++i) {
            consecutive = k + i < worker.size() && worker[k + i] == start + i;
          }
          k += len;
        }
      }
    }
  }
  const std::size_t llc = 1u << 20;
  const bool enabled_ok = !buckets_enabled(llc / 8, llc, 8) && buckets_enabled(llc / 8 + 1, llc, 8) &&
                          !buckets_enabled(1000, llc, 8) &&
                          !buckets_enabled(kBucketFallbackEntries, std::nullopt, 8) &&
                          buckets_enabled(kBucketFallbackEntries + 1, std::nullopt, 8);
  return pass_if(size == 8 && consecutive && enabled_ok,
                 fmt("bucket size %zu (== 8); visit traces %s; buckets_enabled boundaries %s "
                     "(n*8 <= llc off, n*8 > llc on, 500000-entry fallback)",
                     size, consecutive ? "consecutive within buckets" : "NOT consecutive",
                     enabled_ok ? "correct" : "WRONG"));
}

// ---- 8 --------------------------------------------------------------------
Outcome scaling(const std::string& artifact) {
  const auto topo = probe();
  const unsigned hw = std::thread::hardware_concurrency();
  const auto ds = generate_synthetic({.n = 200000, .d = 100}, 8);
  auto epoch_time = [&](std::size_t threads) {
    auto cfg = logistic_config(Engine::dynamic_hierarchical, threads, 1e-3);
    cfg.max_epochs = 5;
    cfg.tol = 1e-300;
    const auto report = train(ds, cfg, topo).second;
    std::vector<double> per_epoch;
    double prev = 0.0;
    for (const auto& r : report.epochs) {
      per_epoch.push_back(r.time_s - prev);
      prev = r.time_s;
    }
    return median(per_epoch);
  };
  const double t1 = epoch_time(1);
  const double t4 = epoch_time(4);
  const double ratio = t4 / t1;
  const std::string machine = fmt("hardware threads %u; %s", hw, describe(topo).c_str());
  if (!artifact.empty()) {
    std::ofstream out(artifact);
    out << "dynamic engine per-epoch wall time, dense synthetic n=200000 d=100, logistic lambda=1e-3\n"
        << "machine: " << machine << '\n'
        << "threads,median_epoch_s\n"
        << "1," << format_real(t1) << "\n4," << format_real(t4) << '\n'
        << "ratio_4_over_1," << format_real(ratio) << '\n';
  }
  const std::string detail = fmt("4-thread/1-thread epoch time %.3f (%.4f s / %.4f s), target <= 0.6; %s",
                                 ratio, t4, t1, machine.c_str());
  if (topo.total_cores() < 4 || hw < 4) {
    return {Outcome::Status::info, "not gated: fewer than 4 cores. " + detail};
  }
  return {ratio <= 0.6 ? Outcome::Status::pass : Outcome::Status::fail, "not gated: " + detail};
}

// ---- 9 --------------------------------------------------------------------
Outcome gap_sanity() {
  const auto ds = generate_synthetic({.n = 5000, .d = 50}, 9);
  const Objective obj{Loss::logistic, 1e-3};
  const std::vector<double> alpha0(ds.n(), 0.0), w0(ds.d(), 0.0);
  const double gap0 = duality_gap(alpha0, w0, ds, obj);
  auto cfg = logistic_config(Engine::sequential, 1, 1e-3);
  cfg.max_epochs = 100;
  cfg.tol = 1e-6;
  cfg.eval_objective = true;
  const auto report = train(ds, cfg, flat()).second;
  std::size_t violations = 0;
  double worst = 0.0;
  for (std::size_t k = 1; k < report.epochs.size(); ++k) {
    const double rise = report.epochs[k].gap - report.epochs[k - 1].gap;
    if (rise > 1e-9) ++violations;
    worst = std::max(worst, rise);
  }
  const double gap0_err = std::abs(gap0 - std::log(2.0));
  return pass_if(violations == 0 && gap0_err <= 1e-12,
                 fmt("gap(0,0) - ln 2 = %.1e (<= 1e-12); %zu epochs, %zu rises above 1e-9 "
                     "(largest step change %.2e), final gap %.2e",
                     gap0_err, report.epochs.size(), violations, worst, report.epochs.back().gap));
}

}  // namespace

int main(int argc, char** argv) {
  std::string artifact;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--artifact") artifact = argv[i + 1];
  }
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"ridge oracle equivalence", ridge_oracle},
      {"subproblem oracle", subproblem_oracle},
      {"engine agreement", engine_agreement},
      {"single-thread degeneracy", single_thread_degeneracy},
      {"partition-count trend", partition_trend},
      {"exactly-once coverage", exactly_once},
      {"bucket mechanics", bucket_mechanics},
      {"per-epoch scaling", [&] { return scaling(artifact); }},
      {"duality-gap sanity", gap_sanity},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {Outcome::Status::fail, std::string("exception: ") + e.what()};
    }
    const bool gated = i != 7;
    const char* tag = o.status == Outcome::Status::pass ? "PASS"
                      : o.status == Outcome::Status::info ? "INFO"
                                                          : "FAIL";
    if (o.status == Outcome::Status::fail && gated) ++failures;
    std::printf("[%s] %zu %s: %s (%.1f s)\n", tag, i + 1, criteria[i].first, o.detail.c_str(),
                seconds_since(start));
    std::fflush(stdout);
  }
  std::printf("%d gated criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
