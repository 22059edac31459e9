#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sdca/metrics.hpp"
#include "sdca/solver.hpp"

namespace sdca::cli {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

const std::vector<std::string> kEngineNames{"sequential", "wild", "static", "dynamic"};

struct TopologyFlags {
  std::string groups;
  std::optional<std::size_t> cache_line;
  std::optional<std::size_t> llc_bytes;
  std::optional<std::size_t> data_group;

  void add_to(CLI::App& app) {
    app.add_option("--groups", groups, "Cores per group, e.g. 8,8,8,8 (overrides the host)");
    app.add_option("--cache-line", cache_line, "Cache line size in bytes");
    app.add_option("--llc-bytes", llc_bytes, "Last-level cache size in bytes");
    app.add_option("--data-group", data_group, "Group holding the training data");
  }

  // Environment first, flags on top.
  SystemTopology resolve() const {
    auto o = overrides_from_env();
    if (!groups.empty()) o.group_cores = parse_group_layout(groups);
    if (cache_line) o.cache_line_bytes = *cache_line;
    if (llc_bytes) o.llc_bytes = *llc_bytes;
    if (data_group) o.data_group = *data_group;
    return probe(o);
  }
};

struct SolverFlags {
  std::string engine = "sequential";
  std::size_t threads = 1;
  std::string objective = "logistic";
  double lambda = 1.0;
  double tol = 1e-3;
  std::size_t max_epochs = 100;
  std::string bucket = "auto";
  double gamma = 1.0;
  std::optional<double> sigma;
  std::uint64_t seed = 0;
  std::string pin = "none";
  bool no_oversubscribe = false;

  void add_to(CLI::App& app, bool with_engine) {
    if (with_engine) {
      app.add_option("--engine", engine, "sequential | wild | static | dynamic")
          ->check(CLI::IsMember(kEngineNames));
      app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
      app.add_option("--seed", seed, "Shuffle seed");
    }
    app.add_option("--objective", objective, "logistic | ridge")
        ->check(CLI::IsMember({"logistic", "ridge"}));
    app.add_option("--lambda", lambda, "L2 regularization strength");
    app.add_option("--tol", tol, "Relative change in alpha that counts as converged");
    app.add_option("--max-epochs", max_epochs, "Epoch limit");
    app.add_option("--bucket", bucket, "auto | on | off | bucket size");
    app.add_option("--gamma", gamma, "Merge weight for replica updates, in (0, 1]");
    app.add_option("--sigma", sigma, "Local subproblem scaling (default: gamma x replicas)");
    app.add_option("--pin", pin, "Thread pinning: none | group | core")
        ->check(CLI::IsMember({"none", "group", "core"}));
    app.add_flag("--no-oversubscribe", no_oversubscribe,
                 "Fail instead of placing more threads than cores");
  }

  SolverConfig resolve() const {
    SolverConfig cfg;
    cfg.engine = parse_engine(engine);
    cfg.threads = threads;
    cfg.objective = {parse_loss(objective), lambda};
    cfg.tol = tol;
    cfg.max_epochs = max_epochs;
    cfg.bucket = BucketMode::parse(bucket);
    cfg.gamma = gamma;
    cfg.sigma = sigma;
    cfg.seed = seed;
    cfg.pin = parse_pin_mode(pin);
    cfg.oversubscribe = !no_oversubscribe;
    cfg.validate();
    return cfg;
  }
};

std::optional<double> median(std::vector<double> values) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

std::string cell_value(const std::optional<double>& v) { return v ? format_real(*v) : "NA"; }

// ---- generate -------------------------------------------------------------

struct GenerateArgs {
  SyntheticSpec spec;
  std::string task = "classification";
  std::uint64_t seed = 0;
  std::string format;
  std::string out;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  SyntheticSpec spec = a.spec;
  spec.task = a.task == "regression" ? Task::regression : Task::classification;
  const auto ds = generate_synthetic(spec, a.seed);
  const std::string format = a.format.empty() ? (spec.sparsity < 1.0 ? "libsvm" : "bin") : a.format;
  if (format == "bin") {
    save_binary(a.out, ds);
  } else {
    save_libsvm(a.out, ds);
  }
  out << "wrote " << a.out << " (" << format << "): n=" << ds.n() << " d=" << ds.d()
      << " nnz=" << ds.nnz() << '\n';
  return kExitConverged;
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  std::string dataset;
  std::optional<std::size_t> dim;
  SolverFlags solver;
  TopologyFlags topology;
  bool eval_objective = false;
  double test_fraction = 0.0;
  std::string out;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  auto cfg = a.solver.resolve();
  cfg.eval_objective = a.eval_objective;
  const auto topo = a.topology.resolve();

  const auto load_start = Clock::now();
  Dataset ds = load_dataset(a.dataset, a.dim);
  const double load_s = seconds_since(load_start);
  err << "loaded " << a.dataset << ": n=" << ds.n() << " d=" << ds.d() << " nnz=" << ds.nnz()
      << " in " << format_real(load_s) << " s (not included in training time)\n";

  std::optional<Dataset> test;
  if (a.test_fraction > 0.0) {
    auto parts = split(ds, a.test_fraction, cfg.seed);
    ds = std::move(parts.first);
    test = std::move(parts.second);
  }

  auto [model, report] = train(ds, cfg, topo);
  if (test) report.final_test_loss = evaluate_test_loss(model.w, *test, cfg.objective);

  if (a.out.empty()) {
    write_report_csv(out, report);
  } else {
    std::ofstream file(a.out);
    if (!file) throw DataError("cannot create " + a.out);
    write_report_csv(file, report);
  }

  err << describe_config(report) << '\n';
  for (const auto& w : report.warnings) err << "warning: " << w << '\n';
  err << (report.converged ? "converged" : "reached max epochs without converging") << " after "
      << report.epochs.size() << " epochs, " << format_real(report.total_time()) << " s\n";
  if (report.final_test_loss) err << "test loss: " << format_real(*report.final_test_loss) << '\n';
  return report.converged ? kExitConverged : kExitMaxEpochs;
}

// ---- bench ----------------------------------------------------------------

struct BenchArgs {
  std::string data;
  std::optional<std::size_t> dim;
  SyntheticSpec synthetic{.n = 20000, .d = 100};
  std::uint64_t data_seed = 42;
  std::string preset;
  std::vector<std::string> engines;
  std::vector<std::size_t> threads;
  std::vector<std::uint64_t> seeds;
  double test_fraction = 0.2;
  SolverFlags solver;
  TopologyFlags topology;
  std::string out;
};

void apply_preset(BenchArgs& a) {
  if (a.preset.empty()) return;
  std::vector<std::string> engines;
  std::vector<std::size_t> threads;
  if (a.preset == "scaling") {
    engines = {"wild", "dynamic"};
    threads = {1, 2, 4, 8};
  } else if (a.preset == "partitions") {
    engines = {"static", "dynamic"};
    threads = {1, 4, 8, 16};
  } else {
    throw std::invalid_argument("unknown preset '" + a.preset + "' (scaling | partitions)");
  }
  if (a.engines.empty()) a.engines = engines;
  if (a.threads.empty()) a.threads = threads;
  if (a.seeds.empty()) a.seeds = {1, 2, 3, 4, 5};
}

int cmd_bench(BenchArgs a, std::ostream& out, std::ostream& err) {
  apply_preset(a);
  ExperimentSpec spec;
  if (!a.data.empty()) spec.dataset_path = a.data;
  spec.synthetic = a.synthetic;
  spec.data_seed = a.data_seed;
  for (const auto& e : a.engines) spec.engines.push_back(parse_engine(e));
  if (spec.engines.empty()) spec.engines = {Engine::dynamic_hierarchical};
  spec.threads = a.threads.empty() ? std::vector<std::size_t>{1} : a.threads;
  spec.seeds = a.seeds.empty() ? std::vector<std::uint64_t>{1} : a.seeds;
  spec.test_fraction = a.test_fraction;
  spec.base = a.solver.resolve();
  spec.validate();

  const auto cells = run_bench(spec, a.topology.resolve(), err);
  if (a.out.empty()) {
    write_bench_csv(out, cells, spec.seeds.size());
  } else {
    std::ofstream file(a.out);
    if (!file) throw DataError("cannot create " + a.out);
    write_bench_csv(file, cells, spec.seeds.size());
  }
  return kExitConverged;
}

// ---- topology -------------------------------------------------------------

int cmd_topology(const TopologyFlags& flags, std::size_t threads, std::ostream& out) {
  const auto topo = flags.resolve();
  out << describe(topo) << '\n';
  out << "plan for " << threads << " threads: " << describe(plan_threads(threads, topo, true)) << '\n';
  return kExitConverged;
}

}  // namespace

void ExperimentSpec::validate() const {
  if (engines.empty()) throw std::invalid_argument("experiment: at least one engine is required");
  if (threads.empty()) throw std::invalid_argument("experiment: at least one thread count is required");
  if (seeds.empty()) throw std::invalid_argument("experiment: at least one seed is required");
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("experiment: test fraction must be in [0, 1)");
  }
  if (!dataset_path) synthetic.validate();
  base.validate();
}

std::vector<BenchCell> run_bench(const ExperimentSpec& spec, const SystemTopology& topo,
                                 std::ostream& log) {
  const auto load_start = Clock::now();
  Dataset ds = spec.dataset_path ? load_dataset(*spec.dataset_path)
                                 : generate_synthetic(spec.synthetic, spec.data_seed);
  log << "dataset: n=" << ds.n() << " d=" << ds.d() << " nnz=" << ds.nnz() << ", load "
      << format_real(seconds_since(load_start)) << " s (excluded)\n";
  std::optional<Dataset> test;
  if (spec.test_fraction > 0.0) {
    auto parts = split(ds, spec.test_fraction, spec.data_seed);
    ds = std::move(parts.first);
    test = std::move(parts.second);
  }

  std::vector<BenchCell> cells;
  for (Engine engine : spec.engines) {
    for (std::size_t threads : spec.threads) {
      BenchCell cell{.engine = engine, .threads = threads};
      std::vector<double> epochs, times, epoch_times, losses;
      for (std::uint64_t seed : spec.seeds) {
        auto cfg = spec.base;
        cfg.engine = engine;
        cfg.threads = threads;
        cfg.seed = seed;
        try {
          const auto [model, report] = train(ds, cfg, topo);
          ++cell.runs;
          cell.converged += report.converged;
          epochs.push_back(static_cast<double>(report.epochs.size()));
          times.push_back(report.total_time());
          epoch_times.push_back(report.total_time() / static_cast<double>(report.epochs.size()));
          if (test) losses.push_back(evaluate_test_loss(model.w, *test, cfg.objective));
        } catch (const std::exception& e) {
          if (cell.error.empty()) cell.error = e.what();
        }
      }
      cell.median_epochs = median(epochs);
      cell.median_time_s = median(times);
      cell.median_epoch_time_s = median(epoch_times);
      cell.median_test_loss = median(losses);
      log << to_string(engine) << " x" << threads << ": " << cell.runs << "/" << spec.seeds.size()
          << " runs, " << cell.converged << " converged";
      if (!cell.error.empty()) log << ", error: " << cell.error;
      log << '\n';
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchCell>& cells, std::size_t seeds) {
  out << kBenchCsvHeader << '\n';
  for (const auto& c : cells) {
    out << to_string(c.engine) << ',' << c.threads << ',' << seeds << ',' << c.runs << ','
        << c.converged << ',' << cell_value(c.median_epochs) << ',' << cell_value(c.median_time_s)
        << ',' << cell_value(c.median_epoch_time_s) << ',' << cell_value(c.median_test_loss) << '\n';
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Parallel SDCA trainer for L2-regularized GLMs", "sdca"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write a synthetic dataset");
  generate->add_option("--n", gen.spec.n, "Examples");
  generate->add_option("--d", gen.spec.d, "Features");
  generate->add_option("--sparsity", gen.spec.sparsity, "Fraction of nonzero features");
  generate->add_option("--noise", gen.spec.noise_sigma, "Label noise standard deviation");
  generate->add_option("--task", gen.task, "classification | regression")
      ->check(CLI::IsMember({"classification", "regression"}));
  generate->add_option("--seed", gen.seed, "Generator seed");
  generate->add_option("--format", gen.format, "bin | libsvm (default: bin if dense)")
      ->check(CLI::IsMember({"bin", "libsvm"}));
  generate->add_option("--out", gen.out, "Output path")->required();

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train on a dataset file and print the epoch log CSV");
  train_cmd->add_option("dataset", tr.dataset, "Dense binary or LibSVM file")->required();
  train_cmd->add_option("--dim", tr.dim, "Feature count for LibSVM input");
  tr.solver.add_to(*train_cmd, true);
  tr.topology.add_to(*train_cmd);
  train_cmd->add_flag("--eval-objective", tr.eval_objective, "Log primal, dual and gap each epoch");
  train_cmd->add_option("--test-fraction", tr.test_fraction, "Hold out this fraction for test loss");
  train_cmd->add_option("--out", tr.out, "CSV path (default: stdout)");

  BenchArgs be;
  auto* bench = app.add_subcommand("bench", "Sweep engines x thread counts x seeds, print medians");
  bench->add_option("--data", be.data, "Dataset file (default: synthetic)");
  bench->add_option("--n", be.synthetic.n, "Synthetic examples");
  bench->add_option("--d", be.synthetic.d, "Synthetic features");
  bench->add_option("--sparsity", be.synthetic.sparsity, "Synthetic sparsity");
  bench->add_option("--data-seed", be.data_seed, "Seed for the synthetic data and the split");
  bench->add_option("--preset", be.preset, "scaling | partitions");
  bench->add_option("--engines", be.engines, "Comma-separated engines")
      ->delimiter(',')
      ->check(CLI::IsMember(kEngineNames));
  bench->add_option("--threads", be.threads, "Comma-separated thread counts")->delimiter(',');
  bench->add_option("--seeds", be.seeds, "Comma-separated seeds")->delimiter(',');
  bench->add_option("--test-fraction", be.test_fraction, "Held-out fraction");
  be.solver.add_to(*bench, false);
  be.topology.add_to(*bench);
  bench->add_option("--out", be.out, "CSV path (default: stdout)");

  TopologyFlags topo_flags;
  std::size_t topo_threads = 1;
  auto* topology = app.add_subcommand("topology", "Show the detected topology and a thread plan");
  topo_flags.add_to(*topology);
  topology->add_option("--threads", topo_threads, "Threads to plan")->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return kExitConverged;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitError;
  }

  try {
    if (generate->parsed()) return cmd_generate(gen, out);
    if (train_cmd->parsed()) return cmd_train(tr, out, err);
    if (bench->parsed()) return cmd_bench(be, out, err);
    return cmd_topology(topo_flags, topo_threads, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace sdca::cli
