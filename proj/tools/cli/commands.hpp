#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sdca/config.hpp"
#include "sdca/data.hpp"
#include "sdca/topology.hpp"

namespace sdca::cli {

inline constexpr int kExitConverged = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitMaxEpochs = 2;

/// Runs `sdca <subcommand> ...` with args excluding the program name.
/// Returns the process exit code; never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// One benchmark sweep: every engine x thread count, each repeated over seeds.
struct ExperimentSpec {
  std::optional<std::string> dataset_path;
  SyntheticSpec synthetic;
  std::uint64_t data_seed = 42;
  std::vector<Engine> engines;
  std::vector<std::size_t> threads;
  std::vector<std::uint64_t> seeds;
  double test_fraction = 0.2;
  SolverConfig base;  ///< engine, threads and seed are overwritten per cell

  void validate() const;
};

struct BenchCell {
  Engine engine = Engine::sequential;
  std::size_t threads = 1;
  std::size_t runs = 0;       ///< runs that finished without error
  std::size_t converged = 0;
  std::optional<double> median_epochs;
  std::optional<double> median_time_s;
  std::optional<double> median_epoch_time_s;
  std::optional<double> median_test_loss;
  std::string error;  ///< first failure, if any run failed
};

inline constexpr const char* kBenchCsvHeader =
    "engine,threads,seeds,runs,converged,median_epochs,median_time_s,median_epoch_time_s,"
    "median_test_loss";

/// Runs the sweep one training at a time. A failing run is recorded in its
/// cell and the sweep continues.
std::vector<BenchCell> run_bench(const ExperimentSpec& spec, const SystemTopology& topo,
                                 std::ostream& log);
void write_bench_csv(std::ostream& out, const std::vector<BenchCell>& cells, std::size_t seeds);

}  // namespace sdca::cli
