#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdca/config.hpp"
#include "sdca/data.hpp"
#include "sdca/objective.hpp"
#include "sdca/topology.hpp"

namespace sdca {

/// One row of the training log. primal/dual/gap are NaN when objective
/// evaluation is off.
struct EpochRecord {
  std::size_t epoch = 0;
  double time_s = 0.0;  ///< cumulative training time, evaluation excluded
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  double rel_change = 0.0;
  bool converged = false;

  /// Field-wise equality that treats two NaNs as equal.
  bool operator==(const EpochRecord& other) const;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  SolverConfig config;
  SystemTopology topology;
  ThreadPlan plan;
  std::size_t bucket_size = 1;
  double sigma = 1.0;
  bool converged = false;
  std::optional<double> final_test_loss;
  std::vector<std::string> warnings;

  double total_time() const { return epochs.empty() ? 0.0 : epochs.back().time_s; }
};

/// Mean unregularized loss of w over a held-out set.
double evaluate_test_loss(std::span<const double> w, const Dataset& test, const Objective& obj);

/// Appends the next EpochRecord. epoch_seconds is this epoch's training time;
/// the record stores the running total.
void record_epoch(TrainReport& report, double epoch_seconds, const Model& model, const Dataset& ds,
                  const Objective& obj, double rel_change, bool converged, bool evaluate);

inline constexpr const char* kReportCsvHeader = "epoch,time_s,primal,dual,gap,rel_change,converged";

/// %.17g-style decimal for reals; "nan"/"inf"/"-inf" for non-finite values.
std::string format_real(double value);
double parse_real(std::string_view text);

void write_report_csv(std::ostream& out, const TrainReport& report);
std::vector<EpochRecord> parse_report_csv(std::istream& in);

/// Human-readable one-line summary of the resolved configuration.
std::string describe_config(const TrainReport& report);

}  // namespace sdca
