#include "sdca/metrics.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace sdca {

namespace {

bool same_real(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

}  // namespace

bool EpochRecord::operator==(const EpochRecord& o) const {
  return epoch == o.epoch && same_real(time_s, o.time_s) && same_real(primal, o.primal) &&
         same_real(dual, o.dual) && same_real(gap, o.gap) && same_real(rel_change, o.rel_change) &&
         converged == o.converged;
}

double evaluate_test_loss(std::span<const double> w, const Dataset& test, const Objective& obj) {
  return mean_loss(w, test, obj.kind);
}

void record_epoch(TrainReport& report, double epoch_seconds, const Model& model, const Dataset& ds,
                  const Objective& obj, double rel_change, bool converged, bool evaluate) {
  EpochRecord rec;
  rec.epoch = report.epochs.size() + 1;
  rec.time_s = report.total_time() + epoch_seconds;
  rec.rel_change = rel_change;
  rec.converged = converged;
  if (evaluate) {
    rec.primal = primal_value(model.w, ds, obj);
    rec.dual = dual_value(model.alpha, model.w, ds, obj);
    rec.gap = rec.primal - rec.dual;
  } else {
    rec.primal = rec.dual = rec.gap = std::numeric_limits<double>::quiet_NaN();
  }
  report.epochs.push_back(rec);
}

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

double parse_real(std::string_view text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("not a real number: '" + std::string(text) + "'");
  }
  return value;
}

void write_report_csv(std::ostream& out, const TrainReport& report) {
  out << kReportCsvHeader << '\n';
  for (const auto& r : report.epochs) {
    out << r.epoch << ',' << format_real(r.time_s) << ',' << format_real(r.primal) << ','
        << format_real(r.dual) << ',' << format_real(r.gap) << ',' << format_real(r.rel_change)
        << ',' << (r.converged ? 1 : 0) << '\n';
  }
}

std::vector<EpochRecord> parse_report_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kReportCsvHeader) {
    throw std::invalid_argument("report CSV: missing or unexpected header");
  }
  std::vector<EpochRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      cells.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (cells.size() != 7) {
      throw std::invalid_argument("report CSV line " + std::to_string(line_no) + ": expected 7 cells");
    }
    EpochRecord r;
    auto [ptr, ec] = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), r.epoch);
    if (ec != std::errc() || ptr != cells[0].data() + cells[0].size()) {
      throw std::invalid_argument("report CSV line " + std::to_string(line_no) + ": bad epoch");
    }
    r.time_s = parse_real(cells[1]);
    r.primal = parse_real(cells[2]);
    r.dual = parse_real(cells[3]);
    r.gap = parse_real(cells[4]);
    r.rel_change = parse_real(cells[5]);
    if (cells[6] != "0" && cells[6] != "1") {
      throw std::invalid_argument("report CSV line " + std::to_string(line_no) + ": bad converged flag");
    }
    r.converged = cells[6] == "1";
    records.push_back(r);
  }
  return records;
}

std::string describe_config(const TrainReport& report) {
  const auto& c = report.config;
  std::ostringstream out;
  out << "engine=" << to_string(c.engine) << " objective=" << to_string(c.objective.kind)
      << " lambda=" << format_real(c.objective.lambda) << " tol=" << format_real(c.tol)
      << " max_epochs=" << c.max_epochs << " bucket=" << c.bucket.to_string() << "->"
      << report.bucket_size << " gamma=" << format_real(c.gamma)
      << " sigma=" << format_real(report.sigma) << " seed=" << c.seed << " pin=" << to_string(c.pin)
      << " " << describe(report.plan) << " | " << describe(report.topology);
  return out.str();
}

}  // namespace sdca
