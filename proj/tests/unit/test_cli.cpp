#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "sdca/metrics.hpp"

namespace fs = std::filesystem;
using namespace sdca;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string temp(const std::string& name) {
  return (fs::temp_directory_path() / ("sdca_cli_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Drops the time_s column so runs can be compared.
std::string without_times(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const auto a = line.find(',');
    const auto b = line.find(',', a + 1);
    out << line.substr(0, a) << line.substr(b) << '\n';
  }
  return out.str();
}

}  // namespace

TEST(CliGenerate, DenseBinarySize) {
  const auto path = temp("dense.bin");
  const auto r = run_cli({"generate", "--n", "1000", "--d", "100", "--sparsity", "1.0", "--out", path});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(fs::file_size(path), 24u + 1000u * 100u * 8u + 1000u * 8u);
  EXPECT_NE(r.out.find("n=1000 d=100"), std::string::npos);
  fs::remove(path);
}

TEST(CliGenerate, SparseLibsvmIsDeterministic) {
  const auto a = temp("a.svm");
  const auto b = temp("b.svm");
  for (const auto& p : {a, b}) {
    ASSERT_EQ(run_cli({"generate", "--n", "3000", "--d", "1000", "--sparsity", "0.01", "--format",
                       "libsvm", "--seed", "4", "--out", p})
                  .code,
              0);
  }
  const auto text = slurp(a);
  EXPECT_EQ(text, slurp(b));
  const auto ds = load_libsvm(a, 1000);
  const double mean = static_cast<double>(ds.nnz()) / 3000.0;
  EXPECT_NEAR(mean, 10.0, 3 * std::sqrt(1000 * 0.01 * 0.99 / 3000.0));
  fs::remove(a);
  fs::remove(b);
}

TEST(CliTrain, RidgeOracleProblemConverges) {
  const auto data = temp("ridge.bin");
  ASSERT_EQ(run_cli({"generate", "--n", "50", "--d", "10", "--task", "regression", "--seed", "1",
                     "--out", data})
                .code,
            0);
  const auto r = run_cli({"train", data, "--engine", "sequential", "--objective", "ridge", "--lambda",
                          "0.1", "--max-epochs", "500", "--tol", "1e-6", "--eval-objective"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream csv(r.out);
  const auto records = parse_report_csv(csv);
  ASSERT_FALSE(records.empty());
  EXPECT_TRUE(records.back().converged);
  EXPECT_LT(records.back().gap, 1e-6);
  fs::remove(data);
}

TEST(CliTrain, ExitCodes) {
  const auto data = temp("cls.bin");
  ASSERT_EQ(run_cli({"generate", "--n", "2000", "--d", "20", "--seed", "2", "--out", data}).code, 0);
  const auto capped = run_cli({"train", data, "--max-epochs", "1", "--lambda", "0.001"});
  EXPECT_EQ(capped.code, 2);
  const auto wild = run_cli({"train", data, "--engine", "wild", "--threads", "16", "--lambda", "0.01"});
  EXPECT_TRUE(wild.code == 0 || wild.code == 2) << wild.err;
  const auto bad = run_cli({"train", data, "--engine", "turbo"});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("--engine"), std::string::npos);
  EXPECT_EQ(run_cli({"train", temp("missing.bin")}).code, 1);
  EXPECT_EQ(run_cli({"train", data, "--gamma", "2"}).code, 1);
  EXPECT_EQ(run_cli({"train", data, "--bucket", "huge"}).code, 1);
  EXPECT_EQ(run_cli({}).code, 1);
  EXPECT_EQ(run_cli({"train", "--help"}).code, 0);
  fs::remove(data);
}

TEST(CliTrain, RepeatableExceptTimes) {
  const auto data = temp("rep.bin");
  ASSERT_EQ(run_cli({"generate", "--n", "1500", "--d", "20", "--seed", "3", "--out", data}).code, 0);
  const std::vector<std::string> args{"train", data, "--engine", "static", "--threads", "4",
                                      "--lambda", "0.01", "--seed", "9", "--eval-objective",
                                      "--test-fraction", "0.2", "--bucket", "on"};
  const auto a = run_cli(args);
  const auto b = run_cli(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(without_times(a.out), without_times(b.out));
  EXPECT_NE(a.err.find("test loss"), std::string::npos);
  fs::remove(data);
}

TEST(CliTrain, WritesCsvFile) {
  const auto data = temp("file.bin");
  const auto csv = temp("file.csv");
  ASSERT_EQ(run_cli({"generate", "--n", "200", "--d", "5", "--out", data}).code, 0);
  const auto r = run_cli({"train", data, "--out", csv, "--groups", "2,2", "--engine", "dynamic",
                          "--threads", "4"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(slurp(csv).rfind(kReportCsvHeader, 0), 0u);
  fs::remove(data);
  fs::remove(csv);
}

TEST(CliBench, SingleCellAndNaCells) {
  const auto one = run_cli({"bench", "--n", "500", "--d", "10", "--engines", "dynamic", "--threads",
                            "2", "--seeds", "1", "--lambda", "0.01"});
  ASSERT_EQ(one.code, 0) << one.err;
  std::istringstream rows(one.out);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(rows, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0], cli::kBenchCsvHeader);
  EXPECT_EQ(lines[1].rfind("dynamic,2,1,1,", 0), 0u);

  const auto na = run_cli({"bench", "--n", "500", "--d", "10", "--engines", "static,dynamic",
                           "--threads", "1,64", "--seeds", "1,2", "--groups", "2",
                           "--no-oversubscribe", "--lambda", "0.01"});
  ASSERT_EQ(na.code, 0) << na.err;
  EXPECT_NE(na.out.find("static,64,2,0,0,NA,NA,NA,NA"), std::string::npos) << na.out;
  EXPECT_NE(na.out.find("dynamic,1,2,2,"), std::string::npos);
}

TEST(CliTopology, ShowsGroupsAndPlan) {
  const auto r = run_cli({"topology", "--groups", "4,4", "--threads", "6"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("plan for 6 threads"), std::string::npos);
}
