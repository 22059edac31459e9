#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sdca {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class StorageKind { dense, sparse };

/// Read-only view of one training example x_j.
///
/// Dense examples expose all d values and an empty index list. Sparse examples
/// expose parallel (feature index, value) lists with strictly increasing
/// indices.
struct ExampleView {
  std::span<const std::uint32_t> indices;
  std::span<const double> values;
  bool dense = false;

  std::size_t nnz() const { return values.size(); }
};

inline double dot(const ExampleView& x, std::span<const double> w) {
  double acc = 0.0;
  if (x.dense) {
    for (std::size_t i = 0; i < x.values.size(); ++i) acc += x.values[i] * w[i];
  } else {
    for (std::size_t k = 0; k < x.values.size(); ++k) acc += x.values[k] * w[x.indices[k]];
  }
  return acc;
}

/// w += scale * x
inline void axpy(double scale, const ExampleView& x, std::span<double> w) {
  if (x.dense) {
    for (std::size_t i = 0; i < x.values.size(); ++i) w[i] += scale * x.values[i];
  } else {
    for (std::size_t k = 0; k < x.values.size(); ++k) w[x.indices[k]] += scale * x.values[k];
  }
}

/// Immutable example-major training matrix A = [x_1 ... x_n] with labels.
///
/// Dense storage keeps n*d values with example j at [j*d, (j+1)*d). Sparse
/// storage is a compressed layout: example j owns entries
/// [offsets[j], offsets[j+1]) of the index and value arrays. Indices are
/// 0-based. Safe to share across threads.
class Dataset {
 public:
  Dataset() = default;

  static Dataset dense(std::size_t n, std::size_t d, std::vector<double> values,
                       std::vector<double> labels);
  static Dataset sparse(std::size_t d, std::vector<std::size_t> offsets,
                        std::vector<std::uint32_t> indices, std::vector<double> values,
                        std::vector<double> labels);

  std::size_t n() const { return labels_.size(); }
  std::size_t d() const { return d_; }
  StorageKind storage() const { return storage_; }
  std::size_t nnz() const { return values_.size(); }

  ExampleView example(std::size_t j) const {
    if (storage_ == StorageKind::dense) {
      return {{}, std::span<const double>(values_).subspan(j * d_, d_), true};
    }
    const std::size_t begin = offsets_[j];
    const std::size_t count = offsets_[j + 1] - begin;
    return {std::span<const std::uint32_t>(indices_).subspan(begin, count),
            std::span<const double>(values_).subspan(begin, count), false};
  }

  std::span<const double> labels() const { return labels_; }
  double label(std::size_t j) const { return labels_[j]; }

  /// Copy of the examples at the given positions, in that order.
  Dataset subset(std::span<const std::size_t> rows) const;
  /// Dense copy of any dataset.
  Dataset to_dense() const;

  bool operator==(const Dataset&) const = default;

 private:
  std::size_t d_ = 0;
  StorageKind storage_ = StorageKind::dense;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> indices_;
  std::vector<double> values_;
  std::vector<double> labels_;
};

enum class Task { classification, regression };

struct SyntheticSpec {
  std::size_t n = 1000;
  std::size_t d = 100;
  double sparsity = 1.0;  ///< fraction of nonzero features; 1.0 gives dense storage
  double noise_sigma = 1.0;
  Task task = Task::classification;

  void validate() const;
};

/// Linear-teacher synthetic workload.
///
/// Draw order for a fixed seed: w* (d normals), then per example its values
/// (dense: d normals; sparse: per feature one uniform for the
/// Bernoulli(sparsity) mask and one normal if kept) followed by its label
/// noise draw.
Dataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

/// Squared Euclidean norm of every example.
std::vector<double> column_norms(const Dataset& ds);

/// Seeded random split; test gets round(test_fraction * n) examples.
std::pair<Dataset, Dataset> split(const Dataset& ds, double test_fraction, std::uint64_t seed);

// LibSVM / SVMLight text: `label idx:val idx:val ...`, 1-based strictly
// increasing indices. Labels that are all in {0,1} are remapped to {-1,+1}.
Dataset parse_libsvm(std::istream& in, std::optional<std::size_t> expected_d = std::nullopt);
Dataset load_libsvm(const std::filesystem::path& path,
                    std::optional<std::size_t> expected_d = std::nullopt);
/// Values are written in shortest round-trip decimal form.
void write_libsvm(std::ostream& out, const Dataset& ds);
void save_libsvm(const std::filesystem::path& path, const Dataset& ds);

// Dense binary: "GLMD", u32 version=1, u64 n, u64 d, n*d f64 example-major,
// n f64 labels; all little-endian. Sparse datasets are densified on write.
inline constexpr std::uint32_t kBinaryVersion = 1;
void write_binary(std::ostream& out, const Dataset& ds);
Dataset read_binary(std::istream& in);
void save_binary(const std::filesystem::path& path, const Dataset& ds);
Dataset load_binary(const std::filesystem::path& path);

/// Detects the dense binary format by its magic bytes, otherwise parses LibSVM.
Dataset load_dataset(const std::filesystem::path& path,
                     std::optional<std::size_t> expected_d = std::nullopt);

}  // namespace sdca
