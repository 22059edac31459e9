#include "sdca/data.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sdca/partition.hpp"
#include "sdca/rng.hpp"

namespace sdca {

Dataset Dataset::dense(std::size_t n, std::size_t d, std::vector<double> values,
                       std::vector<double> labels) {
  if (labels.size() != n) {
    throw DataError("dense dataset: expected " + std::to_string(n) + " labels, got " +
                    std::to_string(labels.size()));
  }
  if (values.size() != n * d) {
    throw DataError("dense dataset: expected n*d = " + std::to_string(n * d) +
                    " values, got " + std::to_string(values.size()));
  }
  Dataset ds;
  ds.d_ = d;
  ds.storage_ = StorageKind::dense;
  ds.values_ = std::move(values);
  ds.labels_ = std::move(labels);
  return ds;
}

Dataset Dataset::sparse(std::size_t d, std::vector<std::size_t> offsets,
                        std::vector<std::uint32_t> indices, std::vector<double> values,
                        std::vector<double> labels) {
  const std::size_t n = labels.size();
  if (offsets.size() != n + 1 || offsets.front() != 0 || offsets.back() != values.size()) {
    throw DataError("sparse dataset: offsets do not describe " + std::to_string(n) +
                    " examples");
  }
  if (indices.size() != values.size()) {
    throw DataError("sparse dataset: index and value arrays differ in length");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (offsets[j] > offsets[j + 1]) throw DataError("sparse dataset: offsets decrease");
    for (std::size_t k = offsets[j]; k < offsets[j + 1]; ++k) {
      if (indices[k] >= d) {
        throw DataError("sparse dataset: feature index " + std::to_string(indices[k]) +
                        " out of range for d=" + std::to_string(d) + " in example " +
                        std::to_string(j));
      }
      if (k > offsets[j] && indices[k] <= indices[k - 1]) {
        throw DataError("sparse dataset: indices not strictly increasing in example " +
                        std::to_string(j));
      }
    }
  }
  Dataset ds;
  ds.d_ = d;
  ds.storage_ = StorageKind::sparse;
  ds.offsets_ = std::move(offsets);
  ds.indices_ = std::move(indices);
  ds.values_ = std::move(values);
  ds.labels_ = std::move(labels);
  return ds;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  std::vector<double> labels;
  labels.reserve(rows.size());
  for (auto j : rows) labels.push_back(labels_.at(j));

  if (storage_ == StorageKind::dense) {
    std::vector<double> values;
    values.reserve(rows.size() * d_);
    for (auto j : rows) {
      auto x = example(j).values;
      values.insert(values.end(), x.begin(), x.end());
    }
    return dense(rows.size(), d_, std::move(values), std::move(labels));
  }

  std::vector<std::size_t> offsets{0};
  std::vector<std::uint32_t> indices;
  std::vector<double> values;
  for (auto j : rows) {
    auto x = example(j);
    indices.insert(indices.end(), x.indices.begin(), x.indices.end());
    values.insert(values.end(), x.values.begin(), x.values.end());
    offsets.push_back(values.size());
  }
  return sparse(d_, std::move(offsets), std::move(indices), std::move(values),
                std::move(labels));
}

Dataset Dataset::to_dense() const {
  if (storage_ == StorageKind::dense) return *this;
  std::vector<double> values(n() * d_, 0.0);
  for (std::size_t j = 0; j < n(); ++j) {
    auto x = example(j);
    for (std::size_t k = 0; k < x.nnz(); ++k) values[j * d_ + x.indices[k]] = x.values[k];
  }
  return dense(n(), d_, std::move(values), labels_);
}

void SyntheticSpec::validate() const {
  if (n < 1) throw std::invalid_argument("synthetic spec: n must be >= 1");
  if (d < 1) throw std::invalid_argument("synthetic spec: d must be >= 1");
  if (!(sparsity > 0.0 && sparsity <= 1.0)) {
    throw std::invalid_argument("synthetic spec: sparsity must be in (0, 1]");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw std::invalid_argument("synthetic spec: noise_sigma must be >= 0");
  }
  if (d > std::numeric_limits<std::uint32_t>::max()) {
    throw std::invalid_argument("synthetic spec: d exceeds 32-bit feature indices");
  }
}

namespace {

double make_label(double margin, double noise, Task task) {
  const double z = margin + noise;
  if (task == Task::regression) return z;
  return z < 0.0 ? -1.0 : 1.0;
}

}  // namespace

Dataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);

  std::vector<double> truth(spec.d);
  for (auto& v : truth) v = rng.normal();

  std::vector<double> labels(spec.n);

  if (spec.sparsity >= 1.0) {
    std::vector<double> values(spec.n * spec.d);
    for (std::size_t j = 0; j < spec.n; ++j) {
      double margin = 0.0;
      for (std::size_t i = 0; i < spec.d; ++i) {
        const double v = rng.normal();
        values[j * spec.d + i] = v;
        margin += v * truth[i];
      }
      labels[j] = make_label(margin, spec.noise_sigma * rng.normal(), spec.task);
    }
    return Dataset::dense(spec.n, spec.d, std::move(values), std::move(labels));
  }

  std::vector<std::size_t> offsets{0};
  offsets.reserve(spec.n + 1);
  std::vector<std::uint32_t> indices;
  std::vector<double> values;
  const auto expected = static_cast<std::size_t>(spec.sparsity * spec.d * spec.n * 1.05) + 16;
  indices.reserve(expected);
  values.reserve(expected);
  for (std::size_t j = 0; j < spec.n; ++j) {
    double margin = 0.0;
    for (std::size_t i = 0; i < spec.d; ++i) {
      if (rng.uniform01() < spec.sparsity) {
        const double v = rng.normal();
        indices.push_back(static_cast<std::uint32_t>(i));
        values.push_back(v);
        margin += v * truth[i];
      }
    }
    offsets.push_back(values.size());
    labels[j] = make_label(margin, spec.noise_sigma * rng.normal(), spec.task);
  }
  return Dataset::sparse(spec.d, std::move(offsets), std::move(indices), std::move(values),
                         std::move(labels));
}

std::vector<double> column_norms(const Dataset& ds) {
  std::vector<double> norms(ds.n());
  for (std::size_t j = 0; j < ds.n(); ++j) {
    double acc = 0.0;
    for (double v : ds.example(j).values) acc += v * v;
    norms[j] = acc;
  }
  return norms;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("split: test fraction must be in (0, 1)");
  }
  const std::size_t n = ds.n();
  const auto test_n = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  if (n < 2 || test_n == 0 || test_n >= n) {
    throw std::invalid_argument("split: fraction " + std::to_string(test_fraction) +
                                " leaves an empty side for n=" + std::to_string(n));
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  shuffle(std::span<std::size_t>(perm), rng);
  const std::size_t train_n = n - test_n;
  auto train = ds.subset(std::span<const std::size_t>(perm).first(train_n));
  auto test = ds.subset(std::span<const std::size_t>(perm).subspan(train_n));
  return {std::move(train), std::move(test)};
}

}  // namespace sdca
