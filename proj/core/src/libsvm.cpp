#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>

#include "sdca/data.hpp"

namespace sdca {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f'; }

/// from_chars rejects a leading '+', which LibSVM labels commonly carry.
bool parse_double(std::string_view tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  if (tok.empty() || tok.front() == '+' || tok.front() == '-') {
    if (tok.empty() || tok.front() == '+' || (tok.size() > 1 && tok[1] == '+')) return false;
  }
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_index(std::string_view tok, std::uint64_t& out) {
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return !tok.empty() && ec == std::errc() && ptr == end;
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw DataError("libsvm line " + std::to_string(line) + ": " + what);
}

void append_double(std::string& buf, double v) {
  std::array<char, 32> tmp{};
  auto [ptr, ec] = std::to_chars(tmp.data(), tmp.data() + tmp.size(), v);
  buf.append(tmp.data(), ptr);
}

template <typename T>
void write_le(std::ostream& out, const T* data, std::size_t count) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(T)));
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      std::array<char, sizeof(T)> bytes;
      std::memcpy(bytes.data(), &data[i], sizeof(T));
      std::reverse(bytes.begin(), bytes.end());
      out.write(bytes.data(), sizeof(T));
    }
  }
}

template <typename T>
void read_le(std::istream& in, T* data, std::size_t count) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(T)));
  if (!in) throw DataError("binary dataset: truncated file");
  if constexpr (std::endian::native != std::endian::little) {
    for (std::size_t i = 0; i < count; ++i) {
      auto* bytes = reinterpret_cast<char*>(&data[i]);
      std::reverse(bytes, bytes + sizeof(T));
    }
  }
}

constexpr std::array<char, 4> kMagic{'G', 'L', 'M', 'D'};

}  // namespace

Dataset parse_libsvm(std::istream& in, std::optional<std::size_t> expected_d) {
  std::vector<std::size_t> offsets{0};
  std::vector<std::uint32_t> indices;
  std::vector<double> values;
  std::vector<double> labels;
  std::uint64_t max_index = 0;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest(line);
    if (auto hash = rest.find('#'); hash != std::string_view::npos) rest = rest.substr(0, hash);

    auto next_token = [&rest]() {
      while (!rest.empty() && is_space(rest.front())) rest.remove_prefix(1);
      std::size_t len = 0;
      while (len < rest.size() && !is_space(rest[len])) ++len;
      auto tok = rest.substr(0, len);
      rest.remove_prefix(len);
      return tok;
    };

    auto label_tok = next_token();
    if (label_tok.empty()) continue;
    double label = 0.0;
    if (!parse_double(label_tok, label)) fail(line_no, "malformed label '" + std::string(label_tok) + "'");

    std::uint64_t prev = 0;
    for (auto tok = next_token(); !tok.empty(); tok = next_token()) {
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) {
        fail(line_no, "malformed feature '" + std::string(tok) + "' (expected idx:val)");
      }
      std::uint64_t idx = 0;
      double val = 0.0;
      if (!parse_index(tok.substr(0, colon), idx)) {
        fail(line_no, "malformed feature index in '" + std::string(tok) + "'");
      }
      if (!parse_double(tok.substr(colon + 1), val)) {
        fail(line_no, "malformed feature value in '" + std::string(tok) + "'");
      }
      if (idx == 0) fail(line_no, "feature index 0 (indices are 1-based)");
      if (idx <= prev) fail(line_no, "non-increasing feature index " + std::to_string(idx));
      if (idx > std::numeric_limits<std::uint32_t>::max()) fail(line_no, "feature index too large");
      if (expected_d && idx > *expected_d) {
        fail(line_no, "feature index " + std::to_string(idx) + " exceeds expected d=" +
                          std::to_string(*expected_d));
      }
      prev = idx;
      max_index = std::max(max_index, idx);
      indices.push_back(static_cast<std::uint32_t>(idx - 1));
      values.push_back(val);
    }
    labels.push_back(label);
    offsets.push_back(values.size());
  }
  if (in.bad()) throw DataError("libsvm: read error");

  const bool binary01 = !labels.empty() && std::all_of(labels.begin(), labels.end(), [](double y) {
    return y == 0.0 || y == 1.0;
  });
  if (binary01) {
    for (auto& y : labels) y = (y == 0.0) ? -1.0 : 1.0;
  }

  const std::size_t d = expected_d ? *expected_d : static_cast<std::size_t>(max_index);
  return Dataset::sparse(d, std::move(offsets), std::move(indices), std::move(values),
                         std::move(labels));
}

Dataset load_libsvm(const std::filesystem::path& path, std::optional<std::size_t> expected_d) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_libsvm(in, expected_d);
}

void write_libsvm(std::ostream& out, const Dataset& ds) {
  std::string buf;
  for (std::size_t j = 0; j < ds.n(); ++j) {
    buf.clear();
    append_double(buf, ds.label(j));
    const auto x = ds.example(j);
    for (std::size_t k = 0; k < x.nnz(); ++k) {
      const std::size_t feature = x.dense ? k : x.indices[k];
      if (x.dense && x.values[k] == 0.0) continue;
      buf.push_back(' ');
      buf.append(std::to_string(feature + 1));
      buf.push_back(':');
      append_double(buf, x.values[k]);
    }
    buf.push_back('\n');
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
  if (!out) throw DataError("libsvm: write error");
}

void save_libsvm(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot create " + path.string());
  write_libsvm(out, ds);
}

void write_binary(std::ostream& out, const Dataset& ds) {
  const Dataset dense = ds.storage() == StorageKind::dense ? Dataset() : ds.to_dense();
  const Dataset& src = ds.storage() == StorageKind::dense ? ds : dense;

  out.write(kMagic.data(), kMagic.size());
  const std::uint32_t version = kBinaryVersion;
  const std::uint64_t n = src.n();
  const std::uint64_t d = src.d();
  write_le(out, &version, 1);
  write_le(out, &n, 1);
  write_le(out, &d, 1);
  for (std::size_t j = 0; j < src.n(); ++j) {
    const auto x = src.example(j).values;
    write_le(out, x.data(), x.size());
  }
  write_le(out, src.labels().data(), src.n());
  if (!out) throw DataError("binary dataset: write error");
}

Dataset read_binary(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw DataError("binary dataset: bad magic (expected GLMD)");
  std::uint32_t version = 0;
  std::uint64_t n = 0;
  std::uint64_t d = 0;
  read_le(in, &version, 1);
  if (version != kBinaryVersion) {
    throw DataError("binary dataset: unsupported version " + std::to_string(version));
  }
  read_le(in, &n, 1);
  read_le(in, &d, 1);
  if (d != 0 && n > std::numeric_limits<std::uint64_t>::max() / sizeof(double) / d) {
    throw DataError("binary dataset: header dimensions overflow");
  }
  std::vector<double> values(n * d);
  std::vector<double> labels(n);
  read_le(in, values.data(), values.size());
  read_le(in, labels.data(), labels.size());
  return Dataset::dense(n, d, std::move(values), std::move(labels));
}

void save_binary(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot create " + path.string());
  write_binary(out, ds);
}

Dataset load_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read_binary(in);
}

Dataset load_dataset(const std::filesystem::path& path, std::optional<std::size_t> expected_d) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::array<char, 4> head{};
  in.read(head.data(), head.size());
  const bool is_binary = in.gcount() == 4 && head == kMagic;
  in.clear();
  in.seekg(0);
  if (is_binary) {
    auto ds = read_binary(in);
    if (expected_d && *expected_d != ds.d()) {
      throw DataError("binary dataset has d=" + std::to_string(ds.d()) + ", expected " +
                      std::to_string(*expected_d));
    }
    return ds;
  }
  return parse_libsvm(in, expected_d);
}

}  // namespace sdca
