#include "oodzoo/matrix.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "oodzoo/error.hpp"

namespace oodzoo {
namespace {

constexpr std::uint8_t kMagic[4] = {'Z', 'F', 'M', '1'};

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int b = 7; b >= 0; --b) v = (v << 8) | p[b];
  return v;
}

bool is_csv(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".csv";
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& path, std::size_t limit) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes;
  if (limit == std::numeric_limits<std::size_t>::max()) {
    bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  } else {
    bytes.resize(limit);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(limit));
    bytes.resize(static_cast<std::size_t>(in.gcount()));
  }
  return bytes;
}

MatrixShape decode_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || !std::equal(kMagic, kMagic + 4, bytes.begin())) {
    fail(Errc::MagicMismatch, "missing ZFM1 magic");
  }
  if (bytes.size() < kZfmHeaderBytes) fail(Errc::TruncatedFile, "header shorter than 21 bytes");
  if (bytes[4] != kZfmDtypeF32) {
    fail(Errc::SchemaError, "unsupported dtype code " + std::to_string(bytes[4]));
  }
  const std::uint64_t rows = get_u64(bytes.data() + 5);
  const std::uint64_t cols = get_u64(bytes.data() + 13);
  if (rows == 0 || cols == 0) fail(Errc::DimOverflow, "zero dimension in header");
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  if (rows > kMax / cols || rows * cols > (kMax - kZfmHeaderBytes) / sizeof(float) ||
      rows * cols > std::numeric_limits<std::size_t>::max() / sizeof(float)) {
    fail(Errc::DimOverflow, "rows*cols overflows");
  }
  return {static_cast<std::size_t>(rows), static_cast<std::size_t>(cols)};
}

}  // namespace

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols)
    : FeatureMatrix(rows, cols, std::vector<float>(rows * cols, 0.0f)) {}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<float> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows == 0 || cols == 0) fail(Errc::DimOverflow, "matrix needs rows >= 1 and cols >= 1");
  if (data_.size() != rows * cols) {
    fail(Errc::DimMismatch, "data length " + std::to_string(data_.size()) + " != rows*cols");
  }
}

bool FeatureMatrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

bool bit_equal(const FeatureMatrix& a, const FeatureMatrix& b) noexcept {
  return a.rows_ == b.rows_ && a.cols_ == b.cols_ &&
         std::memcmp(a.data_.data(), b.data_.data(), a.data_.size() * sizeof(float)) == 0;
}

std::vector<std::uint8_t> encode_zfm(const FeatureMatrix& m) {
  std::vector<std::uint8_t> out;
  out.reserve(kZfmHeaderBytes + m.data().size() * sizeof(float));
  for (std::uint8_t c : kMagic) out.push_back(c);
  out.push_back(kZfmDtypeF32);
  put_u64(out, m.rows());
  put_u64(out, m.cols());
  for (float v : m.data()) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
  }
  return out;
}

FeatureMatrix decode_zfm(std::span<const std::uint8_t> bytes, bool validate) {
  const MatrixShape shape = decode_header(bytes);
  const std::size_t count = shape.rows * shape.cols;
  if (bytes.size() - kZfmHeaderBytes < count * sizeof(float)) {
    fail(Errc::TruncatedFile, "payload has " + std::to_string(bytes.size() - kZfmHeaderBytes) +
                                  " bytes, header declares " + std::to_string(count * sizeof(float)));
  }
  std::vector<float> data(count);
  const std::uint8_t* p = bytes.data() + kZfmHeaderBytes;
  for (std::size_t i = 0; i < count; ++i, p += 4) {
    const std::uint32_t bits = std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) |
                               (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
    data[i] = std::bit_cast<float>(bits);
  }
  FeatureMatrix m(shape.rows, shape.cols, std::move(data));
  if (validate && !m.all_finite()) fail(Errc::NonFiniteValue, "matrix contains NaN or Inf");
  return m;
}

FeatureMatrix parse_csv_matrix(std::string_view text, bool validate) {
  std::vector<float> data;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    std::size_t fields = 0;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      std::string_view field = line.substr(start, comma == std::string_view::npos ? line.size() - start : comma - start);
      while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
      while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
      if (!field.empty() && field.front() == '+') field.remove_prefix(1);
      float value = 0.0f;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
      // from_chars reports out-of-range for subnormal/overflowing text; treat as malformed.
      if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
        fail(Errc::SchemaError, "CSV row " + std::to_string(rows + 1) + ": cannot parse '" +
                                    std::string(field) + "'");
      }
      data.push_back(value);
      ++fields;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (rows == 0) {
      cols = fields;
    } else if (fields != cols) {
      fail(Errc::DimMismatch, "CSV row " + std::to_string(rows + 1) + " has " +
                                  std::to_string(fields) + " fields, expected " + std::to_string(cols));
    }
    ++rows;
  }
  if (rows == 0) fail(Errc::SchemaError, "CSV contains no rows");
  FeatureMatrix m(rows, cols, std::move(data));
  if (validate && !m.all_finite()) fail(Errc::NonFiniteValue, "matrix contains NaN or Inf");
  return m;
}

FeatureMatrix read_matrix(const std::filesystem::path& path, bool validate) {
  const auto bytes = slurp(path, std::numeric_limits<std::size_t>::max());
  if (is_csv(path)) {
    return parse_csv_matrix(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), validate);
  }
  return decode_zfm(bytes, validate);
}

MatrixShape read_matrix_shape(const std::filesystem::path& path) {
  if (is_csv(path)) {
    const auto m = read_matrix(path, false);
    return {m.rows(), m.cols()};
  }
  const MatrixShape shape = decode_header(slurp(path, kZfmHeaderBytes));
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec) fail(Errc::IoError, "cannot stat " + path.string());
  if (size - kZfmHeaderBytes < shape.rows * shape.cols * sizeof(float)) {
    fail(Errc::TruncatedFile, path.string() + " shorter than its header declares");
  }
  return shape;
}

void write_matrix(const FeatureMatrix& m, const std::filesystem::path& path) {
  if (m.empty()) fail(Errc::DimOverflow, "cannot write an empty matrix");
  const auto bytes = encode_zfm(m);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::IoError, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(Errc::IoError, "write failed for " + path.string());
}

}  // namespace oodzoo
