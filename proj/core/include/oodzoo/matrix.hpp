#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace oodzoo {

/// Dense row-major float32 matrix holding the embeddings or logits of one
/// (model, split) pair. Shape is fixed at construction; rows, cols >= 1.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols);
  FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<float> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const float> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<float> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }

  float operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }
  float& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }

  std::span<const float> data() const noexcept { return data_; }

  bool all_finite() const noexcept;

  /// Compares shape and the raw IEEE-754 bit patterns of every entry.
  friend bool bit_equal(const FeatureMatrix& a, const FeatureMatrix& b) noexcept;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> data_;
};

struct MatrixShape {
  std::size_t rows = 0;
  std::size_t cols = 0;
};

// ZFM1 layout: "ZFM1" | dtype u8 (0x01 = f32 LE) | rows u64 LE | cols u64 LE | payload.
inline constexpr std::size_t kZfmHeaderBytes = 4 + 1 + 8 + 8;
inline constexpr std::uint8_t kZfmDtypeF32 = 0x01;

/// Reads a ZFM1 file, or a headerless numeric CSV when the path ends in
/// ".csv". With `validate` set, NaN/Inf entries raise NonFiniteValue.
FeatureMatrix read_matrix(const std::filesystem::path& path, bool validate = true);

/// Shape only; reads the 21-byte header (ZFM1) or scans the CSV.
MatrixShape read_matrix_shape(const std::filesystem::path& path);

void write_matrix(const FeatureMatrix& m, const std::filesystem::path& path);

/// Encodes a matrix into ZFM1 bytes (used by write_matrix and tests).
std::vector<std::uint8_t> encode_zfm(const FeatureMatrix& m);
FeatureMatrix decode_zfm(std::span<const std::uint8_t> bytes, bool validate = true);

FeatureMatrix parse_csv_matrix(std::string_view text, bool validate = true);

}  // namespace oodzoo
