#pragma once

#include <cstddef>
#include <cstring>
#include <span>
#include <vector>

namespace strap {

/// Read-only row-major view over a block of float rows.
class MatrixView {
 public:
  MatrixView() = default;
  MatrixView(const float* data, std::size_t rows, std::size_t cols)
      : data_(data), rows_(rows), cols_(cols) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  const float* data() const noexcept { return data_; }

  std::span<const float> row(std::size_t i) const noexcept {
    return {data_ + i * cols_, cols_};
  }
  float operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  /// Rows [begin, end) without copying.
  MatrixView slice_rows(std::size_t begin, std::size_t end) const noexcept {
    return {data_ + begin * cols_, end - begin, cols_};
  }

 private:
  const float* data_ = nullptr;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
};

/// Dense row-major float32 matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, float fill = 0.0f)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<float> values)
      : rows_(rows), cols_(cols), values_(std::move(values)) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }

  float* data() noexcept { return values_.data(); }
  const float* data() const noexcept { return values_.data(); }
  const std::vector<float>& values() const noexcept { return values_; }

  float& operator()(std::size_t i, std::size_t j) noexcept { return values_[i * cols_ + j]; }
  float operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * cols_ + j]; }

  std::span<float> row(std::size_t i) noexcept { return {values_.data() + i * cols_, cols_}; }
  std::span<const float> row(std::size_t i) const noexcept {
    return {values_.data() + i * cols_, cols_};
  }

  MatrixView view() const noexcept { return {values_.data(), rows_, cols_}; }
  MatrixView slice_rows(std::size_t begin, std::size_t end) const noexcept {
    return view().slice_rows(begin, end);
  }

  /// Copy of rows [begin, end).
  Matrix copy_rows(std::size_t begin, std::size_t end) const {
    return Matrix(end - begin, cols_,
                  std::vector<float>(values_.begin() + static_cast<std::ptrdiff_t>(begin * cols_),
                                     values_.begin() + static_cast<std::ptrdiff_t>(end * cols_)));
  }

  /// Byte-level equality: distinguishes -0.0 from 0.0 and compares NaN payloads.
  bool bit_equal(const Matrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_ &&
           (values_.empty() ||
            std::memcmp(values_.data(), other.values_.data(), values_.size() * sizeof(float)) == 0);
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> values_;
};

}  // namespace strap
