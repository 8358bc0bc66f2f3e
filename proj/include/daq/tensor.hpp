#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "daq/error.hpp"

namespace daq {

/// Dense row-major 2-D matrix of 32-bit floats.
///
/// Weights are stored as out_features x in_features; calibration activations
/// as in_features x samples, so that row j of the activations lines up with
/// column j of the weights.
class Tensor {
public:
  Tensor() = default;

  Tensor(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0f) {
    check_shape();
  }

  Tensor(std::size_t rows, std::size_t cols, std::vector<float> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    check_shape();
    if (data_.size() != rows_ * cols_)
      fail(Errc::InvalidShape, "data length " + std::to_string(data_.size()) +
                                   " != rows*cols " +
                                   std::to_string(rows_ * cols_));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const float> data() const noexcept { return data_; }
  std::span<float> data() noexcept { return data_; }

  std::span<const float> row(std::size_t r) const noexcept {
    return std::span<const float>(data_).subspan(r * cols_, cols_);
  }
  std::span<float> row(std::size_t r) noexcept {
    return std::span<float>(data_).subspan(r * cols_, cols_);
  }

  /// Contiguous block of `count` whole rows starting at `first`.
  std::span<const float> rows_block(std::size_t first,
                                    std::size_t count) const noexcept {
    return std::span<const float>(data_).subspan(first * cols_, count * cols_);
  }

  float operator()(std::size_t r, std::size_t c) const noexcept {
    return data_[r * cols_ + c];
  }
  float &operator()(std::size_t r, std::size_t c) noexcept {
    return data_[r * cols_ + c];
  }

  bool all_finite() const noexcept {
    for (float v : data_)
      if (!std::isfinite(v))
        return false;
    return true;
  }

  friend bool operator==(const Tensor &, const Tensor &) = default;

private:
  void check_shape() const {
    if (rows_ == 0 || cols_ == 0)
      fail(Errc::InvalidShape, "tensor dimensions must be positive, got " +
                                   std::to_string(rows_) + "x" +
                                   std::to_string(cols_));
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> data_;
};

/// Read-only view of a row-major matrix block (e.g. the calibration rows that
/// belong to one weight group).
struct MatrixView {
  std::span<const float> data;
  std::size_t rows = 0;
  std::size_t cols = 0;

  float operator()(std::size_t r, std::size_t c) const noexcept {
    return data[r * cols + c];
  }
  std::span<const float> row(std::size_t r) const noexcept {
    return data.subspan(r * cols, cols);
  }
};

inline MatrixView view_rows(const Tensor &t, std::size_t first,
                            std::size_t count) {
  return MatrixView{t.rows_block(first, count), count, t.cols()};
}

} // namespace daq
