#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kgroups {

/// Dense column-major matrix of doubles. Columns are contiguous, which is
/// what every per-feature estimator iterates over.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }

  [[nodiscard]] double operator()(std::size_t row, std::size_t col) const noexcept {
    return data_[col * rows_ + row];
  }
  double& operator()(std::size_t row, std::size_t col) noexcept { return data_[col * rows_ + row]; }

  [[nodiscard]] std::span<const double> column(std::size_t col) const noexcept {
    return {data_.data() + col * rows_, rows_};
  }
  [[nodiscard]] std::span<double> column(std::size_t col) noexcept {
    return {data_.data() + col * rows_, rows_};
  }

  /// Copy of the given rows restricted to the given columns, in the given order.
  [[nodiscard]] Matrix subset(std::span<const std::size_t> row_ids,
                              std::span<const std::size_t> col_ids) const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace kgroups
