#ifndef AFFECT_TENSOR_HPP
#define AFFECT_TENSOR_HPP

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "affect/error.hpp"

namespace affect {

// Dense row-major matrix of doubles. Vectors are 1×n or n×1, scalars 1×1.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      fail(ErrorKind::Shape, "tensor data size " + std::to_string(data_.size()) +
                                 " does not match " + shape_string(rows_, cols_));
    }
  }
  Tensor(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
      if (row.size() != cols_) fail(ErrorKind::Shape, "ragged tensor initializer");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static Tensor scalar(double v) { return Tensor(1, 1, v); }
  static Tensor row(std::span<const double> values) {
    return Tensor(1, values.size(), std::vector<double>(values.begin(), values.end()));
  }
  static Tensor column(std::span<const double> values) {
    return Tensor(values.size(), 1, std::vector<double>(values.begin(), values.end()));
  }
  static Tensor identity(std::size_t n) {
    Tensor t(n, n);
    for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
    return t;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  bool is_scalar() const noexcept { return rows_ == 1 && cols_ == 1; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double item() const {
    if (!is_scalar()) fail(ErrorKind::Rank, "item() on non-scalar tensor " + shape());
    return data_[0];
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  std::span<const double> row_span(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * cols_, cols_);
  }
  std::vector<double> column_values(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  bool same_shape(const Tensor& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  std::string shape() const { return shape_string(rows_, cols_); }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  friend bool operator==(const Tensor&, const Tensor&) = default;

  static std::string shape_string(std::size_t r, std::size_t c) {
    return "[" + std::to_string(r) + "x" + std::to_string(c) + "]";
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) {
    fail(ErrorKind::Shape, std::string(what) + ": shape mismatch " + a.shape() + " vs " + b.shape());
  }
}

}  // namespace affect

#endif  // AFFECT_TENSOR_HPP
