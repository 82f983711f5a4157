#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace zpr {

using Vector = std::vector<double>;

class DimensionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense row-major tensor of rank 1 or 2. A rank-1 tensor of length n has
// rows == n and cols == 1.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::size_t len) : rows_(len), cols_(1), rank_(1), data_(len, 0.0) {}
  Tensor(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), rank_(2), data_(rows * cols, 0.0) {}

  static Tensor from_vector(const Vector& v) {
    Tensor t(v.size());
    t.data_ = v;
    return t;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  int rank() const { return rank_; }
  std::size_t size() const { return data_.size(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> span() { return data_; }
  std::span<const double> span() const { return data_; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  const Vector& values() const { return data_; }

  bool same_shape(const Tensor& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && rank_ == o.rank_;
  }
  std::string shape_string() const {
    return rank_ == 1 ? "(" + std::to_string(rows_) + ")"
                      : "(" + std::to_string(rows_) + "," + std::to_string(cols_) + ")";
  }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }
  void zero() { fill(0.0); }

  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  int rank_ = 1;
  Vector data_;
};

}  // namespace zpr
