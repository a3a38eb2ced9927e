#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace batchlab::nn {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

/// Tensor storage aligned to Eigen's widest packet. Vectorized reductions peel
/// unaligned leading elements, so alignment must not depend on the heap
/// address for results to be reproducible.
using AlignedVector = std::vector<double, Eigen::aligned_allocator<double>>;

/// Dense row-major f64 tensor. Rank 0, 1 and 2 are supported; rank-1 tensors
/// behave as a single row when viewed as a matrix.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  static Tensor scalar(double v) { return Tensor({}, std::vector<double>{v}); }
  static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0) { return Tensor({rows, cols}, fill); }
  static Tensor row(std::span<const double> values);
  static Tensor row(std::initializer_list<double> values) { return row(std::span<const double>(values.begin(), values.size())); }
  static Tensor from_matrix(const RowMatrix& m);

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return values_.size(); }
  std::size_t rows() const noexcept;
  std::size_t cols() const noexcept;

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  std::vector<double> to_vector() const { return {values_.begin(), values_.end()}; }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& at(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }
  /// Value of a single-element tensor.
  double item() const;

  std::span<double> row_span(std::size_t r) { return {values_.data() + r * cols(), cols()}; }
  std::span<const double> row_span(std::size_t r) const { return {values_.data() + r * cols(), cols()}; }

  MatrixMap mat();
  ConstMatrixMap mat() const;

  bool same_shape(const Tensor& other) const noexcept { return shape_ == other.shape_; }
  bool all_finite() const noexcept;
  std::string shape_string() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  AlignedVector values_;
};

/// Throws NumericError naming `where` if any value is NaN or Inf.
void require_finite(const Tensor& t, const char* where);

}  // namespace batchlab::nn
