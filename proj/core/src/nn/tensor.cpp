#include "batchlab/nn/tensor.hpp"

#include "batchlab/common/error.hpp"

#include <cmath>
#include <functional>
#include <numeric>

namespace batchlab::nn {

namespace {

std::size_t element_count(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill) : shape_(std::move(shape)) {
  if (shape_.size() > 2) throw ShapeError("tensor rank " + std::to_string(shape_.size()) + " unsupported");
  values_.assign(element_count(shape_), fill);
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(values.begin(), values.end()) {
  if (shape_.size() > 2) throw ShapeError("tensor rank " + std::to_string(shape_.size()) + " unsupported");
  if (element_count(shape_) != values_.size())
    throw ShapeError("shape " + shape_string() + " does not match " + std::to_string(values_.size()) + " values");
}

Tensor Tensor::row(std::span<const double> values) {
  return Tensor({1, values.size()}, std::vector<double>(values.begin(), values.end()));
}

Tensor Tensor::from_matrix(const RowMatrix& m) {
  Tensor t = matrix(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  t.mat() = m;
  return t;
}

std::size_t Tensor::rows() const noexcept { return shape_.size() == 2 ? shape_[0] : 1; }

std::size_t Tensor::cols() const noexcept {
  if (shape_.empty()) return 1;
  return shape_.back();
}

double Tensor::item() const {
  if (values_.size() != 1) throw ShapeError("item() on tensor of shape " + shape_string());
  return values_[0];
}

MatrixMap Tensor::mat() {
  return MatrixMap(values_.data(), static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols()));
}

ConstMatrixMap Tensor::mat() const {
  return ConstMatrixMap(values_.data(), static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols()));
}

bool Tensor::all_finite() const noexcept {
  for (double v : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

std::string Tensor::shape_string() const {
  std::string s = "[";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape_[i]);
  }
  return s + "]";
}

void require_finite(const Tensor& t, const char* where) {
  if (!t.all_finite()) throw NumericError(std::string("non-finite value in ") + where);
}

}  // namespace batchlab::nn
