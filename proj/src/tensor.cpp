// SPDX-License-Identifier: Apache-2.0
#include "genqa/tensor.hpp"

#include <cmath>
#include <sstream>

#include "genqa/errors.hpp"

namespace genqa {

std::string to_string(Precision p) { return p == Precision::Float64 ? "float64" : "float32"; }

Precision parse_precision(const std::string& text) {
  if (text == "float64" || text == "64") return Precision::Float64;
  if (text == "float32" || text == "32") return Precision::Float32;
  throw InvalidArgument("unknown precision '" + text + "' (expected float32 or float64)");
}

Shape::Shape(std::initializer_list<std::size_t> dims) {
  if (dims.size() < 1 || dims.size() > 2) {
    throw DimensionError("only rank-1 and rank-2 shapes are supported");
  }
  for (std::size_t d : dims) {
    if (d == 0) throw DimensionError("dimension sizes must be positive");
    dims_[rank_++] = d;
  }
}

std::size_t Shape::size() const {
  if (rank_ == 0) return 0;
  return rank_ == 2 ? dims_[0] * dims_[1] : dims_[0];
}

std::string Shape::str() const {
  std::ostringstream out;
  out << "[";
  for (int i = 0; i < rank_; ++i) out << (i ? "x" : "") << dims_[i];
  out << "]";
  return out.str();
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
  if (shape_.size() != data_.size()) {
    throw DimensionError("shape " + shape_.str() + " does not match " +
                         std::to_string(data_.size()) + " values");
  }
}

Tensor::Tensor(Shape shape, double fill) : shape_(shape), data_(shape.size(), fill) {}

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor(Shape{n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  return Tensor(Shape{rows, cols}, std::move(values));
}

double Tensor::item() const {
  if (data_.size() != 1) throw DimensionError("item() on tensor of shape " + shape_.str());
  return data_[0];
}

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Tensor::round_to(Precision p) {
  if (p != Precision::Float32) return;
  for (double& v : data_) v = static_cast<double>(static_cast<float>(v));
}

}  // namespace genqa
