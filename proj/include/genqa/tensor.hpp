// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace genqa {

/// Storage precision. Arithmetic always runs in double; in Float32 mode every
/// stored value is rounded to binary32 after it is produced.
enum class Precision { Float64, Float32 };

std::string to_string(Precision p);
Precision parse_precision(const std::string& text);

/// Dimension list of a tensor. Vectors have rank 1, matrices rank 2 (row-major).
class Shape {
 public:
  Shape() = default;
  Shape(std::initializer_list<std::size_t> dims);
  static Shape vector(std::size_t n) { return Shape{n}; }
  static Shape matrix(std::size_t rows, std::size_t cols) { return Shape{rows, cols}; }

  int rank() const { return rank_; }
  std::size_t operator[](int axis) const { return dims_[axis]; }
  std::size_t size() const;
  std::size_t rows() const { return rank_ == 2 ? dims_[0] : dims_[0]; }
  std::size_t cols() const { return rank_ == 2 ? dims_[1] : 1; }

  bool operator==(const Shape& other) const = default;
  std::string str() const;

 private:
  std::array<std::size_t, 2> dims_{0, 0};
  int rank_ = 0;
};

/// Dense contiguous array of doubles.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data);
  explicit Tensor(Shape shape, double fill = 0.0);

  static Tensor vector(std::vector<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  static Tensor scalar(double v) { return Tensor(Shape{1}, std::vector<double>{v}); }

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  std::size_t rows() const { return shape_.rows(); }
  std::size_t cols() const { return shape_.cols(); }
  bool empty() const { return data_.empty(); }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }
  const double* ptr() const { return data_.data(); }
  double* ptr() { return data_.data(); }
  const std::vector<double>& vec() const& { return data_; }
  std::vector<double> vec() && { return std::move(data_); }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }

  /// Value of a single-element tensor.
  double item() const;
  bool all_finite() const;
  void round_to(Precision p);

 private:
  Shape shape_;
  std::vector<double> data_;
};

}  // namespace genqa
