// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "genqa/parameters.hpp"
#include "genqa/tensor.hpp"

namespace genqa {

class Tape;

/// Handle to a value recorded on a Tape.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t size() const { return value().size(); }
};

/// Reverse-mode tape. Ops are appended in evaluation order, so walking the
/// node list backwards is a reverse topological order. One tape per example;
/// a tape is never shared between threads.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::uint32_t self)>;

  /// `params` and `sink` may be null when no parameter leaves are needed.
  /// With `record == false` no backward closures are kept (inference).
  explicit Tape(const ParameterSet* params = nullptr, Gradients* sink = nullptr,
                bool record = true);

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf holding its own copy of `value`. Its gradient is readable via grad().
  Var variable(Tensor value);
  /// Same as variable(); reads better for inputs nobody differentiates.
  Var constant(Tensor value) { return variable(std::move(value)); }
  /// Leaf aliasing a parameter slot; backward accumulates into the sink.
  Var param(int slot);
  /// Rows of a parameter matrix as an [n x d] matrix; gradient scatter-adds.
  Var gather_rows(int slot, std::span<const int> rows);
  /// For each group of row ids, the mean row: result is [groups x d].
  Var gather_mean_rows(int slot, const std::vector<std::vector<int>>& groups);

  const Tensor& value(Var v) const;
  /// Accumulated gradient of a node after backward(); zeros if unreached.
  Tensor grad(Var v) const;

  /// Reverse accumulation from a scalar loss.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }
  bool recording() const { return record_; }
  Precision precision() const;

  // Used by op implementations.
  Var push(Tensor value, BackwardFn backward, const char* op);
  const Tensor& node_value(std::uint32_t id) const;
  const Tensor& node_grad(std::uint32_t id) const { return nodes_[id].grad; }
  /// Gradient buffer of a node, allocated as zeros on first use.
  Tensor& grad_buffer(std::uint32_t id);

 private:
  struct Node {
    Tensor own;
    const Tensor* alias = nullptr;
    Tensor grad;
    BackwardFn backward;
  };

  const ParameterSet* params_;
  Gradients* sink_;
  bool record_;
  std::vector<Node> nodes_;
};

// Linear algebra.
Var matmul(Var a, Var b);
Var transpose(Var a);

// Elementwise; operands must have identical shapes.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var one_minus(Var a);
/// Matrix [m x n] plus a length-n vector added to every row.
Var add_rowwise(Var m, Var row);

enum class Activation { Sigmoid, Tanh, Relu };
Var elementwise(Activation f, Var x);
inline Var sigmoid(Var x) { return elementwise(Activation::Sigmoid, x); }
inline Var tanh(Var x) { return elementwise(Activation::Tanh, x); }
inline Var relu(Var x) { return elementwise(Activation::Relu, x); }
Var exp(Var x);
Var log(Var x);

/// Softmax of a vector, computed with max subtraction.
Var softmax(Var x);

// Reductions to a scalar [1].
Var sum(Var a);
Var mean(Var a);
Var dot(Var a, Var b);
/// Sum of the listed entries of a vector.
Var select_sum(Var a, std::span<const int> indices);
Var pick(Var a, std::size_t index);

// Restructuring.
/// Concatenation: vectors along axis 0; matrices along axis 0 (rows) or 1 (columns).
Var concat(std::span<const Var> parts, int axis = 0);
inline Var concat(std::initializer_list<Var> parts, int axis = 0) {
  return concat(std::span<const Var>(parts.begin(), parts.size()), axis);
}
/// Stacks equal-length vectors as matrix rows.
Var stack(std::span<const Var> rows);
Var row(Var m, std::size_t index);
Var slice(Var v, std::size_t begin, std::size_t length);
/// Column-wise mean of a matrix.
Var mean_rows(Var m);
/// Column-wise max of a matrix (max-pooling over positions).
Var max_rows(Var m);
/// Same data, new shape of equal size.
Var reshape(Var v, Shape shape);
/// Sliding windows over matrix rows: row p of the [rows-width+1 x width*cols]
/// result is rows p..p+width-1 laid end to end.
Var unfold_rows(Var m, std::size_t width);

}  // namespace genqa
