// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "genqa/tensor.hpp"

namespace genqa {

/// Named trainable arrays. Slot order is insertion order and is the order used
/// for checkpoints, gradient reduction and the regularizer.
class ParameterSet {
 public:
  explicit ParameterSet(Precision precision = Precision::Float64) : precision_(precision) {}

  /// Registers a slot; throws on duplicate names.
  int add(std::string name, Tensor init);
  /// Slot index, or -1.
  int find(const std::string& name) const;
  int require(const std::string& name) const;

  std::size_t size() const { return values_.size(); }
  const std::string& name(int slot) const { return names_[slot]; }
  const Tensor& value(int slot) const { return values_[slot]; }
  Tensor& value(int slot) { return values_[slot]; }
  const std::vector<std::string>& names() const { return names_; }

  std::size_t scalar_count() const;
  /// Sum over every slot of the squared Frobenius norm.
  double squared_norm() const;

  Precision precision() const { return precision_; }
  void set_precision(Precision p);

 private:
  Precision precision_;
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
  std::map<std::string, int> index_;
};

/// Gradient buffer aligned slot-for-slot with a ParameterSet.
class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(const ParameterSet& params);

  std::size_t size() const { return grads_.size(); }
  Tensor& slot(int i) { return grads_[i]; }
  const Tensor& slot(int i) const { return grads_[i]; }

  void zero();
  void add(const Gradients& other);
  void scale(double factor);
  double global_norm() const;

 private:
  std::vector<Tensor> grads_;
};

/// Glorot-style uniform fill in [-a, a], a = sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(Shape shape, std::mt19937_64& rng);

}  // namespace genqa
