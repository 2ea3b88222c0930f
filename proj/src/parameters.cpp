// SPDX-License-Identifier: Apache-2.0
#include "genqa/parameters.hpp"

#include <cmath>

#include "genqa/errors.hpp"

namespace genqa {

int ParameterSet::add(std::string name, Tensor init) {
  if (index_.contains(name)) throw InvalidArgument("duplicate parameter slot '" + name + "'");
  init.round_to(precision_);
  const int slot = static_cast<int>(values_.size());
  index_.emplace(name, slot);
  names_.push_back(std::move(name));
  values_.push_back(std::move(init));
  return slot;
}

int ParameterSet::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

int ParameterSet::require(const std::string& name) const {
  const int slot = find(name);
  if (slot < 0) throw InvalidArgument("no parameter slot named '" + name + "'");
  return slot;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += v.size();
  return n;
}

double ParameterSet::squared_norm() const {
  double total = 0.0;
  for (const auto& v : values_) {
    for (double x : v.data()) total += x * x;
  }
  return total;
}

void ParameterSet::set_precision(Precision p) {
  precision_ = p;
  for (auto& v : values_) v.round_to(p);
}

Gradients::Gradients(const ParameterSet& params) {
  grads_.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    grads_.emplace_back(params.value(static_cast<int>(i)).shape(), 0.0);
  }
}

void Gradients::zero() {
  for (auto& g : grads_) std::fill(g.data().begin(), g.data().end(), 0.0);
}

void Gradients::add(const Gradients& other) {
  if (other.size() != size()) throw DimensionError("gradient buffers have different slot counts");
  for (std::size_t s = 0; s < grads_.size(); ++s) {
    auto dst = grads_[s].data();
    auto src = other.grads_[s].data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
}

void Gradients::scale(double factor) {
  for (auto& g : grads_) {
    for (double& x : g.data()) x *= factor;
  }
}

double Gradients::global_norm() const {
  double total = 0.0;
  for (const auto& g : grads_) {
    for (double x : g.data()) total += x * x;
  }
  return std::sqrt(total);
}

Tensor glorot_uniform(Shape shape, std::mt19937_64& rng) {
  const double fan_out = static_cast<double>(shape.rows());
  const double fan_in = static_cast<double>(shape.cols());
  const double a = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-a, a);
  Tensor t(shape, 0.0);
  for (double& x : t.data()) x = dist(rng);
  return t;
}

}  // namespace genqa
