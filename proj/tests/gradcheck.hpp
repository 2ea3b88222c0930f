// SPDX-License-Identifier: Apache-2.0
// Central finite-difference oracle shared by the test suites. It only calls
// forward evaluations, never the tape's backward pass, so it stays
// independent of the code it checks.
#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "genqa/autodiff.hpp"
#include "genqa/parameters.hpp"

namespace genqa::testing {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::string worst;  // "<slot>[index] analytic=.. numeric=.."
};

inline double relative_error(double analytic, double numeric) {
  const double denom = std::max(std::abs(analytic), std::abs(numeric));
  return denom == 0.0 ? 0.0 : std::abs(analytic - numeric) / denom;
}

inline void record(GradCheckReport& r, const std::string& where, std::size_t i, double analytic,
                   double numeric, double floor) {
  if (std::max(std::abs(analytic), std::abs(numeric)) <= floor) return;
  ++r.checked;
  const double e = relative_error(analytic, numeric);
  if (e > r.max_rel_error) {
    r.max_rel_error = e;
    r.worst = where + "[" + std::to_string(i) + "] analytic=" + std::to_string(analytic) +
              " numeric=" + std::to_string(numeric);
  }
}

/// Checks d f / d inputs for a scalar function built on a fresh tape from
/// leaf variables.
using LeafFn = std::function<Var(Tape&, const std::vector<Var>&)>;

inline GradCheckReport check_leaf_gradients(std::vector<Tensor> inputs, const LeafFn& f,
                                            double h = 1e-5, double floor = 1e-8) {
  std::vector<Tensor> analytic;
  {
    Tape tape;
    std::vector<Var> leaves;
    for (const auto& x : inputs) leaves.push_back(tape.variable(x));
    Var out = f(tape, leaves);
    tape.backward(out);
    for (const auto& v : leaves) analytic.push_back(tape.grad(v));
  }
  auto eval = [&](const std::vector<Tensor>& xs) {
    Tape tape(nullptr, nullptr, false);
    std::vector<Var> leaves;
    for (const auto& x : xs) leaves.push_back(tape.variable(x));
    return f(tape, leaves).value().item();
  };
  GradCheckReport report;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      const double saved = inputs[k][i];
      inputs[k][i] = saved + h;
      const double up = eval(inputs);
      inputs[k][i] = saved - h;
      const double down = eval(inputs);
      inputs[k][i] = saved;
      record(report, "input" + std::to_string(k), i, analytic[k][i], (up - down) / (2 * h), floor);
    }
  }
  return report;
}

/// Checks the gradient a loss writes into `grads` against central
/// differences of `loss_value` over every coordinate of every slot.
/// `compute` must fill `grads` (zeroed beforehand) and `loss_value` must
/// evaluate the same loss without touching gradients.
inline GradCheckReport check_parameter_gradients(ParameterSet& params,
                                                 const std::function<void(Gradients&)>& compute,
                                                 const std::function<double()>& loss_value,
                                                 double h = 1e-5, double floor = 1e-8) {
  Gradients grads(params);
  compute(grads);
  GradCheckReport report;
  for (std::size_t s = 0; s < params.size(); ++s) {
    Tensor& value = params.value(static_cast<int>(s));
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double saved = value[i];
      value[i] = saved + h;
      const double up = loss_value();
      value[i] = saved - h;
      const double down = loss_value();
      value[i] = saved;
      record(report, params.name(static_cast<int>(s)), i, grads.slot(static_cast<int>(s))[i],
             (up - down) / (2 * h), floor);
    }
  }
  return report;
}

}  // namespace genqa::testing
