// SPDX-License-Identifier: Apache-2.0
#include "genqa/autodiff.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "genqa/errors.hpp"

namespace genqa {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

ConstMatrixMap as_matrix(const Tensor& t) {
  return ConstMatrixMap(t.ptr(), static_cast<Eigen::Index>(t.rows()),
                        static_cast<Eigen::Index>(t.cols()));
}

MatrixMap as_matrix(Tensor& t) {
  return MatrixMap(t.ptr(), static_cast<Eigen::Index>(t.rows()),
                   static_cast<Eigen::Index>(t.cols()));
}

Tape& tape_of(Var v) {
  if (v.tape == nullptr) throw InvalidArgument("Var is not attached to a tape");
  return *v.tape;
}

Tape& common_tape(Var a, Var b) {
  if (a.tape != b.tape) throw InvalidArgument("operands live on different tapes");
  return tape_of(a);
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape().str() + " vs " +
                         b.shape().str());
  }
}

void add_into(Tensor& dst, const Tensor& src) {
  double* d = dst.ptr();
  const double* s = src.ptr();
  for (std::size_t i = 0; i < dst.size(); ++i) d[i] += s[i];
}

}  // namespace

const Tensor& Var::value() const { return tape_of(*this).value(*this); }

Tape::Tape(const ParameterSet* params, Gradients* sink, bool record)
    : params_(params), sink_(sink), record_(record) {
  nodes_.reserve(256);
}

Precision Tape::precision() const {
  return params_ ? params_->precision() : Precision::Float64;
}

Var Tape::push(Tensor value, BackwardFn backward, const char* op) {
  value.round_to(precision());
  if (!value.all_finite()) {
    throw NumericError(std::string(op) + " produced a non-finite value");
  }
  Node node;
  node.own = std::move(value);
  if (record_) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

const Tensor& Tape::node_value(std::uint32_t id) const {
  const Node& n = nodes_[id];
  return n.alias ? *n.alias : n.own;
}

const Tensor& Tape::value(Var v) const {
  if (v.tape != this || v.id >= nodes_.size()) throw InvalidArgument("Var from another tape");
  return node_value(v.id);
}

Tensor& Tape::grad_buffer(std::uint32_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor(node_value(id).shape(), 0.0);
  return n.grad;
}

Tensor Tape::grad(Var v) const {
  const Node& n = nodes_.at(v.id);
  if (n.grad.empty()) return Tensor(node_value(v.id).shape(), 0.0);
  return n.grad;
}

Var Tape::variable(Tensor value) { return push(std::move(value), nullptr, "variable"); }

Var Tape::param(int slot) {
  if (!params_) throw InvalidArgument("tape has no parameter set");
  Node node;
  node.alias = &params_->value(slot);
  if (record_ && sink_) {
    Gradients* sink = sink_;
    node.backward = [sink, slot](Tape& t, std::uint32_t self) {
      add_into(sink->slot(slot), t.node_grad(self));
    };
  }
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::gather_rows(int slot, std::span<const int> rows) {
  if (!params_) throw InvalidArgument("tape has no parameter set");
  const Tensor& table = params_->value(slot);
  if (table.shape().rank() != 2) throw DimensionError("gather_rows needs a matrix slot");
  if (rows.empty()) throw DimensionError("gather_rows with no row ids");
  const std::size_t d = table.cols();
  Tensor out(Shape{rows.size(), d}, 0.0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] < 0 || static_cast<std::size_t>(rows[r]) >= table.rows()) {
      throw DimensionError("row id " + std::to_string(rows[r]) + " outside table " +
                           table.shape().str());
    }
    std::copy_n(table.ptr() + rows[r] * d, d, out.ptr() + r * d);
  }
  std::vector<int> ids(rows.begin(), rows.end());
  Gradients* sink = sink_;
  return push(
      std::move(out),
      [sink, slot, ids = std::move(ids), d](Tape& t, std::uint32_t self) {
        if (!sink) return;
        const Tensor& g = t.node_grad(self);
        Tensor& dst = sink->slot(slot);
        for (std::size_t r = 0; r < ids.size(); ++r) {
          for (std::size_t c = 0; c < d; ++c) dst[ids[r] * d + c] += g[r * d + c];
        }
      },
      "gather_rows");
}

Var Tape::gather_mean_rows(int slot, const std::vector<std::vector<int>>& groups) {
  if (!params_) throw InvalidArgument("tape has no parameter set");
  const Tensor& table = params_->value(slot);
  if (groups.empty()) throw DimensionError("gather_mean_rows with no groups");
  const std::size_t d = table.cols();
  Tensor out(Shape{groups.size(), d}, 0.0);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].empty()) throw DimensionError("gather_mean_rows with an empty group");
    const double w = 1.0 / static_cast<double>(groups[g].size());
    for (int id : groups[g]) {
      if (id < 0 || static_cast<std::size_t>(id) >= table.rows()) {
        throw DimensionError("row id " + std::to_string(id) + " outside table");
      }
      for (std::size_t c = 0; c < d; ++c) out[g * d + c] += w * table[id * d + c];
    }
  }
  Gradients* sink = sink_;
  return push(
      std::move(out),
      [sink, slot, groups, d](Tape& t, std::uint32_t self) {
        if (!sink) return;
        const Tensor& grad = t.node_grad(self);
        Tensor& dst = sink->slot(slot);
        for (std::size_t g = 0; g < groups.size(); ++g) {
          const double w = 1.0 / static_cast<double>(groups[g].size());
          for (int id : groups[g]) {
            for (std::size_t c = 0; c < d; ++c) dst[id * d + c] += w * grad[g * d + c];
          }
        }
      },
      "gather_mean_rows");
}

void Tape::backward(Var loss) {
  if (!record_) throw InvalidArgument("backward() on a non-recording tape");
  const Tensor& lv = value(loss);
  if (lv.size() != 1) throw DimensionError("backward needs a scalar loss, got " + lv.shape().str());
  grad_buffer(loss.id)[0] = 1.0;
  for (std::uint32_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.grad.empty() || !n.backward) continue;
    n.backward(*this, i);
  }
  // The tape is single-use; drop closures so captured buffers are released.
  for (auto& n : nodes_) n.backward = nullptr;
}

// ---------------------------------------------------------------------------

Var matmul(Var a, Var b) {
  Tape& t = common_tape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.shape().rank() != 2 || av.cols() != bv.rows()) {
    throw DimensionError("matmul: cannot multiply " + av.shape().str() + " by " +
                         bv.shape().str());
  }
  const bool vector_rhs = bv.shape().rank() == 1;
  Tensor out(vector_rhs ? Shape{av.rows()} : Shape{av.rows(), bv.cols()}, 0.0);
  as_matrix(out).noalias() = as_matrix(av) * as_matrix(bv);
  const std::uint32_t ia = a.id, ib = b.id;
  return t.push(
      std::move(out),
      [ia, ib](Tape& t, std::uint32_t self) {
        const Tensor& g = t.node_grad(self);
        {
          Tensor& ga = t.grad_buffer(ia);
          as_matrix(ga).noalias() += as_matrix(g) * as_matrix(t.node_value(ib)).transpose();
        }
        {
          Tensor& gb = t.grad_buffer(ib);
          as_matrix(gb).noalias() += as_matrix(t.node_value(ia)).transpose() * as_matrix(g);
        }
      },
      "matmul");
}

Var transpose(Var a) {
  Tape& t = tape_of(a);
  const Tensor& av = a.value();
  if (av.shape().rank() != 2) throw DimensionError("transpose needs a matrix");
  Tensor out(Shape{av.cols(), av.rows()}, 0.0);
  as_matrix(out) = as_matrix(av).transpose();
  const std::uint32_t ia = a.id;
  return t.push(
      std::move(out),
      [ia](Tape& t, std::uint32_t self) {
        as_matrix(t.grad_buffer(ia)) += as_matrix(t.node_grad(self)).transpose();
      },
      "transpose");
}

namespace {

template <typename Fwd, typename Bwd>
Var binary_elementwise(const char* op, Var a, Var b, Fwd fwd, Bwd bwd) {
  Tape& t = common_tape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_same_shape(op, av, bv);
  Tensor out(av.shape(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(av[i], bv[i]);
  const std::uint32_t ia = a.id, ib = b.id;
  return t.push(
      std::move(out),
      [ia, ib, bwd](Tape& t, std::uint32_t self) {
        const Tensor& g = t.node_grad(self);
        const Tensor& x = t.node_value(ia);
        const Tensor& y = t.node_value(ib);
        Tensor& gx = t.grad_buffer(ia);
        Tensor& gy = t.grad_buffer(ib);
        for (std::size_t i = 0; i < g.size(); ++i) bwd(g[i], x[i], y[i], gx[i], gy[i]);
      },
      op);
}

template <typename Fwd, typename Bwd>
Var unary_elementwise(const char* op, Var a, Fwd fwd, Bwd bwd) {
  Tape& t = tape_of(a);
  const Tensor& av = a.value();
  Tensor out(av.shape(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(av[i]);
  const std::uint32_t ia = a.id;
  return t.push(
      std::move(out),
      [ia, bwd](Tape& t, std::uint32_t self) {
        const Tensor& g = t.node_grad(self);
        const Tensor& x = t.node_value(ia);
        const Tensor& y = t.node_value(self);
        Tensor& gx = t.grad_buffer(ia);
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += bwd(g[i], x[i], y[i]);
      },
      op);
}

}  // namespace

Var add(Var a, Var b) {
  return binary_elementwise(
      "add", a, b, [](double x, double y) { return x + y; },
      [](double g, double, double, double& gx, double& gy) {
        gx += g;
        gy += g;
      });
}

Var sub(Var a, Var b) {
  return binary_elementwise(
      "sub", a, b, [](double x, double y) { return x - y; },
      [](double g, double, double, double& gx, double& gy) {
        gx += g;
        gy -= g;
      });
}

Var mul(Var a, Var b) {
  return binary_elementwise(
      "mul", a, b, [](double x, double y) { return x * y; },
      [](double g, double x, double y, double& gx, double& gy) {
        gx += g * y;
        gy += g * x;
      });
}

Var scale(Var a, double factor) {
  return unary_elementwise(
      "scale", a, [factor](double x) { return factor * x; },
      [factor](double g, double, double) { return factor * g; });
}

Var one_minus(Var a) {
  return unary_elementwise(
      "one_minus", a, [](double x) { return 1.0 - x; },
      [](double g, double, double) { return -g; });
}

Var add_rowwise(Var m, Var row_vec) {
  Tape& t = common_tape(m, row_vec);
  const Tensor& mv = m.value();
  const Tensor& rv = row_vec.value();
  if (mv.shape().rank() != 2 || rv.shape().rank() != 1 || rv.size() != mv.cols()) {
    throw DimensionError("add_rowwise: cannot broadcast " + rv.shape().str() + " over rows of " +
                         mv.shape().str());
  }
  Tensor out = mv;
  const std::size_t n = mv.cols();
  for (std::size_t r = 0; r < mv.rows(); ++r) {
    for (std::size_t c = 0; c < n; ++c) out[r * n + c] += rv[c];
  }
  const std::uint32_t im = m.id, ir = row_vec.id;
  return t.push(
      std::move(out),
      [im, ir, n](Tape& t, std::uint32_t self) {
        const Tensor& g = t.node_grad(self);
        add_into(t.grad_buffer(im), g);
        Tensor& gr = t.grad_buffer(ir);
        for (std::size_t i = 0; i < g.size(); ++i) gr[i % n] += g[i];
      },
      "add_rowwise");
}

Var elementwise(Activation f, Var x) {
  switch (f) {
    case Activation::Sigmoid:
      return unary_elementwise(
          "sigmoid", x,
          [](double v) {
            if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
            const double e = std::exp(v);
            return e / (1.0 + e);
          },
          [](double g, double, double y) { return g * y * (1.0 - y); });
    case Activation::Tanh:
      return unary_elementwise(
          "tanh", x, [](double v) { return std::tanh(v); },
          [](double g, double, double y) { return g * (1.0 - y * y); });
    case Activation::Relu:
      return unary_elementwise(
          "relu", x, [](double v) { return v > 0 ? v : 0.0; },
          [](double g, double v, double) { return v > 0 ? g : 0.0; });
  }
  throw InvalidArgument("unknown activation");
}

Var exp(Var x) {
  return unary_elementwise(
      "exp", x, [](double v) { return std::exp(v); },
      [](double g, double, double y) { return g * y; });
}

Var log(Var x) {
  return unary_elementwise(
      "log", x, [](double v) { return std::log(v); },
      [](double g, double v, double) { return g / v; });
}

Var softmax(Var x) {
  Tape& t = tape_of(x);
  const Tensor& xv = x.value();
  if (xv.shape().rank() != 1) throw DimensionError("softmax needs a vector, got " + xv.shape().str());
  Tensor out(xv.shape(), 0.0);
  const double m = *std::max_element(xv.data().begin(), xv.data().end());
  double z = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) {
    out[i] = std::exp(xv[i] - m);
    z += out[i];
  }
  for (double& v : out.data()) v /= z;
  const std::uint32_t ix = x.id;
  return t.push(
      std::move(out),
      [ix](Tape& t, std::uint32_t self) {
        const Tensor& g = t.node_grad(self);
        const Tensor& y = t.node_value(self);
        double inner = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) inner += g[i] * y[i];
        Tensor& gx = t.grad_buffer(ix);
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += y[i] * (g[i] - inner);
      },
      "softmax");
}

Var sum(Var a) {
  Tape& t = tape_of(a);
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  const std::uint32_t ia = a.id;
  return t.push(
      Tensor::scalar(s),
      [ia](Tape& t, std::uint32_t self) {
        const double g = t.node_grad(self)[0];
        for (double& v : t.grad_buffer(ia).data()) v += g;
      },
      "sum");
}

Var mean(Var a) { return scale(sum(a), 1.0 / static_cast<double>(a.size())); }

Var dot(Var a, Var b) {
  Tape& t = common_tape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.size() != bv.size()) {
    throw DimensionError("dot: size mismatch " + av.shape().str() + " vs " + bv.shape().str());
  }
  double s = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) s += av[i] * bv[i];
  const std::uint32_t ia = a.id, ib = b.id;
  return t.push(
      Tensor::scalar(s),
      [ia, ib](Tape& t, std::uint32_t self) {
        const double g = t.node_grad(self)[0];
        const Tensor& x = t.node_value(ia);
        const Tensor& y = t.node_value(ib);
        Tensor& gx = t.grad_buffer(ia);
        Tensor& gy = t.grad_buffer(ib);
        for (std::size_t i = 0; i < x.size(); ++i) {
          gx[i] += g * y[i];
          gy[i] += g * x[i];
        }
      },
      "dot");
}

Var select_sum(Var a, std::span<const int> indices) {
  Tape& t = tape_of(a);
  const Tensor& av = a.value();
  double s = 0.0;
  for (int i : indices) {
    if (i < 0 || static_cast<std::size_t>(i) >= av.size()) {
      throw DimensionError("select_sum index " + std::to_string(i) + " outside " +
                           av.shape().str());
    }
    s += av[i];
  }
  std::vector<int> idx(indices.begin(), indices.end());
  const std::uint32_t ia = a.id;
  return t.push(
      Tensor::scalar(s),
      [ia, idx = std::move(idx)](Tape& t, std::uint32_t self) {
        const double g = t.node_grad(self)[0];
        Tensor& ga = t.grad_buffer(ia);
        for (int i : idx) ga[i] += g;
      },
      "select_sum");
}

Var pick(Var a, std::size_t index) {
  const int i = static_cast<int>(index);
  return select_sum(a, std::span<const int>(&i, 1));
}

Var concat(std::span<const Var> parts, int axis) {
  if (parts.empty()) throw DimensionError("concat of nothing");
  Tape& t = tape_of(parts[0]);
  const Shape first = parts[0].shape();
  std::vector<std::uint32_t> ids;
  ids.reserve(parts.size());
  for (const Var& p : parts) {
    if (p.tape != &t) throw InvalidArgument("concat operands live on different tapes");
    ids.push_back(p.id);
  }
  if (first.rank() == 1) {
    if (axis != 0) throw DimensionError("vectors concatenate along axis 0 only");
    std::size_t n = 0;
    for (const Var& p : parts) {
      if (p.shape().rank() != 1) throw DimensionError("concat mixes vectors and matrices");
      n += p.size();
    }
    Tensor out(Shape{n}, 0.0);
    std::size_t off = 0;
    for (const Var& p : parts) {
      const Tensor& v = p.value();
      std::copy(v.data().begin(), v.data().end(), out.ptr() + off);
      off += v.size();
    }
    return t.push(
        std::move(out),
        [ids](Tape& t, std::uint32_t self) {
          const Tensor& g = t.node_grad(self);
          std::size_t off = 0;
          for (std::uint32_t id : ids) {
            Tensor& gp = t.grad_buffer(id);
            for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += g[off + i];
            off += gp.size();
          }
        },
        "concat");
  }
  if (axis != 0 && axis != 1) throw DimensionError("matrix concat axis must be 0 or 1");
  std::size_t rows = 0, cols = 0;
  for (const Var& p : parts) {
    const Shape& s = p.shape();
    if (s.rank() != 2) throw DimensionError("concat mixes vectors and matrices");
    if (axis == 0) {
      if (s[1] != first[1]) {
        throw DimensionError("concat rows: column counts differ " + first.str() + " vs " + s.str());
      }
      rows += s[0];
      cols = s[1];
    } else {
      if (s[0] != first[0]) {
        throw DimensionError("concat cols: row counts differ " + first.str() + " vs " + s.str());
      }
      cols += s[1];
      rows = s[0];
    }
  }
  Tensor out(Shape{rows, cols}, 0.0);
  std::size_t off = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    if (axis == 0) {
      std::copy(v.data().begin(), v.data().end(), out.ptr() + off * cols);
      off += v.rows();
    } else {
      for (std::size_t r = 0; r < rows; ++r) {
        std::copy_n(v.ptr() + r * v.cols(), v.cols(), out.ptr() + r * cols + off);
      }
      off += v.cols();
    }
  }
  return t.push(
      std::move(out),
      [ids, axis, cols, rows](Tape& t, std::uint32_t self) {
        const Tensor& g = t.node_grad(self);
        std::size_t off = 0;
        for (std::uint32_t id : ids) {
          Tensor& gp = t.grad_buffer(id);
          if (axis == 0) {
            for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += g[off * cols + i];
            off += gp.rows();
          } else {
            const std::size_t pc = gp.cols();
            for (std::size_t r = 0; r < rows; ++r) {
              for (std::size_t c = 0; c < pc; ++c) gp[r * pc + c] += g[r * cols + off + c];
            }
            off += pc;
          }
        }
      },
      "concat");
}

Var stack(std::span<const Var> rows) {
  if (rows.empty()) throw DimensionError("stack of nothing");
  Tape& t = tape_of(rows[0]);
  const std::size_t n = rows[0].size();
  std::vector<std::uint32_t> ids;
  Tensor out(Shape{rows.size(), n}, 0.0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Tensor& v = rows[r].value();
    if (v.shape().rank() != 1 || v.size() != n) {
      throw DimensionError("stack: row " + std::to_string(r) + " has shape " + v.shape().str());
    }
    std::copy(v.data().begin(), v.data().end(), out.ptr() + r * n);
    ids.push_back(rows[r].id);
  }
  return t.push(
      std::move(out),
      [ids, n](Tape& t, std::uint32_t self) {
        const Tensor& g = t.node_grad(self);
        for (std::size_t r = 0; r < ids.size(); ++r) {
          Tensor& gr = t.grad_buffer(ids[r]);
          for (std::size_t c = 0; c < n; ++c) gr[c] += g[r * n + c];
        }
      },
      "stack");
}

Var row(Var m, std::size_t index) {
  Tape& t = tape_of(m);
  const Tensor& mv = m.value();
  if (mv.shape().rank() != 2 || index >= mv.rows()) {
    throw DimensionError("row " + std::to_string(index) + " of " + mv.shape().str());
  }
  const std::size_t n = mv.cols();
  Tensor out(Shape{n}, 0.0);
  std::copy_n(mv.ptr() + index * n, n, out.ptr());
  const std::uint32_t im = m.id;
  return t.push(
      std::move(out),
      [im, index, n](Tape& t, std::uint32_t self) {
        const Tensor& g = t.node_grad(self);
        Tensor& gm = t.grad_buffer(im);
        for (std::size_t c = 0; c < n; ++c) gm[index * n + c] += g[c];
      },
      "row");
}

Var slice(Var v, std::size_t begin, std::size_t length) {
  Tape& t = tape_of(v);
  const Tensor& vv = v.value();
  if (vv.shape().rank() != 1 || length == 0 || begin + length > vv.size()) {
    throw DimensionError("slice [" + std::to_string(begin) + ", +" + std::to_string(length) +
                         ") of " + vv.shape().str());
  }
  Tensor out(Shape{length}, 0.0);
  std::copy_n(vv.ptr() + begin, length, out.ptr());
  const std::uint32_t iv = v.id;
  return t.push(
      std::move(out),
      [iv, begin](Tape& t, std::uint32_t self) {
        const Tensor& g = t.node_grad(self);
        Tensor& gv = t.grad_buffer(iv);
        for (std::size_t i = 0; i < g.size(); ++i) gv[begin + i] += g[i];
      },
      "slice");
}

Var mean_rows(Var m) {
  Tape& t = tape_of(m);
  const Tensor& mv = m.value();
  if (mv.shape().rank() != 2) throw DimensionError("mean_rows needs a matrix");
  const std::size_t rows = mv.rows(), n = mv.cols();
  Tensor out(Shape{n}, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < n; ++c) out[c] += mv[r * n + c];
  }
  const double w = 1.0 / static_cast<double>(rows);
  for (double& v : out.data()) v *= w;
  const std::uint32_t im = m.id;
  return t.push(
      std::move(out),
      [im, rows, n, w](Tape& t, std::uint32_t self) {
        const Tensor& g = t.node_grad(self);
        Tensor& gm = t.grad_buffer(im);
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < n; ++c) gm[r * n + c] += w * g[c];
        }
      },
      "mean_rows");
}

Var max_rows(Var m) {
  Tape& t = tape_of(m);
  const Tensor& mv = m.value();
  if (mv.shape().rank() != 2) throw DimensionError("max_rows needs a matrix");
  const std::size_t rows = mv.rows(), n = mv.cols();
  Tensor out(Shape{n}, 0.0);
  std::vector<std::size_t> arg(n, 0);
  for (std::size_t c = 0; c < n; ++c) {
    double best = mv[c];
    for (std::size_t r = 1; r < rows; ++r) {
      if (mv[r * n + c] > best) {
        best = mv[r * n + c];
        arg[c] = r;
      }
    }
    out[c] = best;
  }
  const std::uint32_t im = m.id;
  return t.push(
      std::move(out),
      [im, arg = std::move(arg), n](Tape& t, std::uint32_t self) {
        const Tensor& g = t.node_grad(self);
        Tensor& gm = t.grad_buffer(im);
        for (std::size_t c = 0; c < n; ++c) gm[arg[c] * n + c] += g[c];
      },
      "max_rows");
}

Var reshape(Var v, Shape shape) {
  Tape& t = tape_of(v);
  const Tensor& vv = v.value();
  if (shape.size() != vv.size()) {
    throw DimensionError("reshape " + vv.shape().str() + " to " + shape.str());
  }
  Tensor out(shape, std::vector<double>(vv.data().begin(), vv.data().end()));
  const std::uint32_t iv = v.id;
  return t.push(
      std::move(out),
      [iv](Tape& t, std::uint32_t self) { add_into(t.grad_buffer(iv), t.node_grad(self)); },
      "reshape");
}

Var unfold_rows(Var m, std::size_t width) {
  Tape& t = tape_of(m);
  const Tensor& mv = m.value();
  if (mv.shape().rank() != 2 || width == 0 || width > mv.rows()) {
    throw DimensionError("unfold_rows width " + std::to_string(width) + " over " +
                         mv.shape().str());
  }
  const std::size_t windows = mv.rows() - width + 1;
  const std::size_t span = width * mv.cols();
  const std::size_t stride = mv.cols();
  Tensor out(Shape{windows, span}, 0.0);
  for (std::size_t p = 0; p < windows; ++p) {
    std::copy_n(mv.ptr() + p * stride, span, out.ptr() + p * span);
  }
  const std::uint32_t im = m.id;
  return t.push(
      std::move(out),
      [im, windows, span, stride](Tape& t, std::uint32_t self) {
        const Tensor& g = t.node_grad(self);
        Tensor& gm = t.grad_buffer(im);
        for (std::size_t p = 0; p < windows; ++p) {
          for (std::size_t i = 0; i < span; ++i) gm[p * stride + i] += g[p * span + i];
        }
      },
      "unfold_rows");
}

}  // namespace genqa
