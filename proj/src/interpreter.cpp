// SPDX-License-Identifier: Apache-2.0
#include "genqa/interpreter.hpp"

#include "genqa/errors.hpp"

namespace genqa {

GruSlots register_gru(ParameterSet& params, const std::string& prefix, std::size_t input,
                      std::size_t hidden, std::mt19937_64& rng) {
  GruSlots g;
  g.input = input;
  g.hidden = hidden;
  g.w_x = params.add(prefix + ".w_x", glorot_uniform(Shape{3 * hidden, input}, rng));
  g.u_zr = params.add(prefix + ".u_zr", glorot_uniform(Shape{2 * hidden, hidden}, rng));
  g.u_h = params.add(prefix + ".u_h", glorot_uniform(Shape{hidden, hidden}, rng));
  g.b = params.add(prefix + ".b", Tensor(Shape{3 * hidden}, 0.0));
  return g;
}

GruSlots find_gru(const ParameterSet& params, const std::string& prefix) {
  GruSlots g;
  g.w_x = params.require(prefix + ".w_x");
  g.u_zr = params.require(prefix + ".u_zr");
  g.u_h = params.require(prefix + ".u_h");
  g.b = params.require(prefix + ".b");
  g.hidden = params.value(g.u_h).rows();
  g.input = params.value(g.w_x).cols();
  return g;
}

Var gru_project(Tape& tape, const GruSlots& g, Var inputs) {
  return add_rowwise(matmul(inputs, transpose(tape.param(g.w_x))), tape.param(g.b));
}

Var gru_step(Tape& tape, const GruSlots& g, Var projected, Var h) {
  const std::size_t n = g.hidden;
  Var zr = sigmoid(add(slice(projected, 0, 2 * n), matmul(tape.param(g.u_zr), h)));
  Var z = slice(zr, 0, n);
  Var r = slice(zr, n, n);
  Var cand = tanh(add(slice(projected, 2 * n, n), matmul(tape.param(g.u_h), mul(r, h))));
  return add(h, mul(z, sub(cand, h)));
}

EncodedQuestion encode(Tape& tape, const EncoderSlots& slots, const std::vector<int>& ids) {
  if (ids.empty()) throw InvalidArgument("encode: empty question");
  const std::size_t T = ids.size();
  const std::size_t H = slots.forward.hidden;
  EncodedQuestion out;
  out.ids = ids;
  out.embeddings = tape.gather_rows(slots.embedding, ids);

  Var pf = gru_project(tape, slots.forward, out.embeddings);
  Var pb = gru_project(tape, slots.backward, out.embeddings);
  std::vector<Var> fwd(T), bwd(T);
  Var h = tape.constant(Tensor(Shape{H}, 0.0));
  for (std::size_t t = 0; t < T; ++t) {
    h = gru_step(tape, slots.forward, row(pf, t), h);
    fwd[t] = h;
  }
  h = tape.constant(Tensor(Shape{slots.backward.hidden}, 0.0));
  for (std::size_t t = T; t-- > 0;) {
    h = gru_step(tape, slots.backward, row(pb, t), h);
    bwd[t] = h;
  }
  out.contextual = concat({stack(fwd), stack(bwd)}, 1);
  return out;
}

}  // namespace genqa
