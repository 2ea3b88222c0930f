// SPDX-License-Identifier: Apache-2.0
#include "genqa/enquirer.hpp"

#include "genqa/errors.hpp"

namespace genqa {

std::string to_string(EnquirerKind kind) { return kind == EnquirerKind::Cnn ? "cnn" : "bilinear"; }

EnquirerKind parse_enquirer(const std::string& text) {
  if (text == "bilinear") return EnquirerKind::Bilinear;
  if (text == "cnn") return EnquirerKind::Cnn;
  throw InvalidArgument("unknown enquirer '" + text + "' (expected bilinear or cnn)");
}

BilinearSlots register_bilinear(ParameterSet& params, std::size_t emb, std::mt19937_64& rng) {
  BilinearSlots s;
  s.m = params.add("enq.m", glorot_uniform(Shape{emb, emb}, rng));
  return s;
}

CnnSlots register_cnn(ParameterSet& params, std::size_t emb, std::size_t width,
                      std::size_t feature_maps, std::size_t hidden, std::mt19937_64& rng) {
  if (width == 0) throw InvalidArgument("cnn filter width must be positive");
  CnnSlots s;
  s.width = width;
  s.filters = params.add("enq.conv.w", glorot_uniform(Shape{feature_maps, width * emb}, rng));
  s.filter_bias = params.add("enq.conv.b", Tensor(Shape{feature_maps}, 0.0));
  s.mlp_q = params.add("enq.mlp.w_q", glorot_uniform(Shape{hidden, feature_maps}, rng));
  s.mlp_u = params.add("enq.mlp.w_u", glorot_uniform(Shape{hidden, emb}, rng));
  s.mlp_b = params.add("enq.mlp.b", Tensor(Shape{hidden}, 0.0));
  s.out_w = params.add("enq.out.w", glorot_uniform(Shape{hidden, 1}, rng));
  s.out_b = params.add("enq.out.b", Tensor(Shape{1}, 0.0));
  return s;
}

BilinearSlots find_bilinear(const ParameterSet& params) { return {params.require("enq.m")}; }

CnnSlots find_cnn(const ParameterSet& params) {
  CnnSlots s;
  s.filters = params.require("enq.conv.w");
  s.filter_bias = params.require("enq.conv.b");
  s.mlp_q = params.require("enq.mlp.w_q");
  s.mlp_u = params.require("enq.mlp.w_u");
  s.mlp_b = params.require("enq.mlp.b");
  s.out_w = params.require("enq.out.w");
  s.out_b = params.require("enq.out.b");
  s.width = params.value(s.filters).cols() / params.value(s.mlp_u).cols();
  return s;
}

Var triple_embeddings(Tape& tape, int embedding_slot,
                      const std::vector<std::vector<int>>& triple_tokens) {
  return tape.gather_mean_rows(embedding_slot, triple_tokens);
}

Var score_bilinear(Tape& tape, const BilinearSlots& s, const EncodedQuestion& q, Var triples) {
  Var xbar = mean_rows(q.embeddings);
  // x^T M u == u . (M^T x)
  return matmul(triples, matmul(transpose(tape.param(s.m)), xbar));
}

Var cnn_question_summary(Tape& tape, const CnnSlots& s, const EncodedQuestion& q, Var pad_row) {
  Var x = q.embeddings;
  if (q.length() < s.width) {
    std::vector<Var> rows{x};
    for (std::size_t i = q.length(); i < s.width; ++i) rows.push_back(reshape(pad_row, Shape{1, pad_row.size()}));
    x = concat(rows, 0);
  }
  Var windows = unfold_rows(x, s.width);
  Var conv = tanh(add_rowwise(matmul(windows, transpose(tape.param(s.filters))),
                              tape.param(s.filter_bias)));
  return max_rows(conv);
}

Var score_cnn(Tape& tape, const CnnSlots& s, Var summary, Var triples) {
  Var shared = add(matmul(tape.param(s.mlp_q), summary), tape.param(s.mlp_b));
  Var hidden = tanh(add_rowwise(matmul(triples, transpose(tape.param(s.mlp_u))), shared));
  Var out = add_rowwise(matmul(hidden, tape.param(s.out_w)), tape.param(s.out_b));
  return reshape(out, Shape{triples.shape().rows()});
}

Var relevance_distribution(Var scores) {
  if (scores.size() == 0) throw InvalidArgument("relevance_distribution: empty candidate set");
  return softmax(scores);
}

}  // namespace genqa
