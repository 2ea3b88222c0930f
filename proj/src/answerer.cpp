// SPDX-License-Identifier: Apache-2.0
#include "genqa/answerer.hpp"

#include <string>

#include "genqa/errors.hpp"

namespace genqa {

DecoderSlots register_decoder(ParameterSet& params, std::size_t answer_vocab, std::size_t emb,
                              std::size_t hidden, std::size_t encoder_hidden,
                              std::size_t attention, std::mt19937_64& rng) {
  const std::size_t ctx = 2 * encoder_hidden;
  DecoderSlots d;
  d.embedding = params.add("dec.embedding", glorot_uniform(Shape{answer_vocab, emb}, rng));
  d.gru = register_gru(params, "dec.gru", emb + ctx, hidden, rng);
  d.att_keys = params.add("dec.att.w_h", glorot_uniform(Shape{attention, ctx}, rng));
  d.att_query = params.add("dec.att.w_s", glorot_uniform(Shape{attention, hidden}, rng));
  d.att_b = params.add("dec.att.b", Tensor(Shape{attention}, 0.0));
  d.att_v = params.add("dec.att.v", glorot_uniform(Shape{attention}, rng));
  d.init_w = params.add("dec.init.w", glorot_uniform(Shape{hidden, ctx}, rng));
  d.init_b = params.add("dec.init.b", Tensor(Shape{hidden}, 0.0));
  d.out_w = params.add("dec.out.w",
                       glorot_uniform(Shape{answer_vocab, hidden + ctx + emb}, rng));
  d.out_b = params.add("dec.out.b", Tensor(Shape{answer_vocab}, 0.0));
  d.switch_w = params.add("dec.switch.w", glorot_uniform(Shape{hidden}, rng));
  d.switch_b = params.add("dec.switch.b", Tensor(Shape{1}, 0.0));
  return d;
}

DecoderSlots find_decoder(const ParameterSet& params) {
  DecoderSlots d;
  d.embedding = params.require("dec.embedding");
  d.gru = find_gru(params, "dec.gru");
  d.att_keys = params.require("dec.att.w_h");
  d.att_query = params.require("dec.att.w_s");
  d.att_b = params.require("dec.att.b");
  d.att_v = params.require("dec.att.v");
  d.init_w = params.require("dec.init.w");
  d.init_b = params.require("dec.init.b");
  d.out_w = params.require("dec.out.w");
  d.out_b = params.require("dec.out.b");
  d.switch_w = params.require("dec.switch.w");
  d.switch_b = params.require("dec.switch.b");
  return d;
}

DecoderMemory prepare_memory(Tape& tape, const DecoderSlots& d, const EncodedQuestion& q) {
  DecoderMemory m;
  m.contextual_t = transpose(q.contextual);
  m.keys = matmul(q.contextual, transpose(tape.param(d.att_keys)));
  return m;
}

Var initial_state(Tape& tape, const DecoderSlots& d, const EncodedQuestion& q) {
  return add(matmul(tape.param(d.init_w), mean_rows(q.contextual)), tape.param(d.init_b));
}

Attention attention_context(Tape& tape, const DecoderSlots& d, const DecoderMemory& m,
                            Var s_prev) {
  Var query = add(matmul(tape.param(d.att_query), s_prev), tape.param(d.att_b));
  Var e = matmul(tanh(add_rowwise(m.keys, query)), tape.param(d.att_v));
  Attention a;
  a.weights = softmax(e);
  a.context = matmul(m.contextual_t, a.weights);
  return a;
}

StepOutput decoder_step(Tape& tape, const DecoderSlots& d, const DecoderMemory& m, Var s_prev,
                        int prev_common_id) {
  Attention att = attention_context(tape, d, m, s_prev);
  const int ids[] = {prev_common_id};
  Var emb = reshape(tape.gather_rows(d.embedding, ids), Shape{d.gru.input - att.context.size()});
  Var x = concat({emb, att.context});
  Var projected = add(matmul(tape.param(d.gru.w_x), x), tape.param(d.gru.b));
  StepOutput out;
  out.state = gru_step(tape, d.gru, projected, s_prev);
  Var logits = add(matmul(tape.param(d.out_w), concat({out.state, att.context, emb})),
                   tape.param(d.out_b));
  out.common = softmax(logits);
  out.switch_on = sigmoid(add(dot(tape.param(d.switch_w), out.state), tape.param(d.switch_b)));
  return out;
}

int decoder_input_id(const KbVocabulary& kb, int union_id) {
  return kb.kb_only(union_id) ? Vocabulary::kUnk : union_id;
}

std::vector<double> combine_distribution(const Tensor& common, double sigma,
                                         const Tensor* relevance, const KbVocabulary& kb) {
  if (common.size() != kb.common_size) {
    throw DimensionError("combine_distribution: common distribution has " +
                         std::to_string(common.size()) + " entries, expected " +
                         std::to_string(kb.common_size));
  }
  std::vector<double> p(kb.union_size(), 0.0);
  if (!relevance) {
    for (std::size_t w = 0; w < common.size(); ++w) p[w] = common[w];
    return p;
  }
  if (relevance->size() != kb.candidate_word.size()) {
    throw DimensionError("combine_distribution: r_Q has " + std::to_string(relevance->size()) +
                         " entries for " + std::to_string(kb.candidate_word.size()) +
                         " candidates");
  }
  for (std::size_t w = 0; w < common.size(); ++w) p[w] = (1.0 - sigma) * common[w];
  for (std::size_t k = 0; k < kb.candidate_word.size(); ++k) {
    p[kb.candidate_word[k]] += sigma * (*relevance)[k];
  }
  return p;
}

Var mixture_log_prob(const StepOutput& step, std::optional<Var> relevance, const KbVocabulary& kb,
                     int target) {
  if (target < 0 || static_cast<std::size_t>(target) >= kb.union_size()) {
    throw InvalidArgument("target id " + std::to_string(target) + " outside the union vocabulary");
  }
  if (!relevance) {
    if (kb.kb_only(target)) throw InvalidArgument("KB-only target with the KB branch disabled");
    return log(pick(step.common, static_cast<std::size_t>(target)));
  }
  const std::vector<int> sources = kb.candidates_of(target);
  if (kb.kb_only(target)) {
    if (sources.empty()) throw InvalidArgument("KB-only target with no candidate behind it");
    return log(mul(step.switch_on, select_sum(*relevance, sources)));
  }
  Var p = mul(one_minus(step.switch_on), pick(step.common, static_cast<std::size_t>(target)));
  if (!sources.empty()) p = add(p, mul(step.switch_on, select_sum(*relevance, sources)));
  return log(p);
}

Var sequence_log_likelihood(Tape& tape, const DecoderSlots& d, const EncodedQuestion& q,
                            std::optional<Var> relevance, const KbVocabulary& kb,
                            const std::vector<int>& targets) {
  if (targets.empty() || targets.back() != Vocabulary::kEos) {
    throw InvalidArgument("answer must end with EOS");
  }
  DecoderMemory m = prepare_memory(tape, d, q);
  Var s = initial_state(tape, d, q);
  int prev = Vocabulary::kBos;
  std::vector<Var> terms;
  terms.reserve(targets.size());
  for (int target : targets) {
    StepOutput step = decoder_step(tape, d, m, s, prev);
    terms.push_back(mixture_log_prob(step, relevance, kb, target));
    s = step.state;
    prev = decoder_input_id(kb, target);
  }
  return sum(concat(terms));
}

}  // namespace genqa
