// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <random>
#include <vector>

#include "genqa/autodiff.hpp"
#include "genqa/interpreter.hpp"
#include "genqa/vocab.hpp"

namespace genqa {

struct DecoderSlots {
  int embedding = -1;  ///< answer-side table [Va x E]
  GruSlots gru;        ///< input [E + 2H]
  int att_keys = -1;   ///< [A x 2H]
  int att_query = -1;  ///< [A x H]
  int att_b = -1;      ///< [A]
  int att_v = -1;      ///< [A]
  int init_w = -1;     ///< [H x 2H]
  int init_b = -1;     ///< [H]
  int out_w = -1;      ///< [Va x (H + 2H + E)]
  int out_b = -1;      ///< [Va]
  int switch_w = -1;   ///< [H]
  int switch_b = -1;   ///< [1]
};

DecoderSlots register_decoder(ParameterSet& params, std::size_t answer_vocab, std::size_t emb,
                              std::size_t hidden, std::size_t encoder_hidden,
                              std::size_t attention, std::mt19937_64& rng);
DecoderSlots find_decoder(const ParameterSet& params);

/// Per-question quantities the decoder reuses at every step.
struct DecoderMemory {
  Var contextual_t;  ///< [2H x T]
  Var keys;          ///< [T x A]
};

DecoderMemory prepare_memory(Tape& tape, const DecoderSlots& d, const EncodedQuestion& q);

/// s_0: affine map of the mean contextual state.
Var initial_state(Tape& tape, const DecoderSlots& d, const EncodedQuestion& q);

struct Attention {
  Var weights;  ///< alpha over question positions
  Var context;  ///< [2H]
};

Attention attention_context(Tape& tape, const DecoderSlots& d, const DecoderMemory& m, Var s_prev);

struct StepOutput {
  Var state;      ///< s_t
  Var common;     ///< softmax over the common vocabulary
  Var switch_on;  ///< p(z_t = 1 | s_t), [1]
};

/// Attention, GRU advance, output softmax and switch for one step. The
/// previous word is given as an answer-vocabulary id.
StepOutput decoder_step(Tape& tape, const DecoderSlots& d, const DecoderMemory& m, Var s_prev,
                        int prev_common_id);

/// What the previous word looks like to the decoder input: KB-only words are
/// fed as UNK.
int decoder_input_id(const KbVocabulary& kb, int union_id);

/// Combined distribution over the union vocabulary:
/// (1 - sigma) * p_common on common ids plus sigma * (r_Q mass per object).
/// Without r (KB branch off) the result is p_common padded with zeros.
std::vector<double> combine_distribution(const Tensor& common, double sigma,
                                         const Tensor* relevance, const KbVocabulary& kb);

/// log p(target) under the mixture, on the tape. `relevance` null means the
/// switch is clamped to 0.
Var mixture_log_prob(const StepOutput& step, std::optional<Var> relevance, const KbVocabulary& kb,
                     int target);

/// Teacher-forced sum of step log-probabilities. `targets` are union ids and
/// end with EOS.
Var sequence_log_likelihood(Tape& tape, const DecoderSlots& d, const EncodedQuestion& q,
                            std::optional<Var> relevance, const KbVocabulary& kb,
                            const std::vector<int>& targets);

}  // namespace genqa
