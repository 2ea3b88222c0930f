// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <random>
#include <string>
#include <vector>

#include "genqa/autodiff.hpp"
#include "genqa/interpreter.hpp"

namespace genqa {

enum class EnquirerKind { Bilinear, Cnn };

std::string to_string(EnquirerKind kind);
EnquirerKind parse_enquirer(const std::string& text);

struct BilinearSlots {
  int m = -1;  ///< [E x E]
};

struct CnnSlots {
  int filters = -1;  ///< [F x width*E]
  int filter_bias = -1;
  int mlp_q = -1;  ///< [Hm x F], acts on the pooled question
  int mlp_u = -1;  ///< [Hm x E], acts on the triple embedding
  int mlp_b = -1;
  int out_w = -1;  ///< [Hm x 1]
  int out_b = -1;  ///< [1]
  std::size_t width = 3;
};

BilinearSlots register_bilinear(ParameterSet& params, std::size_t emb, std::mt19937_64& rng);
CnnSlots register_cnn(ParameterSet& params, std::size_t emb, std::size_t width,
                      std::size_t feature_maps, std::size_t hidden, std::mt19937_64& rng);
BilinearSlots find_bilinear(const ParameterSet& params);
CnnSlots find_cnn(const ParameterSet& params);

/// u_tau for each candidate: the mean embedding of its subject and predicate
/// tokens, one row per group of shared-table ids.
Var triple_embeddings(Tape& tape, int embedding_slot,
                      const std::vector<std::vector<int>>& triple_tokens);

/// x_bar^T M u_tau for every candidate row of `triples` ([K x E]).
Var score_bilinear(Tape& tape, const BilinearSlots& s, const EncodedQuestion& q, Var triples);

/// Convolution + max-pooling summary of the question embeddings. Questions
/// shorter than the filter are right-padded with `pad_row` ([E]).
Var cnn_question_summary(Tape& tape, const CnnSlots& s, const EncodedQuestion& q, Var pad_row);

/// MLP([h_Q; u_tau]) for every candidate row.
Var score_cnn(Tape& tape, const CnnSlots& s, Var summary, Var triples);

/// r_Q: softmax of candidate scores.
Var relevance_distribution(Var scores);

}  // namespace genqa
