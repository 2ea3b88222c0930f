// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <random>
#include <string>
#include <vector>

#include "genqa/autodiff.hpp"
#include "genqa/parameters.hpp"

namespace genqa {

/// Slots of one GRU. Input projections for the three gates are stacked as
/// [update; reset; candidate] rows of w_x and b.
struct GruSlots {
  int w_x = -1;   ///< [3H x in]
  int u_zr = -1;  ///< [2H x H]
  int u_h = -1;   ///< [H x H]
  int b = -1;     ///< [3H]
  std::size_t input = 0;
  std::size_t hidden = 0;
};

GruSlots register_gru(ParameterSet& params, const std::string& prefix, std::size_t input,
                      std::size_t hidden, std::mt19937_64& rng);
GruSlots find_gru(const ParameterSet& params, const std::string& prefix);

/// Affine input projections for every row of `inputs` ([T x in] -> [T x 3H]).
Var gru_project(Tape& tape, const GruSlots& g, Var inputs);
/// One step from a projected input row ([3H]) and previous state ([H]).
Var gru_step(Tape& tape, const GruSlots& g, Var projected, Var h);

struct EncoderSlots {
  int embedding = -1;  ///< shared question/KB table [V x E]
  GruSlots forward;
  GruSlots backward;
};

/// Short-term memory for one question.
struct EncodedQuestion {
  Var contextual;  ///< [T x 2H], row t = [forward_t; backward_t]
  Var embeddings;  ///< [T x E]
  std::vector<int> ids;

  std::size_t length() const { return ids.size(); }
};

EncodedQuestion encode(Tape& tape, const EncoderSlots& slots, const std::vector<int>& ids);

}  // namespace genqa
