// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "genqa/io.hpp"
#include "genqa/model.hpp"

namespace genqa {

/// Source of next-token distributions over a fixed vocabulary.
class StepModel {
 public:
  virtual ~StepModel() = default;
  virtual std::size_t vocab_size() const = 0;
  virtual int eos() const = 0;
  virtual Tensor initial_state() = 0;
  /// Probabilities of the next token. `prev` is -1 at the first step.
  virtual std::vector<double> next(const Tensor& state, int prev, Tensor& next_state) = 0;
};

struct BeamHypothesis {
  std::vector<int> tokens;
  Tensor state;
  double log_prob = 0.0;
  bool finished = false;

  /// Log-probability per generated token, EOS included.
  double normalized() const {
    return tokens.empty() ? 0.0 : log_prob / static_cast<double>(tokens.size());
  }
};

/// Ranking used for final hypotheses: higher normalized score first, then
/// lexicographically smaller token ids.
bool better_final(const BeamHypothesis& a, const BeamHypothesis& b);

/// Beam search. Hypotheses ending in EOS are retired and held aside; live
/// ones still open at `max_len` tokens are retired as they are. Returns every
/// retired hypothesis, best first.
std::vector<BeamHypothesis> beam_search(StepModel& model, std::size_t beam_width,
                                        std::size_t max_len);

/// Step model over one prepared question.
class GenQaDecoder : public StepModel {
 public:
  GenQaDecoder(const GenQaModel& model, const PreparedExample& ex);

  std::size_t vocab_size() const override { return ex_.kb.union_size(); }
  int eos() const override { return Vocabulary::kEos; }
  Tensor initial_state() override;
  std::vector<double> next(const Tensor& state, int prev, Tensor& next_state) override;

  /// Per-step view used for provenance: switch probability and the two
  /// branch contributions to the given word.
  struct StepTrace {
    double switch_on = 0.0;
    double common_part = 0.0;
    double kb_part = 0.0;
  };
  std::vector<StepTrace> trace(const std::vector<int>& tokens);

  /// r_Q values (empty when the KB branch is off).
  std::vector<double> relevance() const;

 private:
  const GenQaModel& model_;
  const PreparedExample& ex_;
  Tape tape_;
  ForwardState fwd_;
  DecoderMemory memory_;
  Var s0_;
};

struct KbWord {
  std::string word;
  std::string subject;
  std::string predicate;
};

struct AnswerResult {
  std::string answer;
  std::vector<int> tokens;  ///< union ids, EOS excluded
  std::vector<KbWord> kb_words;
  double score = 0.0;
  bool ungrounded = false;
  std::vector<double> relevance;
  std::vector<int> candidates;  ///< triple ids aligned with `relevance`

  json to_json() const;
};

AnswerResult answer_question(const GenQaModel& model, const TripleStore& store,
                             const std::string& question, std::size_t beam_width,
                             std::size_t max_len);

}  // namespace genqa
