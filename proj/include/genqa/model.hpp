// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "genqa/answerer.hpp"
#include "genqa/config.hpp"
#include "genqa/enquirer.hpp"
#include "genqa/interpreter.hpp"
#include "genqa/kb_store.hpp"
#include "genqa/parameters.hpp"
#include "genqa/vocab.hpp"

namespace genqa {

/// One question made ready for the network: ids, candidates, the question's
/// KB vocabulary and (for training) the target union ids ending in EOS.
struct PreparedExample {
  std::vector<int> question;                  ///< rows of the shared table
  CandidateSet candidates;
  std::vector<std::vector<int>> triple_rows;  ///< subject+predicate rows per candidate
  KbVocabulary kb;
  std::vector<int> targets;
  int gold_candidate = -1;  ///< index of the gold triple in `candidates`, or -1

  bool kb_enabled() const { return !candidates.empty(); }
};

/// Forward quantities of one question, kept on a tape.
struct ForwardState {
  EncodedQuestion encoded;
  std::optional<Var> relevance;  ///< absent when the KB branch is off
};

class GenQaModel {
 public:
  GenQaModel() = default;

  /// Builds vocabularies from the training instances and store, then
  /// initializes every slot from `config.seed`.
  static GenQaModel create(const Config& config, const std::vector<GroundedInstance>& train,
                           const TripleStore& store);
  /// Reassembles a model from checkpoint pieces.
  static GenQaModel assemble(const Config& config, Vocabulary question_vocab,
                             std::vector<std::string> kb_tokens, Vocabulary answer_vocab,
                             ParameterSet params);

  const Config& config() const { return config_; }
  bool kb_branch() const { return config_.system != SystemKind::Nrm; }
  EnquirerKind enquirer() const { return config_.enquirer; }
  /// Switches between the full model and the no-KB ablation; parameters are
  /// untouched.
  void set_system(SystemKind system);

  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }
  const Vocabulary& question_vocab() const { return question_vocab_; }
  const Vocabulary& answer_vocab() const { return answer_vocab_; }
  /// KB subject/predicate tokens with rows after the question vocabulary.
  const std::vector<std::string>& kb_tokens() const { return kb_tokens_; }

  /// Shared-table row of a token (UNK row when unknown).
  int shared_row(const std::string& token) const;

  /// Candidates and KB vocabulary for a question. With `instance` the answer
  /// targets are filled in too.
  PreparedExample prepare(const std::vector<std::string>& question, const TripleStore& store,
                          const GroundedInstance* instance = nullptr) const;
  /// Union ids of an answer with its object span collapsed into one word.
  std::vector<int> answer_targets(const GroundedInstance& instance, const KbVocabulary& kb) const;

  ForwardState forward(Tape& tape, const PreparedExample& ex) const;
  /// Raw enquirer scores of the candidates.
  Var candidate_scores(Tape& tape, const EncodedQuestion& q, const PreparedExample& ex) const;
  /// Teacher-forced log-likelihood of `ex.targets`.
  Var log_likelihood(Tape& tape, const PreparedExample& ex) const;

  const EncoderSlots& encoder() const { return encoder_; }
  const DecoderSlots& decoder() const { return decoder_; }

 private:
  void bind_slots();

  Config config_;
  Vocabulary question_vocab_;
  std::vector<std::string> kb_tokens_;
  std::unordered_map<std::string, int> kb_rows_;
  Vocabulary answer_vocab_;
  ParameterSet params_;
  EncoderSlots encoder_;
  BilinearSlots bilinear_;
  CnnSlots cnn_;
  DecoderSlots decoder_;
};

/// The answer with its object span replaced by the single object word.
std::vector<std::string> collapse_object(const GroundedInstance& instance);

}  // namespace genqa
