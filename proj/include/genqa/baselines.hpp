// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "genqa/config.hpp"
#include "genqa/kb_store.hpp"
#include "genqa/model.hpp"
#include "genqa/trainer.hpp"

namespace genqa {

/// The no-KB ablation of a GenQA model: switch clamped to 0 at train and test.
GenQaModel nrm_mode(GenQaModel model);

/// Inverted index treating each triple's subject+predicate tokens as a
/// document. Score = sum over question tokens of tf(t, d) * ln(1 + N / df(t)).
class TfIdfIndex {
 public:
  explicit TfIdfIndex(const TripleStore& store);

  /// Every triple sharing at least one token with the question, best first;
  /// ties go to the lower triple id.
  std::vector<std::pair<int, double>> rank(const std::vector<std::string>& question) const;
  std::optional<int> best(const std::vector<std::string>& question) const;
  double idf(const std::string& token) const;

 private:
  struct Posting {
    int doc;
    int tf;
  };
  std::unordered_map<std::string, std::vector<Posting>> postings_;
  std::size_t docs_ = 0;
};

/// Retrieval baseline: object of the top-ranked triple.
std::optional<int> retrieval_answer(const TfIdfIndex& index, const std::vector<std::string>& question);

/// Embedding baseline: separate question-side and KB-side tables, score is
/// the inner product of the mean question embedding and the mean
/// subject+predicate embedding.
class EmbeddingQa {
 public:
  EmbeddingQa() = default;
  static EmbeddingQa create(const Config& config, const std::vector<GroundedInstance>& train,
                            const TripleStore& store);

  const Config& config() const { return config_; }
  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }
  const Vocabulary& question_vocab() const { return question_vocab_; }
  const Vocabulary& kb_vocab() const { return kb_vocab_; }

  std::vector<int> question_rows(const std::vector<std::string>& question) const;
  std::vector<int> triple_rows(const Triple& t) const;

  /// S(Q, tau) on a tape.
  Var score(Tape& tape, const std::vector<int>& question_rows, const std::vector<int>& triple_rows) const;
  double score(const std::vector<std::string>& question, const Triple& t) const;

  /// Sum over negatives of max(0, m - S(Q, gold) + S(Q, neg)).
  Var hinge_loss(Tape& tape, const std::vector<std::string>& question, const Triple& gold,
                 const std::vector<const Triple*>& negatives) const;

  /// Best candidate by score (ties to the earlier candidate); nullopt when the
  /// question matches no subject.
  std::optional<int> answer(const std::vector<std::string>& question, const TripleStore& store) const;

  static EmbeddingQa assemble(const Config& config, Vocabulary question_vocab, Vocabulary kb_vocab,
                              ParameterSet params);

 private:
  Config config_;
  Vocabulary question_vocab_;
  Vocabulary kb_vocab_;
  ParameterSet params_;
  int question_slot_ = -1;
  int kb_slot_ = -1;
};

/// Negatives for one instance: drawn with replacement from its candidate set
/// minus the gold triple, or from the whole store when that leaves nothing.
std::vector<int> sample_negatives(const TripleStore& store, const CandidateSet& candidates,
                                  int gold, std::size_t count, std::mt19937_64& rng);

/// Ranking-loss SGD. Logs mean hinge loss per epoch.
std::vector<EpochLog> train_embedding_qa(EmbeddingQa& model,
                                         const std::vector<GroundedInstance>& train,
                                         const TripleStore& store, const Config& config,
                                         const EpochCallback& on_epoch = {});

Checkpoint make_checkpoint(const EmbeddingQa& model, const TripleStore& store);
EmbeddingQa embedding_from_checkpoint(const Checkpoint& ck);

}  // namespace genqa
