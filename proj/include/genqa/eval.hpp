// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "genqa/baselines.hpp"
#include "genqa/inference.hpp"
#include "genqa/io.hpp"
#include "genqa/model.hpp"

namespace genqa {

/// Gold object occurs as a token-aligned span of the answer.
bool contains_object(const std::vector<std::string>& answer_tokens, const std::string& object);

/// Complete-sentence check: the answer is some template with its `{o}` slot
/// filled by one or more tokens.
class FluencyCheck {
 public:
  explicit FluencyCheck(const std::vector<std::string>& templates);
  bool fluent(const std::vector<std::string>& answer_tokens) const;
  bool empty() const { return patterns_.empty(); }

 private:
  struct Pattern {
    std::vector<std::string> before, after;
  };
  std::vector<Pattern> patterns_;
};

struct EvalRecord {
  std::string question;
  std::string answer;
  std::string gold_object;
  bool correct = false;
  bool ungrounded = false;
  std::optional<bool> fluent;  ///< only for generative systems
};

struct EvalReport {
  std::string system;
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t ungrounded = 0;
  std::optional<double> fluency;
  /// Correct answers whose surrounding words do not form a template sentence.
  std::optional<double> improper_surrounding;
  std::vector<EvalRecord> records;

  double accuracy() const {
    return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
  }
  json to_json() const;
};

/// Generative systems (GenQA, GenQA-CNN, NRM): beam-search answers.
EvalReport evaluate_generative(const std::string& system, const GenQaModel& model,
                               const TripleStore& store,
                               const std::vector<GroundedInstance>& test,
                               const FluencyCheck& fluency, std::size_t threads = 1);

EvalReport evaluate_retrieval(const TripleStore& store, const std::vector<GroundedInstance>& test);

EvalReport evaluate_embedding(const EmbeddingQa& model, const TripleStore& store,
                              const std::vector<GroundedInstance>& test);

/// Plain-text table: one row per system, accuracy as a percentage.
std::string report_table(const std::vector<EvalReport>& reports);

}  // namespace genqa
