// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "genqa/io.hpp"
#include "genqa/kb_store.hpp"

namespace genqa {

/// One predicate: its value pool and its surface templates. Question
/// templates hold `{s}`, answer templates hold `{o}`.
struct PredicateSchema {
  std::string name;
  std::vector<std::string> values;
  std::vector<std::string> questions;
  std::vector<std::string> answers;
};

/// Five built-in predicates: height, place of birth, team, birth year,
/// occupation.
const std::vector<PredicateSchema>& predicate_catalog();

struct SyntheticSpec {
  std::size_t entities = 1000;
  std::size_t predicates = 5;        ///< first N schemas are used
  std::size_t paraphrases = 3;       ///< question templates per predicate
  std::size_t answer_templates = 2;  ///< answer templates per predicate
  std::size_t qa_per_triple = 1;
  double noise = 0.1;           ///< fraction of QA pairs given a typo or filler
  double held_out = 0.2;        ///< test fraction used when the corpus is split
  double mononyms = 0.05;       ///< fraction of single-token entity names
  std::uint64_t seed = 7;
  std::vector<PredicateSchema> schemas;  ///< empty means predicate_catalog()

  const std::vector<PredicateSchema>& active_schemas() const;
  void validate() const;

  json to_json() const;
  /// Missing keys keep their defaults; unknown keys are rejected.
  static SyntheticSpec from_json(const json& j);
};

struct SyntheticCorpus {
  std::vector<Triple> triples;
  std::vector<QaPair> qa;
  std::vector<int> gold;  ///< triple index behind each QA pair
  std::vector<bool> noisy;
};

/// Deterministic from `spec.seed`.
SyntheticCorpus generate_synthetic(const SyntheticSpec& spec);

/// Answer templates of the active schemas, for the fluency check.
std::vector<std::string> answer_templates(const SyntheticSpec& spec);

/// Writes triples.jsonl, qa.jsonl and gold.jsonl under `dir`.
void write_synthetic(const SyntheticCorpus& corpus, const std::string& dir);

}  // namespace genqa
