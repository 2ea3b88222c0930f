// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "genqa/aho_corasick.hpp"

namespace genqa {

/// A (subject, predicate, object) fact. Fields are stored normalized:
/// lowercased, tokenized and re-joined with single spaces.
struct Triple {
  std::string subject;
  std::string predicate;
  std::string object;
  int id = -1;
};

/// Lowercase + tokenize + join; the canonical form used for all KB strings.
std::string normalize_text(const std::string& text);

struct SubjectMention {
  std::string subject;
  std::size_t begin = 0;  ///< byte span in the normalized text
  std::size_t end = 0;

  bool operator==(const SubjectMention&) const = default;
};

/// Question-specific candidate triple ids, in retrieval order.
struct CandidateSet {
  std::vector<int> triple_ids;

  std::size_t size() const { return triple_ids.size(); }
  bool empty() const { return triple_ids.empty(); }
};

class TripleStore {
 public:
  static constexpr std::size_t kDefaultCandidateCap = 256;

  TripleStore() = default;
  /// Normalizes, drops exact (s, p, o) duplicates and assigns ids in input
  /// order. Throws on an empty input or a field that normalizes to "".
  static TripleStore build(const std::vector<Triple>& triples);

  std::size_t size() const { return triples_.size(); }
  const Triple& triple(int id) const { return triples_.at(static_cast<std::size_t>(id)); }
  const std::vector<Triple>& triples() const { return triples_; }
  const std::vector<int>& triples_of(const std::string& subject) const;
  std::vector<std::string> subjects() const;
  std::optional<int> find(const std::string& subject, const std::string& predicate,
                          const std::string& object) const;
  const AhoCorasick& matcher() const { return matcher_; }

  /// Token-aligned occurrences of subjects in `text` (normalized first).
  std::vector<SubjectMention> find_subject_mentions(const std::string& text) const;

  /// Triples whose subject occurs in the question. Ordered by matched subject
  /// length (longest first), then triple id; truncated to `cap`.
  CandidateSet retrieve_candidates(const std::vector<std::string>& question_tokens,
                                   std::size_t cap = kDefaultCandidateCap) const;

 private:
  std::vector<Triple> triples_;
  std::map<std::tuple<std::string, std::string, std::string>, int> by_fact_;
  std::unordered_map<std::string, std::vector<int>> by_subject_;
  std::vector<std::string> subject_patterns_;
  AhoCorasick matcher_;
};

/// A QA pair tied to the triple that supports it.
struct GroundedInstance {
  std::vector<std::string> question;  ///< surface tokens
  std::vector<std::string> answer;    ///< surface tokens
  int gold_triple = -1;
  std::size_t span_begin = 0;  ///< object tokens occupy answer[span_begin, span_end)
  std::size_t span_end = 0;
};

/// First token-aligned occurrence of `needle` inside `haystack`.
std::optional<std::size_t> find_token_span(const std::vector<std::string>& haystack,
                                           const std::vector<std::string>& needle);

/// Relevance of a surviving candidate: +2 per question token found in the
/// predicate, +1 per character of the subject.
int grounding_score(const Triple& triple, const std::vector<std::string>& question_tokens);

/// Picks the candidate whose object occurs in the answer with the best
/// grounding_score (ties to the lowest id). nullopt when nothing survives.
std::optional<GroundedInstance> ground_qa_pair(const TripleStore& store,
                                               const std::vector<std::string>& question,
                                               const std::vector<std::string>& answer,
                                               std::size_t cap = TripleStore::kDefaultCandidateCap);

/// Splits by gold triple so no triple has instances on both sides. The test
/// side receives round(test_fraction * distinct triples) triples.
std::pair<std::vector<GroundedInstance>, std::vector<GroundedInstance>> partition_by_triple(
    const std::vector<GroundedInstance>& instances, double test_fraction, std::uint64_t seed);

}  // namespace genqa
