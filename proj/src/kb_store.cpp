// SPDX-License-Identifier: Apache-2.0
#include "genqa/kb_store.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <unordered_set>

#include "genqa/errors.hpp"
#include "genqa/vocab.hpp"

namespace genqa {

std::string normalize_text(const std::string& text) { return join_tokens(tokenize(text)); }

TripleStore TripleStore::build(const std::vector<Triple>& triples) {
  if (triples.empty()) throw InvalidArgument("cannot build a triple store from no triples");
  TripleStore store;
  for (const Triple& raw : triples) {
    Triple t{normalize_text(raw.subject), normalize_text(raw.predicate), normalize_text(raw.object),
             -1};
    if (t.subject.empty() || t.predicate.empty() || t.object.empty()) {
      throw InvalidArgument("triple with an empty field: (" + raw.subject + ", " + raw.predicate +
                            ", " + raw.object + ")");
    }
    auto key = std::make_tuple(t.subject, t.predicate, t.object);
    if (store.by_fact_.contains(key)) continue;
    t.id = static_cast<int>(store.triples_.size());
    store.by_fact_.emplace(std::move(key), t.id);
    auto [it, fresh] = store.by_subject_.try_emplace(t.subject);
    if (fresh) store.subject_patterns_.push_back(t.subject);
    it->second.push_back(t.id);
    store.triples_.push_back(std::move(t));
  }
  store.matcher_ = AhoCorasick(store.subject_patterns_);
  return store;
}

const std::vector<int>& TripleStore::triples_of(const std::string& subject) const {
  static const std::vector<int> kNone;
  auto it = by_subject_.find(subject);
  return it == by_subject_.end() ? kNone : it->second;
}

std::vector<std::string> TripleStore::subjects() const { return subject_patterns_; }

std::optional<int> TripleStore::find(const std::string& subject, const std::string& predicate,
                                     const std::string& object) const {
  auto it = by_fact_.find(
      std::make_tuple(normalize_text(subject), normalize_text(predicate), normalize_text(object)));
  if (it == by_fact_.end()) return std::nullopt;
  return it->second;
}

std::vector<SubjectMention> TripleStore::find_subject_mentions(const std::string& text) const {
  const std::string norm = normalize_text(text);
  std::vector<SubjectMention> out;
  for (const auto& m : matcher_.find_all(norm)) {
    const bool left = m.begin == 0 || norm[m.begin - 1] == ' ';
    const bool right = m.end == norm.size() || norm[m.end] == ' ';
    if (left && right) out.push_back({matcher_.pattern(m.pattern), m.begin, m.end});
  }
  return out;
}

CandidateSet TripleStore::retrieve_candidates(const std::vector<std::string>& question_tokens,
                                              std::size_t cap) const {
  std::set<std::string> seen;
  std::vector<std::pair<std::size_t, int>> ranked;  // (subject length, triple id)
  for (const auto& m : find_subject_mentions(join_tokens(question_tokens))) {
    if (!seen.insert(m.subject).second) continue;
    for (int id : triples_of(m.subject)) ranked.emplace_back(m.subject.size(), id);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  CandidateSet out;
  for (std::size_t i = 0; i < ranked.size() && i < cap; ++i) out.triple_ids.push_back(ranked[i].second);
  return out;
}

std::optional<std::size_t> find_token_span(const std::vector<std::string>& haystack,
                                           const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > haystack.size()) return std::nullopt;
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    if (std::equal(needle.begin(), needle.end(), haystack.begin() + static_cast<long>(i))) return i;
  }
  return std::nullopt;
}

int grounding_score(const Triple& triple, const std::vector<std::string>& question_tokens) {
  const auto pred = tokenize(triple.predicate);
  const std::unordered_set<std::string> pred_set(pred.begin(), pred.end());
  int score = 0;
  for (const auto& tok : question_tokens) {
    if (pred_set.contains(tok)) score += 2;
  }
  return score + static_cast<int>(triple.subject.size());
}

std::optional<GroundedInstance> ground_qa_pair(const TripleStore& store,
                                               const std::vector<std::string>& question,
                                               const std::vector<std::string>& answer,
                                               std::size_t cap) {
  const CandidateSet candidates = store.retrieve_candidates(question, cap);
  std::optional<GroundedInstance> best;
  int best_score = 0;
  for (int id : candidates.triple_ids) {
    const Triple& t = store.triple(id);
    auto span = find_token_span(answer, tokenize(t.object));
    if (!span) continue;
    const int score = grounding_score(t, question);
    if (best && (score < best_score || (score == best_score && id > best->gold_triple))) continue;
    GroundedInstance inst;
    inst.question = question;
    inst.answer = answer;
    inst.gold_triple = id;
    inst.span_begin = *span;
    inst.span_end = *span + tokenize(t.object).size();
    best = std::move(inst);
    best_score = score;
  }
  return best;
}

std::pair<std::vector<GroundedInstance>, std::vector<GroundedInstance>> partition_by_triple(
    const std::vector<GroundedInstance>& instances, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw InvalidArgument("test fraction must lie strictly between 0 and 1");
  }
  std::set<int> distinct;
  for (const auto& inst : instances) distinct.insert(inst.gold_triple);
  std::vector<int> keys(distinct.begin(), distinct.end());
  std::mt19937_64 rng(seed);
  std::shuffle(keys.begin(), keys.end(), rng);
  const auto n_test =
      static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(keys.size())));
  if (n_test == 0 || n_test >= keys.size()) {
    throw InvalidArgument("split of " + std::to_string(keys.size()) + " triples at fraction " +
                          std::to_string(test_fraction) + " leaves one side empty");
  }
  const std::unordered_set<int> test_keys(keys.begin(), keys.begin() + static_cast<long>(n_test));
  std::pair<std::vector<GroundedInstance>, std::vector<GroundedInstance>> out;
  for (const auto& inst : instances) {
    (test_keys.contains(inst.gold_triple) ? out.second : out.first).push_back(inst);
  }
  return out;
}

}  // namespace genqa
