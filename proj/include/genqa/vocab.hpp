// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace genqa {

/// Lowercases, splits on whitespace and detaches leading/trailing punctuation.
/// Internal punctuation is kept, so "2.29m" and "o'neal" stay whole.
std::vector<std::string> tokenize(const std::string& text);

/// Joins tokens with single spaces.
std::string join_tokens(const std::vector<std::string>& tokens, std::size_t begin = 0,
                        std::size_t end = static_cast<std::size_t>(-1));

/// Ids paired with the surface strings they came from.
struct TokenSequence {
  std::vector<int> ids;
  std::vector<std::string> surface;

  std::size_t size() const { return ids.size(); }
  bool empty() const { return ids.empty(); }
};

class Vocabulary {
 public:
  static constexpr int kUnk = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kPad = 3;
  static constexpr int kReserved = 4;

  Vocabulary();

  /// The `size` most frequent tokens (ties by first occurrence) plus every
  /// `must_include` token not already present. Reserved tokens come first.
  static Vocabulary build(const std::vector<std::vector<std::string>>& corpus, std::size_t size,
                          const std::vector<std::string>& must_include = {});

  /// One token per line; line i holds id i + kReserved.
  static Vocabulary read(std::istream& in);
  void write(std::ostream& out) const;

  int id(const std::string& token) const;  ///< kUnk when absent
  bool contains(const std::string& token) const;
  const std::string& token(int id) const;
  std::size_t size() const { return tokens_.size(); }

  TokenSequence encode(const std::vector<std::string>& tokens) const;
  std::vector<std::string> decode(const std::vector<int>& ids) const;

  /// Appends a token (no-op if present); returns its id.
  int add(const std::string& token);

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

/// Per-question KB vocabulary. Candidate objects that are common words keep
/// their common id; the others get ids after the common vocabulary, in
/// candidate order. Together they form the union vocabulary of one question.
struct KbVocabulary {
  std::size_t common_size = 0;
  std::vector<std::string> extra;   ///< KB-only words, id common_size + j
  std::vector<int> candidate_word;  ///< union id of each candidate's object

  std::size_t union_size() const { return common_size + extra.size(); }
  bool kb_only(int union_id) const { return union_id >= static_cast<int>(common_size); }
  /// Candidate indices whose object is `union_id`.
  std::vector<int> candidates_of(int union_id) const;
  /// Union id of a word, or -1 if it is neither common nor a candidate object.
  int union_id(const Vocabulary& common, const std::string& word) const;
  const std::string& word(const Vocabulary& common, int union_id) const;
};

KbVocabulary build_kb_vocabulary(const Vocabulary& common,
                                 const std::vector<std::string>& candidate_objects);

}  // namespace genqa
