// SPDX-License-Identifier: Apache-2.0
#include "genqa/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>

#include "genqa/errors.hpp"

namespace genqa {

namespace {

const char* const kReservedTokens[] = {"<unk>", "<s>", "</s>", "<pad>"};

bool is_punct(unsigned char c) { return std::ispunct(c) != 0; }

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < n && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j == i) break;
    std::string word = text.substr(i, j - i);
    for (char& c : word) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    std::size_t b = 0, e = word.size();
    std::vector<std::string> trailing;
    while (b < e && is_punct(static_cast<unsigned char>(word[b]))) {
      out.emplace_back(1, word[b]);
      ++b;
    }
    while (e > b && is_punct(static_cast<unsigned char>(word[e - 1]))) {
      trailing.emplace_back(1, word[e - 1]);
      --e;
    }
    if (e > b) out.push_back(word.substr(b, e - b));
    out.insert(out.end(), trailing.rbegin(), trailing.rend());
    i = j;
  }
  return out;
}

std::string join_tokens(const std::vector<std::string>& tokens, std::size_t begin,
                        std::size_t end) {
  end = std::min(end, tokens.size());
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) out += ' ';
    out += tokens[i];
  }
  return out;
}

Vocabulary::Vocabulary() {
  for (const char* t : kReservedTokens) add(t);
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& corpus,
                             std::size_t size, const std::vector<std::string>& must_include) {
  if (corpus.empty()) throw InvalidArgument("cannot build a vocabulary from an empty corpus");
  struct Count {
    std::size_t freq = 0;
    std::size_t first = 0;
  };
  std::unordered_map<std::string, Count> counts;
  std::vector<std::string> order;
  for (const auto& sentence : corpus) {
    for (const auto& tok : sentence) {
      auto [it, inserted] = counts.try_emplace(tok);
      if (inserted) {
        it->second.first = order.size();
        order.push_back(tok);
      }
      ++it->second.freq;
    }
  }
  std::vector<std::string> ranked = order;
  std::stable_sort(ranked.begin(), ranked.end(), [&](const std::string& a, const std::string& b) {
    return counts[a].freq > counts[b].freq;
  });

  Vocabulary v;
  std::size_t taken = 0;
  for (const auto& tok : ranked) {
    if (taken == size) break;
    if (v.contains(tok)) continue;  // literal reserved strings
    v.add(tok);
    ++taken;
  }
  for (const auto& tok : must_include) v.add(tok);
  return v;
}

Vocabulary Vocabulary::read(std::istream& in) {
  Vocabulary v;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) throw FormatError("empty vocabulary entry on line " + std::to_string(lineno));
    if (v.contains(line)) {
      throw FormatError("duplicate vocabulary entry '" + line + "' on line " +
                        std::to_string(lineno));
    }
    v.add(line);
  }
  return v;
}

void Vocabulary::write(std::ostream& out) const {
  for (std::size_t i = kReserved; i < tokens_.size(); ++i) out << tokens_[i] << '\n';
}

int Vocabulary::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(const std::string& token) const { return index_.contains(token); }

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw InvalidArgument("token id " + std::to_string(id) + " outside vocabulary");
  }
  return tokens_[id];
}

TokenSequence Vocabulary::encode(const std::vector<std::string>& tokens) const {
  TokenSequence seq;
  seq.surface = tokens;
  seq.ids.reserve(tokens.size());
  for (const auto& t : tokens) seq.ids.push_back(id(t));
  return seq;
}

std::vector<std::string> Vocabulary::decode(const std::vector<int>& ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int i : ids) out.push_back(token(i));
  return out;
}

int Vocabulary::add(const std::string& token) {
  auto it = index_.find(token);
  if (it != index_.end()) return it->second;
  const int id = static_cast<int>(tokens_.size());
  tokens_.push_back(token);
  index_.emplace(token, id);
  return id;
}

}  // namespace genqa

namespace genqa {

std::vector<int> KbVocabulary::candidates_of(int union_id) const {
  std::vector<int> out;
  for (std::size_t k = 0; k < candidate_word.size(); ++k) {
    if (candidate_word[k] == union_id) out.push_back(static_cast<int>(k));
  }
  return out;
}

int KbVocabulary::union_id(const Vocabulary& common, const std::string& word) const {
  if (common.contains(word)) return common.id(word);
  for (std::size_t j = 0; j < extra.size(); ++j) {
    if (extra[j] == word) return static_cast<int>(common_size + j);
  }
  return -1;
}

const std::string& KbVocabulary::word(const Vocabulary& common, int union_id) const {
  if (kb_only(union_id)) return extra.at(static_cast<std::size_t>(union_id) - common_size);
  return common.token(union_id);
}

KbVocabulary build_kb_vocabulary(const Vocabulary& common,
                                 const std::vector<std::string>& candidate_objects) {
  KbVocabulary kb;
  kb.common_size = common.size();
  for (const auto& object : candidate_objects) {
    int id = kb.union_id(common, object);
    if (id < 0) {
      kb.extra.push_back(object);
      id = static_cast<int>(kb.union_size() - 1);
    }
    kb.candidate_word.push_back(id);
  }
  return kb;
}

}  // namespace genqa
