// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include "doctest.h"
#include "genqa/errors.hpp"
#include "genqa/vocab.hpp"

using namespace genqa;

TEST_CASE("tokenize") {
  CHECK(tokenize("How tall is Yao Ming?") ==
        std::vector<std::string>{"how", "tall", "is", "yao", "ming", "?"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("He is 2.29m, and (tall).") ==
        std::vector<std::string>{"he", "is", "2.29m", ",", "and", "(", "tall", ")", "."});

  // idempotence over a random corpus of words, punctuation and spacing
  std::mt19937_64 rng(8);
  const std::vector<std::string> pieces{"Yao", "ming", "?", "2.29m", "...", "(x)", "a,b", "  ",
                                        "'quoted'", "Z!", "\t", "fc", "o'neal"};
  std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    for (int k = 0; k < 12; ++k) text += pieces[pick(rng)] + (k % 3 ? " " : "");
    const auto once = tokenize(text);
    CHECK(tokenize(join_tokens(once)) == once);
  }
}

TEST_CASE("build_vocab") {
  SUBCASE("most frequent token") {
    Vocabulary v = Vocabulary::build({{"a", "a", "b"}}, 1);
    CHECK(v.size() == Vocabulary::kReserved + 1);
    CHECK(v.contains("a"));
    CHECK_FALSE(v.contains("b"));
  }
  SUBCASE("predicate words are always included") {
    Vocabulary v = Vocabulary::build({{"a", "b"}}, 2, {"height"});
    CHECK(v.contains("height"));
  }
  SUBCASE("reserved ids are fixed") {
    Vocabulary v = Vocabulary::build({{"x"}}, 5);
    CHECK(v.id("<unk>") == Vocabulary::kUnk);
    CHECK(v.id("<s>") == Vocabulary::kBos);
    CHECK(v.id("</s>") == Vocabulary::kEos);
    CHECK(v.id("<pad>") == Vocabulary::kPad);
  }
  SUBCASE("empty corpus") { CHECK_THROWS_AS(Vocabulary::build({}, 4), InvalidArgument); }
  SUBCASE("membership equals a count-and-sort oracle") {
    std::mt19937_64 rng(99);
    std::geometric_distribution<int> word(0.05);
    std::vector<std::vector<std::string>> corpus(1);
    for (int i = 0; i < 1000; ++i) corpus[0].push_back("w" + std::to_string(word(rng)));
    const std::size_t size = 25;
    // oracle: count, then sort by (-count, first position)
    std::map<std::string, std::pair<int, int>> stats;
    for (int i = 0; i < 1000; ++i) {
      auto& s = stats[corpus[0][i]];
      if (s.first == 0) s.second = i;
      ++s.first;
    }
    std::vector<std::pair<std::string, std::pair<int, int>>> rows(stats.begin(), stats.end());
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
      if (a.second.first != b.second.first) return a.second.first > b.second.first;
      return a.second.second < b.second.second;
    });
    Vocabulary v = Vocabulary::build(corpus, size);
    CHECK(v.size() == Vocabulary::kReserved + size);
    for (std::size_t i = 0; i < size; ++i) {
      CHECK(v.token(static_cast<int>(Vocabulary::kReserved + i)) == rows[i].first);
    }
  }
}

TEST_CASE("encode and decode") {
  Vocabulary v = Vocabulary::build({{"how", "tall", "is"}}, 10);
  TokenSequence seq = v.encode({"how", "tall", "is", "yao"});
  CHECK(seq.ids[0] == v.id("how"));
  CHECK(seq.ids[3] == Vocabulary::kUnk);
  CHECK(seq.surface[3] == "yao");
  CHECK(v.decode(v.encode({"how", "is"}).ids) == std::vector<std::string>{"how", "is"});
  for (int id = 0; id < static_cast<int>(v.size()); ++id) CHECK(v.id(v.token(id)) == id);
}

TEST_CASE("vocabulary file round trip") {
  Vocabulary v = Vocabulary::build({{"b", "a", "b", "c"}}, 3);
  std::stringstream buf;
  v.write(buf);
  CHECK(buf.str() == "b\na\nc\n");
  Vocabulary back = Vocabulary::read(buf);
  CHECK(back == v);
  std::stringstream dup("x\nx\n");
  CHECK_THROWS_AS(Vocabulary::read(dup), FormatError);
}
