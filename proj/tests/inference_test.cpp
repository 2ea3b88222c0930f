// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "doctest.h"
#include "genqa/errors.hpp"
#include "genqa/inference.hpp"
#include "genqa/trainer.hpp"
#include "toy_data.hpp"
#include "toy_step_model.hpp"

using namespace genqa;

TEST_CASE("beam search is exact when nothing can be pruned") {
  // 3 tokens: at most 2 x 2 open expansions per step, under the width of 5
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    testing::RandomPrefixModel m(3, seed, 2.0);
    const auto beams = beam_search(m, 5, 4);
    const auto want = testing::exhaustive_best(m, 4);
    REQUIRE(!beams.empty());
    CHECK(beams.front().tokens == want.tokens);
    CHECK(beams.front().normalized() == doctest::Approx(want.normalized).epsilon(1e-12));
  }
}

TEST_CASE("hypothesis bookkeeping") {
  testing::RandomPrefixModel m(5, 3);
  for (const auto& h : beam_search(m, 4, 3)) {
    // accumulated log-prob equals the sum of step log-probs
    testing::RandomPrefixModel replay(5, 3);
    double lp = 0.0;
    std::vector<int> prefix;
    for (int t : h.tokens) {
      lp += std::log(replay.distribution(prefix)[static_cast<std::size_t>(t)]);
      prefix.push_back(t);
    }
    CHECK(h.log_prob == doctest::Approx(lp).epsilon(1e-12));
    CHECK(h.finished == (h.tokens.back() == m.eos()));
    CHECK(h.tokens.size() <= 3);
  }
}

TEST_CASE("results are ranked by normalized score") {
  testing::RandomPrefixModel m(5, 11);
  const auto beams = beam_search(m, 3, 5);
  for (std::size_t i = 1; i < beams.size(); ++i) CHECK_FALSE(better_final(beams[i], beams[i - 1]));
}

TEST_CASE("width one is greedy decoding") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    testing::RandomPrefixModel a(5, seed), b(5, seed);
    double lp = 0.0;
    const auto g = testing::greedy(a, 6, &lp);
    const auto beams = beam_search(b, 1, 6);
    // the single live path is greedy; other retired entries are EOS side branches
    bool found = false;
    for (const auto& h : beams) found = found || h.tokens == g;
    CHECK(found);
  }
}

TEST_CASE("wider beams never score below greedy") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    testing::RandomPrefixModel a(5, seed), b(5, seed);
    double lp = 0.0;
    const auto g = testing::greedy(a, 4, &lp);
    const double greedy_score = lp / static_cast<double>(g.size());
    for (std::size_t w : {1, 2, 5}) {
      testing::RandomPrefixModel m(5, seed);
      CHECK(beam_search(m, w, 4).front().normalized() >= greedy_score - 1e-12);
    }
  }
}

TEST_CASE("uniform steps tie and the smallest sequence wins") {
  testing::UniformModel m(4);
  const auto beams = beam_search(m, 5, 3);
  // every complete sequence scores log(1/4) per token
  CHECK(beams.front().tokens == std::vector<int>{0});
}

TEST_CASE("beam arguments are validated") {
  testing::UniformModel m(3);
  CHECK_THROWS_AS(beam_search(m, 0, 3), InvalidArgument);
  CHECK_THROWS_AS(beam_search(m, 2, 0), InvalidArgument);
}

// ---------------------------------------------------------------------------

namespace {

struct Trained {
  testing::ToyData data = testing::synthetic_data(40, 3);
  GenQaModel model;
  std::vector<GroundedInstance> train_set, test_set;

  Trained() {
    Config c;
    c.embedding_dim = 16;
    c.hidden_dim = 16;
    c.attention_dim = 16;
    c.learning_rate = 0.5;
    c.epochs = 25;
    c.beam_width = 3;
    auto split = partition_by_triple(data.instances, 0.2, 5);
    train_set = split.first;
    test_set = split.second;
    model = GenQaModel::create(c, train_set, data.store);
    train(model, prepare_dataset(model, train_set, data.store), c);
  }
};

const Trained& trained() {
  static const Trained t;
  return t;
}

}  // namespace

TEST_CASE("answers to unseen facts carry the KB object") {
  const Trained& t = trained();
  std::size_t correct = 0;
  for (const auto& g : t.test_set) {
    const AnswerResult a = answer_question(t.model, t.data.store, join_tokens(g.question), 3, 20);
    const auto tokens = tokenize(a.answer);
    const auto object = tokenize(t.data.store.triple(g.gold_triple).object);
    correct += find_token_span(tokens, object).has_value();
  }
  CHECK(correct * 2 > t.test_set.size());
}

TEST_CASE("every KB word comes from a candidate and from the KB branch") {
  const Trained& t = trained();
  std::size_t kb_words = 0;
  for (const auto& g : t.test_set) {
    const AnswerResult a = answer_question(t.model, t.data.store, join_tokens(g.question), 3, 20);
    REQUIRE(a.relevance.size() == a.candidates.size());
    for (const auto& w : a.kb_words) {
      ++kb_words;
      bool found = false;
      for (int id : a.candidates) {
        const Triple& tr = t.data.store.triple(id);
        found = found || (tr.object == w.word && tr.subject == w.subject && tr.predicate == w.predicate);
      }
      CHECK(found);
    }
    const PreparedExample ex = t.model.prepare(g.question, t.data.store);
    GenQaDecoder dec(t.model, ex);
    std::vector<int> toks = a.tokens;
    toks.push_back(Vocabulary::kEos);
    std::size_t k = 0;
    const auto traces = dec.trace(toks);
    for (std::size_t i = 0; i < a.tokens.size(); ++i) {
      if (traces[i].kb_part > traces[i].common_part) {
        CHECK(traces[i].switch_on > 0.0);
        REQUIRE(k < a.kb_words.size());
        CHECK(a.kb_words[k++].word == ex.kb.word(t.model.answer_vocab(), a.tokens[i]));
      }
    }
    CHECK(k == a.kb_words.size());
  }
  CHECK(kb_words > 0);
}

TEST_CASE("questions without a KB subject are flagged ungrounded") {
  const Trained& t = trained();
  const AnswerResult a = answer_question(t.model, t.data.store, "how tall is nobody at all ?", 3, 20);
  CHECK(a.ungrounded);
  CHECK(a.kb_words.empty());
  CHECK(a.relevance.empty());
  CHECK_THROWS_AS(answer_question(t.model, t.data.store, "  ", 3, 20), InvalidArgument);
}

TEST_CASE("answering is deterministic and serializes the documented keys") {
  const Trained& t = trained();
  const std::string q = join_tokens(t.test_set.front().question);
  const AnswerResult a = answer_question(t.model, t.data.store, q, 3, 20);
  const AnswerResult b = answer_question(t.model, t.data.store, q, 3, 20);
  CHECK(a.answer == b.answer);
  CHECK(a.score == b.score);
  const json j = a.to_json();
  CHECK(j.size() == 4);
  for (const char* key : {"answer", "kb_words", "score", "ungrounded"}) CHECK(j.contains(key));
}
