// SPDX-License-Identifier: Apache-2.0
#include "genqa/inference.hpp"

#include <algorithm>
#include <cmath>

#include "genqa/errors.hpp"

namespace genqa {

bool better_final(const BeamHypothesis& a, const BeamHypothesis& b) {
  const double sa = a.normalized(), sb = b.normalized();
  if (sa != sb) return sa > sb;
  return a.tokens < b.tokens;
}

std::vector<BeamHypothesis> beam_search(StepModel& model, std::size_t beam_width,
                                        std::size_t max_len) {
  if (beam_width < 1) throw InvalidArgument("beam width must be >= 1");
  if (max_len < 1) throw InvalidArgument("max length must be >= 1");
  std::vector<BeamHypothesis> live(1), finished;
  live[0].state = model.initial_state();

  struct Expansion {
    std::size_t parent;
    int token;
    double log_prob;
  };
  for (std::size_t t = 1; t <= max_len && !live.empty(); ++t) {
    std::vector<Expansion> expansions;
    std::vector<Tensor> next_states(live.size());
    for (std::size_t h = 0; h < live.size(); ++h) {
      const int prev = live[h].tokens.empty() ? -1 : live[h].tokens.back();
      const std::vector<double> p = model.next(live[h].state, prev, next_states[h]);
      for (std::size_t w = 0; w < p.size(); ++w) {
        if (p[w] > 0.0) expansions.push_back({h, static_cast<int>(w), live[h].log_prob + std::log(p[w])});
      }
    }
    auto prefix_less = [&](const Expansion& a, const Expansion& b) {
      const auto& ta = live[a.parent].tokens;
      const auto& tb = live[b.parent].tokens;
      if (ta != tb) return ta < tb;
      return a.token < b.token;
    };
    std::sort(expansions.begin(), expansions.end(), [&](const Expansion& a, const Expansion& b) {
      if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
      return prefix_less(a, b);
    });
    std::vector<BeamHypothesis> next_live;
    // EOS expansions never take a beam slot, so all of them are retired
    std::size_t open = 0;
    for (const auto& e : expansions) {
      if (open == beam_width && e.token != model.eos()) continue;
      BeamHypothesis h;
      h.tokens = live[e.parent].tokens;
      h.tokens.push_back(e.token);
      h.log_prob = e.log_prob;
      h.state = next_states[e.parent];
      if (e.token == model.eos()) {
        h.finished = true;
        finished.push_back(std::move(h));
      } else if (t == max_len) {
        ++open;
        finished.push_back(std::move(h));
      } else {
        ++open;
        next_live.push_back(std::move(h));
      }
    }
    live = std::move(next_live);
  }
  std::sort(finished.begin(), finished.end(), better_final);
  return finished;
}

// ---------------------------------------------------------------------------

GenQaDecoder::GenQaDecoder(const GenQaModel& model, const PreparedExample& ex)
    : model_(model), ex_(ex), tape_(&model.params(), nullptr, false) {
  fwd_ = model.forward(tape_, ex);
  memory_ = prepare_memory(tape_, model.decoder(), fwd_.encoded);
  s0_ = genqa::initial_state(tape_, model.decoder(), fwd_.encoded);
}

Tensor GenQaDecoder::initial_state() { return s0_.value(); }

std::vector<double> GenQaDecoder::next(const Tensor& state, int prev, Tensor& next_state) {
  const int input = prev < 0 ? Vocabulary::kBos : decoder_input_id(ex_.kb, prev);
  StepOutput step = decoder_step(tape_, model_.decoder(), memory_, tape_.constant(state), input);
  next_state = step.state.value();
  const Tensor* r = fwd_.relevance ? &fwd_.relevance->value() : nullptr;
  return combine_distribution(step.common.value(), r ? step.switch_on.value().item() : 0.0, r,
                              ex_.kb);
}

std::vector<GenQaDecoder::StepTrace> GenQaDecoder::trace(const std::vector<int>& tokens) {
  std::vector<StepTrace> out;
  Tensor s = initial_state();
  int prev = -1;
  for (int w : tokens) {
    const int input = prev < 0 ? Vocabulary::kBos : decoder_input_id(ex_.kb, prev);
    StepOutput step = decoder_step(tape_, model_.decoder(), memory_, tape_.constant(s), input);
    StepTrace tr;
    if (fwd_.relevance) {
      tr.switch_on = step.switch_on.value().item();
      const Tensor& r = fwd_.relevance->value();
      double mass = 0.0;
      for (int k : ex_.kb.candidates_of(w)) mass += r[static_cast<std::size_t>(k)];
      tr.kb_part = tr.switch_on * mass;
    }
    if (!ex_.kb.kb_only(w)) tr.common_part = (1.0 - tr.switch_on) * step.common.value()[static_cast<std::size_t>(w)];
    out.push_back(tr);
    s = step.state.value();
    prev = w;
  }
  return out;
}

std::vector<double> GenQaDecoder::relevance() const {
  if (!fwd_.relevance) return {};
  const auto d = fwd_.relevance->value().data();
  return {d.begin(), d.end()};
}

json AnswerResult::to_json() const {
  json words = json::array();
  for (const auto& k : kb_words) {
    words.push_back({{"word", k.word}, {"subject", k.subject}, {"predicate", k.predicate}});
  }
  return {{"answer", answer}, {"kb_words", words}, {"score", score}, {"ungrounded", ungrounded}};
}

AnswerResult answer_question(const GenQaModel& model, const TripleStore& store,
                             const std::string& question, std::size_t beam_width,
                             std::size_t max_len) {
  const std::vector<std::string> tokens = tokenize(question);
  if (tokens.empty()) throw InvalidArgument("empty question");
  const PreparedExample ex = model.prepare(tokens, store);
  GenQaDecoder decoder(model, ex);
  const auto ranked = beam_search(decoder, beam_width, max_len);
  const BeamHypothesis& best = ranked.front();

  AnswerResult result;
  result.score = best.normalized();
  result.ungrounded = !(model.kb_branch() && ex.kb_enabled());
  result.relevance = decoder.relevance();
  result.candidates = ex.candidates.triple_ids;
  const auto traces = decoder.trace(best.tokens);
  std::vector<std::string> words;
  for (std::size_t i = 0; i < best.tokens.size(); ++i) {
    const int w = best.tokens[i];
    if (w == Vocabulary::kEos) break;
    result.tokens.push_back(w);
    words.push_back(ex.kb.word(model.answer_vocab(), w));
    if (traces[i].kb_part > traces[i].common_part) {
      // attribute to the most relevant candidate carrying this object
      int pick_k = -1;
      for (int k : ex.kb.candidates_of(w)) {
        if (pick_k < 0 || result.relevance[static_cast<std::size_t>(k)] >
                              result.relevance[static_cast<std::size_t>(pick_k)]) {
          pick_k = k;
        }
      }
      const Triple& t = store.triple(ex.candidates.triple_ids[static_cast<std::size_t>(pick_k)]);
      result.kb_words.push_back({words.back(), t.subject, t.predicate});
    }
  }
  result.answer = join_tokens(words);
  return result;
}

}  // namespace genqa
