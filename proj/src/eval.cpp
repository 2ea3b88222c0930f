// SPDX-License-Identifier: Apache-2.0
#include "genqa/eval.hpp"

#include <cstdio>
#include <thread>

namespace genqa {

bool contains_object(const std::vector<std::string>& answer_tokens, const std::string& object) {
  const std::vector<std::string> needle = tokenize(object);
  if (needle.empty()) return false;
  return find_token_span(answer_tokens, needle).has_value();
}

FluencyCheck::FluencyCheck(const std::vector<std::string>& templates) {
  for (const auto& t : templates) {
    const auto at = t.find("{o}");
    if (at == std::string::npos) continue;
    patterns_.push_back({tokenize(t.substr(0, at)), tokenize(t.substr(at + 3))});
  }
}

bool FluencyCheck::fluent(const std::vector<std::string>& a) const {
  for (const auto& p : patterns_) {
    if (a.size() < p.before.size() + p.after.size() + 1) continue;
    if (!std::equal(p.before.begin(), p.before.end(), a.begin())) continue;
    if (!std::equal(p.after.rbegin(), p.after.rend(), a.rbegin())) continue;
    return true;
  }
  return false;
}

json EvalReport::to_json() const {
  json recs = json::array();
  for (const auto& r : records) {
    json j{{"question", r.question},
           {"answer", r.answer},
           {"gold_object", r.gold_object},
           {"correct", r.correct},
           {"ungrounded", r.ungrounded}};
    if (r.fluent) j["fluent"] = *r.fluent;
    recs.push_back(j);
  }
  json out{{"system", system},
           {"total", total},
           {"correct", correct},
           {"accuracy", accuracy()},
           {"ungrounded", ungrounded},
           {"records", recs}};
  out["fluency"] = fluency ? json(*fluency) : json(nullptr);
  out["improper_surrounding_rate"] = improper_surrounding ? json(*improper_surrounding) : json(nullptr);
  return out;
}

namespace {

void finish(EvalReport& r) {
  r.total = r.records.size();
  r.correct = r.ungrounded = 0;
  std::size_t fluent = 0, judged = 0, improper = 0;
  for (const auto& rec : r.records) {
    r.correct += rec.correct;
    r.ungrounded += rec.ungrounded;
    if (rec.fluent) {
      ++judged;
      fluent += *rec.fluent;
      if (rec.correct && !*rec.fluent) ++improper;
    }
  }
  if (judged > 0) {
    r.fluency = static_cast<double>(fluent) / static_cast<double>(judged);
    r.improper_surrounding =
        r.correct == 0 ? 0.0 : static_cast<double>(improper) / static_cast<double>(r.correct);
  }
}

std::string gold_object(const TripleStore& store, const GroundedInstance& g) {
  if (g.gold_triple >= 0) return store.triple(g.gold_triple).object;
  return join_tokens(g.answer, g.span_begin, g.span_end);
}

}  // namespace

EvalReport evaluate_generative(const std::string& system, const GenQaModel& model,
                               const TripleStore& store,
                               const std::vector<GroundedInstance>& test,
                               const FluencyCheck& fluency, std::size_t threads) {
  EvalReport report;
  report.system = system;
  report.records.resize(test.size());
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const GroundedInstance& g = test[i];
      const AnswerResult a = answer_question(model, store, join_tokens(g.question),
                                             model.config().beam_width,
                                             model.config().max_answer_length);
      EvalRecord& rec = report.records[i];
      rec.question = join_tokens(g.question);
      rec.answer = a.answer;
      rec.gold_object = gold_object(store, g);
      const auto tokens = tokenize(a.answer);
      rec.correct = contains_object(tokens, rec.gold_object);
      rec.ungrounded = a.ungrounded;
      if (!fluency.empty()) rec.fluent = fluency.fluent(tokens);
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, test.size()));
  if (threads == 1) {
    run(0, test.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t per = (test.size() + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back(run, std::min(test.size(), t * per), std::min(test.size(), (t + 1) * per));
    }
    for (auto& th : pool) th.join();
  }
  finish(report);
  return report;
}

EvalReport evaluate_retrieval(const TripleStore& store, const std::vector<GroundedInstance>& test) {
  EvalReport report;
  report.system = "retrieval";
  const TfIdfIndex index(store);
  for (const auto& g : test) {
    EvalRecord rec;
    rec.question = join_tokens(g.question);
    rec.gold_object = gold_object(store, g);
    const auto best = retrieval_answer(index, g.question);
    rec.ungrounded = !best;
    if (best) rec.answer = store.triple(*best).object;
    rec.correct = best && rec.answer == rec.gold_object;
    report.records.push_back(std::move(rec));
  }
  finish(report);
  return report;
}

EvalReport evaluate_embedding(const EmbeddingQa& model, const TripleStore& store,
                              const std::vector<GroundedInstance>& test) {
  EvalReport report;
  report.system = "embedding";
  for (const auto& g : test) {
    EvalRecord rec;
    rec.question = join_tokens(g.question);
    rec.gold_object = gold_object(store, g);
    const auto best = model.answer(g.question, store);
    rec.ungrounded = !best;
    if (best) rec.answer = store.triple(*best).object;
    rec.correct = best && rec.answer == rec.gold_object;
    report.records.push_back(std::move(rec));
  }
  finish(report);
  return report;
}

std::string report_table(const std::vector<EvalReport>& reports) {
  std::string out = "Models            Test\n";
  char line[128];
  for (const auto& r : reports) {
    std::snprintf(line, sizeof(line), "%-16s %5.1f%%\n", r.system.c_str(), 100.0 * r.accuracy());
    out += line;
  }
  return out;
}

}  // namespace genqa
