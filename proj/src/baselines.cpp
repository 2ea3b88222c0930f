// SPDX-License-Identifier: Apache-2.0
#include "genqa/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "genqa/errors.hpp"

namespace genqa {

GenQaModel nrm_mode(GenQaModel model) {
  model.set_system(SystemKind::Nrm);
  return model;
}

namespace {

std::vector<std::string> document_tokens(const Triple& t) {
  std::vector<std::string> out = tokenize(t.subject);
  for (auto& tok : tokenize(t.predicate)) out.push_back(std::move(tok));
  return out;
}

}  // namespace

TfIdfIndex::TfIdfIndex(const TripleStore& store) : docs_(store.size()) {
  if (store.size() == 0) throw InvalidArgument("retrieval index over an empty store");
  for (const auto& t : store.triples()) {
    std::map<std::string, int> tf;
    for (const auto& tok : document_tokens(t)) ++tf[tok];
    for (const auto& [tok, n] : tf) postings_[tok].push_back({t.id, n});
  }
}

double TfIdfIndex::idf(const std::string& token) const {
  auto it = postings_.find(token);
  if (it == postings_.end()) return 0.0;
  return std::log(1.0 + static_cast<double>(docs_) / static_cast<double>(it->second.size()));
}

std::vector<std::pair<int, double>> TfIdfIndex::rank(const std::vector<std::string>& question) const {
  std::map<int, double> scores;
  for (const auto& tok : question) {
    auto it = postings_.find(tok);
    if (it == postings_.end()) continue;
    const double w = idf(tok);
    for (const auto& p : it->second) scores[p.doc] += p.tf * w;
  }
  std::vector<std::pair<int, double>> out(scores.begin(), scores.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

std::optional<int> TfIdfIndex::best(const std::vector<std::string>& question) const {
  auto r = rank(question);
  if (r.empty()) return std::nullopt;
  return r.front().first;
}

std::optional<int> retrieval_answer(const TfIdfIndex& index, const std::vector<std::string>& question) {
  return index.best(question);
}

// ---------------------------------------------------------------------------

EmbeddingQa EmbeddingQa::create(const Config& config, const std::vector<GroundedInstance>& train,
                                const TripleStore& store) {
  config.validate();
  if (train.empty()) throw InvalidArgument("no training instances");
  std::vector<std::vector<std::string>> questions;
  for (const auto& g : train) questions.push_back(g.question);
  Vocabulary qv = Vocabulary::build(questions, config.question_vocab_size);
  std::vector<std::vector<std::string>> docs;
  for (const auto& t : store.triples()) docs.push_back(document_tokens(t));
  Vocabulary kv = Vocabulary::build(docs, std::numeric_limits<std::size_t>::max());

  Config c = config;
  c.system = SystemKind::Embedding;
  ParameterSet params(c.precision);
  std::mt19937_64 rng(c.seed);
  params.add("emb.question", glorot_uniform(Shape{qv.size(), c.embedding_dim}, rng));
  params.add("emb.kb", glorot_uniform(Shape{kv.size(), c.embedding_dim}, rng));
  return assemble(c, std::move(qv), std::move(kv), std::move(params));
}

EmbeddingQa EmbeddingQa::assemble(const Config& config, Vocabulary question_vocab,
                                  Vocabulary kb_vocab, ParameterSet params) {
  EmbeddingQa m;
  m.config_ = config;
  m.question_vocab_ = std::move(question_vocab);
  m.kb_vocab_ = std::move(kb_vocab);
  m.params_ = std::move(params);
  m.question_slot_ = m.params_.require("emb.question");
  m.kb_slot_ = m.params_.require("emb.kb");
  if (m.params_.value(m.question_slot_).rows() != m.question_vocab_.size() ||
      m.params_.value(m.kb_slot_).rows() != m.kb_vocab_.size()) {
    throw FormatError("embedding tables do not match their vocabularies");
  }
  return m;
}

std::vector<int> EmbeddingQa::question_rows(const std::vector<std::string>& question) const {
  return question_vocab_.encode(question).ids;
}

std::vector<int> EmbeddingQa::triple_rows(const Triple& t) const {
  return kb_vocab_.encode(document_tokens(t)).ids;
}

Var EmbeddingQa::score(Tape& tape, const std::vector<int>& qrows, const std::vector<int>& trows) const {
  Var q = tape.gather_mean_rows(question_slot_, {qrows});
  Var u = tape.gather_mean_rows(kb_slot_, {trows});
  return dot(reshape(q, Shape{q.size()}), reshape(u, Shape{u.size()}));
}

double EmbeddingQa::score(const std::vector<std::string>& question, const Triple& t) const {
  Tape tape(&params_, nullptr, false);
  return score(tape, question_rows(question), triple_rows(t)).value().item();
}

Var EmbeddingQa::hinge_loss(Tape& tape, const std::vector<std::string>& question,
                            const Triple& gold, const std::vector<const Triple*>& negatives) const {
  const std::vector<int> q = question_rows(question);
  Var pos = score(tape, q, triple_rows(gold));
  std::vector<Var> terms;
  for (const Triple* n : negatives) {
    Var gap = add(sub(score(tape, q, triple_rows(*n)), pos),
                  tape.constant(Tensor::scalar(config_.ranking_margin)));
    terms.push_back(relu(gap));
  }
  if (terms.empty()) return tape.constant(Tensor::scalar(0.0));
  return sum(concat(terms));
}

std::optional<int> EmbeddingQa::answer(const std::vector<std::string>& question,
                                       const TripleStore& store) const {
  const CandidateSet c = store.retrieve_candidates(question, config_.candidate_cap);
  if (c.empty()) return std::nullopt;
  Tape tape(&params_, nullptr, false);
  const std::vector<int> q = question_rows(question);
  int best = -1;
  double best_score = 0.0;
  for (int id : c.triple_ids) {
    const double s = score(tape, q, triple_rows(store.triple(id))).value().item();
    if (best < 0 || s > best_score) {
      best = id;
      best_score = s;
    }
  }
  return best;
}

std::vector<int> sample_negatives(const TripleStore& store, const CandidateSet& candidates,
                                  int gold, std::size_t count, std::mt19937_64& rng) {
  std::vector<int> pool;
  for (int id : candidates.triple_ids) {
    if (id != gold) pool.push_back(id);
  }
  std::vector<int> out;
  if (pool.empty()) {
    if (store.size() < 2) return out;
    std::uniform_int_distribution<int> any(0, static_cast<int>(store.size()) - 2);
    for (std::size_t i = 0; i < count; ++i) {
      int id = any(rng);
      out.push_back(id >= gold ? id + 1 : id);
    }
    return out;
  }
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  for (std::size_t i = 0; i < count; ++i) out.push_back(pool[pick(rng)]);
  return out;
}

std::vector<EpochLog> train_embedding_qa(EmbeddingQa& model,
                                         const std::vector<GroundedInstance>& train,
                                         const TripleStore& store, const Config& config,
                                         const EpochCallback& on_epoch) {
  config.validate();
  if (train.empty()) throw InvalidArgument("train_embedding_qa: empty dataset");
  std::vector<CandidateSet> candidates;
  for (const auto& g : train) candidates.push_back(store.retrieve_candidates(g.question, config.candidate_cap));

  ParameterSet& params = model.params();
  std::mt19937_64 rng(config.seed ^ 0x5bd1e995ULL);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  Gradients grads(params);
  double lr = config.learning_rate;
  double best = std::numeric_limits<double>::infinity();
  std::vector<EpochLog> log;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      grads.zero();
      double batch = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const GroundedInstance& g = train[order[i]];
        std::vector<const Triple*> negs;
        for (int id : sample_negatives(store, candidates[order[i]], g.gold_triple, config.negatives, rng)) {
          negs.push_back(&store.triple(id));
        }
        Tape tape(&params, &grads);
        Var loss = model.hinge_loss(tape, g.question, store.triple(g.gold_triple), negs);
        batch += loss.value().item();
        tape.backward(loss);
      }
      const double n = static_cast<double>(end - start);
      grads.scale(1.0 / n);
      for (std::size_t s = 0; s < params.size(); ++s) {
        const Tensor& v = params.value(static_cast<int>(s));
        Tensor& g = grads.slot(static_cast<int>(s));
        for (std::size_t i = 0; i < v.size(); ++i) g[i] += 2.0 * config.l2 * v[i];
      }
      const double norm = grads.global_norm();
      if (norm > config.clip_norm) grads.scale(config.clip_norm / norm);
      for (std::size_t s = 0; s < params.size(); ++s) {
        Tensor& v = params.value(static_cast<int>(s));
        const Tensor& g = grads.slot(static_cast<int>(s));
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= lr * g[i];
        v.round_to(params.precision());
      }
      loss_sum += batch / n + config.l2 * params.squared_norm();
      ++batches;
    }
    EpochLog e{epoch, loss_sum / static_cast<double>(batches), 0.0, lr};
    log.push_back(e);
    if (on_epoch) on_epoch(e);
    if (!(e.loss < best * (1.0 - 1e-3))) lr *= config.lr_decay;
    best = std::min(best, e.loss);
  }
  return log;
}

Checkpoint make_checkpoint(const EmbeddingQa& model, const TripleStore& store) {
  Checkpoint ck{model.config(), json::object(), model.params()};
  json qv = json::array(), kv = json::array();
  for (std::size_t i = Vocabulary::kReserved; i < model.question_vocab().size(); ++i) {
    qv.push_back(model.question_vocab().token(static_cast<int>(i)));
  }
  for (std::size_t i = Vocabulary::kReserved; i < model.kb_vocab().size(); ++i) {
    kv.push_back(model.kb_vocab().token(static_cast<int>(i)));
  }
  ck.meta["question_vocab"] = qv;
  ck.meta["kb_vocab"] = kv;
  ck.meta["kb"] = store_to_json(store);
  return ck;
}

EmbeddingQa embedding_from_checkpoint(const Checkpoint& ck) {
  if (ck.config.system != SystemKind::Embedding) {
    throw FormatError("checkpoint does not hold an embedding baseline");
  }
  try {
    Vocabulary qv, kv;
    for (const auto& t : ck.meta.at("question_vocab")) qv.add(t.get<std::string>());
    for (const auto& t : ck.meta.at("kb_vocab")) kv.add(t.get<std::string>());
    return EmbeddingQa::assemble(ck.config, std::move(qv), std::move(kv), ck.params);
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint metadata: ") + e.what());
  }
}

}  // namespace genqa
