// SPDX-License-Identifier: Apache-2.0
#include "genqa/model.hpp"

#include <random>

#include "genqa/errors.hpp"

namespace genqa {

std::vector<std::string> collapse_object(const GroundedInstance& instance) {
  if (instance.span_begin >= instance.span_end || instance.span_end > instance.answer.size()) {
    throw InvalidArgument("grounded instance has an invalid object span");
  }
  std::vector<std::string> out(instance.answer.begin(),
                               instance.answer.begin() + static_cast<long>(instance.span_begin));
  out.push_back(join_tokens(instance.answer, instance.span_begin, instance.span_end));
  out.insert(out.end(), instance.answer.begin() + static_cast<long>(instance.span_end),
             instance.answer.end());
  return out;
}

GenQaModel GenQaModel::create(const Config& config, const std::vector<GroundedInstance>& train,
                              const TripleStore& store) {
  config.validate();
  if (config.system == SystemKind::Embedding) {
    throw InvalidArgument("GenQaModel cannot be built for the embedding system");
  }
  if (train.empty()) throw InvalidArgument("no training instances");
  std::vector<std::vector<std::string>> questions, answers;
  for (const auto& g : train) {
    questions.push_back(g.question);
    answers.push_back(collapse_object(g));
  }
  Vocabulary qv = Vocabulary::build(questions, config.question_vocab_size);
  Vocabulary av = Vocabulary::build(answers, config.answer_vocab_size);

  std::vector<std::string> kb_tokens;
  std::unordered_map<std::string, int> seen;
  for (const auto& t : store.triples()) {
    for (const auto* field : {&t.subject, &t.predicate}) {
      for (const auto& tok : tokenize(*field)) {
        if (!qv.contains(tok) && seen.emplace(tok, 0).second) kb_tokens.push_back(tok);
      }
    }
  }

  ParameterSet params(config.precision);
  std::mt19937_64 rng(config.seed);
  const std::size_t E = config.embedding_dim;
  const std::size_t H = config.hidden_dim;
  params.add("embed.shared", glorot_uniform(Shape{qv.size() + kb_tokens.size(), E}, rng));
  register_gru(params, "enc.fwd", E, H, rng);
  register_gru(params, "enc.bwd", E, H, rng);
  if (config.enquirer == EnquirerKind::Bilinear) {
    register_bilinear(params, E, rng);
  } else {
    register_cnn(params, E, config.cnn_filter_width, config.cnn_feature_maps,
                 config.cnn_mlp_hidden, rng);
  }
  register_decoder(params, av.size(), E, H, H, config.attention_dim, rng);
  return assemble(config, std::move(qv), std::move(kb_tokens), std::move(av), std::move(params));
}

GenQaModel GenQaModel::assemble(const Config& config, Vocabulary question_vocab,
                                std::vector<std::string> kb_tokens, Vocabulary answer_vocab,
                                ParameterSet params) {
  GenQaModel m;
  m.config_ = config;
  m.question_vocab_ = std::move(question_vocab);
  m.kb_tokens_ = std::move(kb_tokens);
  for (std::size_t j = 0; j < m.kb_tokens_.size(); ++j) {
    m.kb_rows_[m.kb_tokens_[j]] = static_cast<int>(m.question_vocab_.size() + j);
  }
  m.answer_vocab_ = std::move(answer_vocab);
  m.params_ = std::move(params);
  m.bind_slots();
  return m;
}

void GenQaModel::bind_slots() {
  encoder_.embedding = params_.require("embed.shared");
  encoder_.forward = find_gru(params_, "enc.fwd");
  encoder_.backward = find_gru(params_, "enc.bwd");
  if (config_.enquirer == EnquirerKind::Bilinear) {
    bilinear_ = find_bilinear(params_);
  } else {
    cnn_ = find_cnn(params_);
  }
  decoder_ = find_decoder(params_);
  const Tensor& table = params_.value(encoder_.embedding);
  if (table.rows() != question_vocab_.size() + kb_tokens_.size()) {
    throw FormatError("shared embedding table does not match the vocabularies");
  }
  if (params_.value(decoder_.embedding).rows() != answer_vocab_.size()) {
    throw FormatError("answer embedding table does not match the answer vocabulary");
  }
}

void GenQaModel::set_system(SystemKind system) {
  if (system == SystemKind::Embedding) throw InvalidArgument("GenQaModel cannot act as the embedding system");
  config_.system = system;
}

int GenQaModel::shared_row(const std::string& token) const {
  if (question_vocab_.contains(token)) return question_vocab_.id(token);
  auto it = kb_rows_.find(token);
  return it == kb_rows_.end() ? Vocabulary::kUnk : it->second;
}

PreparedExample GenQaModel::prepare(const std::vector<std::string>& question,
                                    const TripleStore& store,
                                    const GroundedInstance* instance) const {
  if (question.empty()) throw InvalidArgument("empty question");
  PreparedExample ex;
  for (const auto& tok : question) ex.question.push_back(shared_row(tok));
  if (kb_branch() && store.size() > 0) {
    ex.candidates = store.retrieve_candidates(question, config_.candidate_cap);
  }
  std::vector<std::string> objects;
  for (std::size_t k = 0; k < ex.candidates.size(); ++k) {
    const Triple& t = store.triple(ex.candidates.triple_ids[k]);
    std::vector<int> rows;
    for (const auto& tok : tokenize(t.subject)) rows.push_back(shared_row(tok));
    for (const auto& tok : tokenize(t.predicate)) rows.push_back(shared_row(tok));
    ex.triple_rows.push_back(std::move(rows));
    objects.push_back(t.object);
    if (instance && t.id == instance->gold_triple) ex.gold_candidate = static_cast<int>(k);
  }
  ex.kb = build_kb_vocabulary(answer_vocab_, objects);
  if (instance) ex.targets = answer_targets(*instance, ex.kb);
  return ex;
}

std::vector<int> GenQaModel::answer_targets(const GroundedInstance& instance,
                                            const KbVocabulary& kb) const {
  std::vector<int> out;
  for (const auto& word : collapse_object(instance)) {
    const int id = kb.union_id(answer_vocab_, word);
    out.push_back(id < 0 ? Vocabulary::kUnk : id);
  }
  out.push_back(Vocabulary::kEos);
  return out;
}

Var GenQaModel::candidate_scores(Tape& tape, const EncodedQuestion& q,
                                 const PreparedExample& ex) const {
  Var triples = triple_embeddings(tape, encoder_.embedding, ex.triple_rows);
  if (config_.enquirer == EnquirerKind::Bilinear) return score_bilinear(tape, bilinear_, q, triples);
  const int pad[] = {Vocabulary::kPad};
  Var pad_row = reshape(tape.gather_rows(encoder_.embedding, pad), Shape{config_.embedding_dim});
  return score_cnn(tape, cnn_, cnn_question_summary(tape, cnn_, q, pad_row), triples);
}

ForwardState GenQaModel::forward(Tape& tape, const PreparedExample& ex) const {
  ForwardState f;
  f.encoded = encode(tape, encoder_, ex.question);
  if (kb_branch() && ex.kb_enabled()) {
    f.relevance = relevance_distribution(candidate_scores(tape, f.encoded, ex));
  }
  return f;
}

Var GenQaModel::log_likelihood(Tape& tape, const PreparedExample& ex) const {
  ForwardState f = forward(tape, ex);
  return sequence_log_likelihood(tape, decoder_, f.encoded, f.relevance, ex.kb, ex.targets);
}

}  // namespace genqa
