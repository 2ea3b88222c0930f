// SPDX-License-Identifier: Apache-2.0
// Small grounded corpora for model-level tests.
#pragma once

#include <stdexcept>
#include <vector>

#include "genqa/config.hpp"
#include "genqa/kb_store.hpp"
#include "genqa/synthetic.hpp"
#include "genqa/vocab.hpp"

namespace genqa::testing {

struct ToyData {
  TripleStore store;
  std::vector<GroundedInstance> instances;
};

/// Hand-written KB where one object ("chicago bulls") spans two tokens and
/// one ("2.29m") appears only in the KB after the first instance is removed.
inline ToyData toy_data() {
  ToyData d;
  d.store = TripleStore::build({{"yao ming", "height", "2.29m"},
                                {"yao ming", "team", "houston rockets"},
                                {"michael jordan", "height", "1.98m"},
                                {"michael jordan", "team", "chicago bulls"},
                                {"lionel messi", "place of birth", "argentina"}});
  const std::vector<std::pair<std::string, std::string>> qa{
      {"how tall is yao ming ?", "he is 2.29m tall ."},
      {"which team does michael jordan play for ?", "he plays for chicago bulls ."},
      {"how tall is michael jordan ?", "he is 1.98m tall ."},
      {"where was lionel messi born ?", "he was born in argentina ."},
      {"what team is yao ming on ?", "he plays for houston rockets ."}};
  for (const auto& [q, a] : qa) {
    auto g = ground_qa_pair(d.store, tokenize(q), tokenize(a));
    if (!g) throw std::logic_error("toy pair failed to ground: " + q);
    d.instances.push_back(*g);
  }
  return d;
}

/// Grounded instances from a small synthetic corpus.
inline ToyData synthetic_data(std::size_t entities, std::uint64_t seed, double noise = 0.0) {
  SyntheticSpec spec;
  spec.entities = entities;
  spec.noise = noise;
  spec.seed = seed;
  const SyntheticCorpus c = generate_synthetic(spec);
  ToyData d;
  d.store = TripleStore::build(c.triples);
  for (const auto& qa : c.qa) {
    auto g = ground_qa_pair(d.store, tokenize(qa.question), tokenize(qa.answer));
    if (g) d.instances.push_back(*g);
  }
  return d;
}

/// Dimensions small enough for finite-difference sweeps.
inline Config tiny_config() {
  Config c;
  c.embedding_dim = 4;
  c.hidden_dim = 3;
  c.attention_dim = 3;
  c.cnn_feature_maps = 3;
  c.cnn_mlp_hidden = 3;
  c.cnn_filter_width = 2;
  return c;
}

}  // namespace genqa::testing
