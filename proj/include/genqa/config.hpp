// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "genqa/enquirer.hpp"
#include "genqa/tensor.hpp"

namespace genqa {

/// Which model a checkpoint holds.
enum class SystemKind { GenQa, Nrm, Embedding };

std::string to_string(SystemKind kind);
SystemKind parse_system(const std::string& text);

/// Every tunable setting. Text form is `key = value` lines; `#` starts a
/// comment. Unknown keys are rejected everywhere.
struct Config {
  // optimization
  double learning_rate = 0.1;
  double l2 = 1e-6;
  std::size_t batch_size = 16;
  std::size_t epochs = 20;
  std::uint64_t seed = 1;
  Precision precision = Precision::Float64;
  double clip_norm = 5.0;
  double lr_decay = 0.5;
  std::size_t threads = 1;
  bool deterministic = true;

  // model
  EnquirerKind enquirer = EnquirerKind::Bilinear;
  SystemKind system = SystemKind::GenQa;
  std::size_t embedding_dim = 32;
  std::size_t hidden_dim = 64;
  std::size_t attention_dim = 64;
  std::size_t question_vocab_size = 2000;
  std::size_t answer_vocab_size = 2000;
  std::size_t candidate_cap = 256;
  std::size_t cnn_filter_width = 3;
  std::size_t cnn_feature_maps = 64;
  std::size_t cnn_mlp_hidden = 64;

  // decoding
  std::size_t beam_width = 5;
  std::size_t max_answer_length = 40;

  // embedding baseline
  double ranking_margin = 0.5;
  std::size_t negatives = 5;

  /// Sets one key from its text value; throws InvalidArgument on unknown
  /// keys or unparsable values.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  static const std::vector<std::string>& keys();

  /// Applies a `key = value` file body. `origin` prefixes error messages.
  void apply_text(const std::string& text, const std::string& origin = "config");
  /// Applies GENQA_<KEY> variables from the environment.
  void apply_environment(char** envp);
  std::string to_text() const;

  /// Throws InvalidArgument when a value is out of range.
  void validate() const;

  bool operator==(const Config&) const = default;
};

Config load_config_file(const std::string& path);

}  // namespace genqa
