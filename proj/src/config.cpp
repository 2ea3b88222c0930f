// SPDX-License-Identifier: Apache-2.0
#include "genqa/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "genqa/errors.hpp"

namespace genqa {

std::string to_string(SystemKind kind) {
  switch (kind) {
    case SystemKind::GenQa: return "genqa";
    case SystemKind::Nrm: return "nrm";
    case SystemKind::Embedding: return "embedding";
  }
  return "genqa";
}

SystemKind parse_system(const std::string& text) {
  if (text == "genqa") return SystemKind::GenQa;
  if (text == "nrm") return SystemKind::Nrm;
  if (text == "embedding") return SystemKind::Embedding;
  throw InvalidArgument("unknown system '" + text + "'");
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw InvalidArgument("config key '" + key + "': expected a number, got '" + v + "'");
}

std::uint64_t to_unsigned(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw InvalidArgument("config key '" + key + "': expected a non-negative integer, got '" + v +
                          "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InvalidArgument("config key '" + key + "': expected true/false, got '" + v + "'");
}

std::string format_double(double d) {
  std::ostringstream os;
  os.precision(17);
  os << d;
  return os.str();
}

struct Field {
  std::function<void(Config&, const std::string&, const std::string&)> set;
  std::function<std::string(const Config&)> get;
};

template <typename T>
Field size_field(T Config::*member) {
  return {[member](Config& c, const std::string& k, const std::string& v) {
            c.*member = static_cast<T>(to_unsigned(k, v));
          },
          [member](const Config& c) { return std::to_string(c.*member); }};
}

Field double_field(double Config::*member) {
  return {[member](Config& c, const std::string& k, const std::string& v) {
            c.*member = to_double(k, v);
          },
          [member](const Config& c) { return format_double(c.*member); }};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> t;
    t["learning_rate"] = double_field(&Config::learning_rate);
    t["l2"] = double_field(&Config::l2);
    t["batch_size"] = size_field(&Config::batch_size);
    t["epochs"] = size_field(&Config::epochs);
    t["seed"] = size_field(&Config::seed);
    t["precision"] = {[](Config& c, const std::string&, const std::string& v) {
                        c.precision = parse_precision(v);
                      },
                      [](const Config& c) { return to_string(c.precision); }};
    t["clip_norm"] = double_field(&Config::clip_norm);
    t["lr_decay"] = double_field(&Config::lr_decay);
    t["threads"] = size_field(&Config::threads);
    t["deterministic"] = {[](Config& c, const std::string& k, const std::string& v) {
                            c.deterministic = to_bool(k, v);
                          },
                          [](const Config& c) {
                            return std::string(c.deterministic ? "true" : "false");
                          }};
    t["enquirer"] = {[](Config& c, const std::string&, const std::string& v) {
                       c.enquirer = parse_enquirer(v);
                     },
                     [](const Config& c) { return to_string(c.enquirer); }};
    t["system"] = {[](Config& c, const std::string&, const std::string& v) {
                     c.system = parse_system(v);
                   },
                   [](const Config& c) { return to_string(c.system); }};
    t["embedding_dim"] = size_field(&Config::embedding_dim);
    t["hidden_dim"] = size_field(&Config::hidden_dim);
    t["attention_dim"] = size_field(&Config::attention_dim);
    t["question_vocab_size"] = size_field(&Config::question_vocab_size);
    t["answer_vocab_size"] = size_field(&Config::answer_vocab_size);
    t["candidate_cap"] = size_field(&Config::candidate_cap);
    t["cnn_filter_width"] = size_field(&Config::cnn_filter_width);
    t["cnn_feature_maps"] = size_field(&Config::cnn_feature_maps);
    t["cnn_mlp_hidden"] = size_field(&Config::cnn_mlp_hidden);
    t["beam_width"] = size_field(&Config::beam_width);
    t["max_answer_length"] = size_field(&Config::max_answer_length);
    t["ranking_margin"] = double_field(&Config::ranking_margin);
    t["negatives"] = size_field(&Config::negatives);
    return t;
  }();
  return table;
}

}  // namespace

void Config::set(const std::string& key, const std::string& value) {
  auto it = fields().find(key);
  if (it == fields().end()) throw InvalidArgument("unknown config key '" + key + "'");
  it->second.set(*this, key, trim(value));
}

std::string Config::get(const std::string& key) const {
  auto it = fields().find(key);
  if (it == fields().end()) throw InvalidArgument("unknown config key '" + key + "'");
  return it->second.get(*this);
}

const std::vector<std::string>& Config::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [k, _] : fields()) out.push_back(k);
    return out;
  }();
  return names;
}

void Config::apply_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    try {
      set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void Config::apply_environment(char** envp) {
  static const std::string prefix = "GENQA_";
  for (char** e = envp; e && *e; ++e) {
    std::string entry(*e);
    if (entry.rfind(prefix, 0) != 0) continue;
    const auto eq = entry.find('=');
    std::string key = entry.substr(prefix.size(), eq - prefix.size());
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    try {
      set(key, entry.substr(eq + 1));
    } catch (const InvalidArgument& err) {
      throw InvalidArgument("environment " + entry.substr(0, eq) + ": " + err.what());
    }
  }
}

std::string Config::to_text() const {
  std::string out;
  for (const auto& [k, f] : fields()) out += k + " = " + f.get(*this) + "\n";
  return out;
}

void Config::validate() const {
  auto fail = [](const std::string& m) { throw InvalidArgument("invalid config: " + m); };
  if (!(learning_rate >= 0.0)) fail("learning_rate must be >= 0");
  if (!(l2 >= 0.0)) fail("l2 must be >= 0");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (!(clip_norm > 0.0)) fail("clip_norm must be > 0");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) fail("lr_decay must be in (0, 1]");
  if (threads < 1) fail("threads must be >= 1");
  if (embedding_dim < 1 || hidden_dim < 1 || attention_dim < 1) fail("dimensions must be >= 1");
  if (cnn_filter_width < 1 || cnn_feature_maps < 1 || cnn_mlp_hidden < 1) {
    fail("cnn sizes must be >= 1");
  }
  if (candidate_cap < 1) fail("candidate_cap must be >= 1");
  if (beam_width < 1) fail("beam_width must be >= 1");
  if (max_answer_length < 1) fail("max_answer_length must be >= 1");
  if (!(ranking_margin > 0.0)) fail("ranking_margin must be > 0");
}

Config load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  Config c;
  c.apply_text(buf.str(), path);
  return c;
}

}  // namespace genqa
