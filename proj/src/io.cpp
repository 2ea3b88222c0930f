// SPDX-License-Identifier: Apache-2.0
#include "genqa/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "genqa/errors.hpp"
#include "genqa/vocab.hpp"

namespace genqa {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void atomic_write(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw InvalidArgument("write failed for " + tmp.string());
    }
  }
  fs::rename(tmp, target);
}

void read_jsonl(const std::string& path, const std::function<void(const json&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": malformed JSON: " + e.what());
    }
    if (!j.is_object()) throw FormatError(path + ":" + std::to_string(lineno) + ": expected an object");
    try {
      fn(j, lineno);
    } catch (const json::exception& e) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

std::string to_jsonl(const std::vector<json>& rows) {
  std::string out;
  for (const auto& r : rows) out += r.dump() + "\n";
  return out;
}

std::vector<Triple> read_triples(const std::string& path) {
  std::vector<Triple> out;
  read_jsonl(path, [&](const json& j, std::size_t) {
    out.push_back({j.at("subject").get<std::string>(), j.at("predicate").get<std::string>(),
                   j.at("object").get<std::string>()});
  });
  return out;
}

std::string triples_jsonl(const std::vector<Triple>& triples) {
  std::vector<json> rows;
  for (const auto& t : triples) {
    rows.push_back({{"subject", t.subject}, {"predicate", t.predicate}, {"object", t.object}});
  }
  return to_jsonl(rows);
}

std::vector<QaPair> read_qa(const std::string& path) {
  std::vector<QaPair> out;
  read_jsonl(path, [&](const json& j, std::size_t) {
    out.push_back({j.at("question").get<std::string>(), j.at("answer").get<std::string>()});
  });
  return out;
}

std::string qa_jsonl(const std::vector<QaPair>& pairs) {
  std::vector<json> rows;
  for (const auto& p : pairs) rows.push_back({{"question", p.question}, {"answer", p.answer}});
  return to_jsonl(rows);
}

json grounded_to_json(const GroundedInstance& g, const TripleStore& store) {
  const Triple& t = store.triple(g.gold_triple);
  return {{"question", join_tokens(g.question)},
          {"answer", join_tokens(g.answer)},
          {"subject", t.subject},
          {"predicate", t.predicate},
          {"object", t.object},
          {"object_span", {g.span_begin, g.span_end}}};
}

GroundedInstance grounded_from_json(const json& j, const TripleStore* store) {
  GroundedInstance g;
  g.question = tokenize(j.at("question").get<std::string>());
  g.answer = tokenize(j.at("answer").get<std::string>());
  const auto& span = j.at("object_span");
  if (!span.is_array() || span.size() != 2) throw FormatError("object_span must be [begin, end]");
  g.span_begin = span[0].get<std::size_t>();
  g.span_end = span[1].get<std::size_t>();
  if (g.span_begin >= g.span_end || g.span_end > g.answer.size()) {
    throw FormatError("object_span outside the answer");
  }
  const std::string object = normalize_text(j.at("object").get<std::string>());
  if (join_tokens(g.answer, g.span_begin, g.span_end) != object) {
    throw FormatError("object_span does not cover the object '" + object + "'");
  }
  if (store) {
    auto id = store->find(j.at("subject").get<std::string>(), j.at("predicate").get<std::string>(),
                          object);
    if (!id) throw FormatError("gold triple not present in the knowledge base");
    g.gold_triple = *id;
  }
  return g;
}

std::vector<GroundedInstance> read_grounded(const std::string& path, const TripleStore* store) {
  std::vector<GroundedInstance> out;
  read_jsonl(path, [&](const json& j, std::size_t) { out.push_back(grounded_from_json(j, store)); });
  return out;
}

std::string grounded_jsonl(const std::vector<GroundedInstance>& rows, const TripleStore& store) {
  std::vector<json> out;
  for (const auto& g : rows) out.push_back(grounded_to_json(g, store));
  return to_jsonl(out);
}

TripleStore gold_fact_store(const std::string& grounded_path) {
  std::vector<Triple> facts;
  read_jsonl(grounded_path, [&](const json& j, std::size_t) {
    facts.push_back({j.at("subject").get<std::string>(), j.at("predicate").get<std::string>(),
                     j.at("object").get<std::string>()});
  });
  if (facts.empty()) throw FormatError(grounded_path + ": no grounded records");
  return TripleStore::build(facts);
}

}  // namespace genqa
