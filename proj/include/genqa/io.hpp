// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "genqa/kb_store.hpp"
#include "json.hpp"

namespace genqa {

using json = nlohmann::json;

std::string read_file(const std::string& path);
/// Writes to a sibling temp file, then renames over `path`.
void atomic_write(const std::string& path, const std::string& contents);

/// Calls `fn(object, line_number)` for every non-blank line. Parse errors
/// throw FormatError naming the file and line.
void read_jsonl(const std::string& path, const std::function<void(const json&, std::size_t)>& fn);
std::string to_jsonl(const std::vector<json>& rows);

/// A raw question-answer pair.
struct QaPair {
  std::string question;
  std::string answer;
};

std::vector<Triple> read_triples(const std::string& path);
std::string triples_jsonl(const std::vector<Triple>& triples);
std::vector<QaPair> read_qa(const std::string& path);
std::string qa_jsonl(const std::vector<QaPair>& pairs);

/// Grounded records carry the gold triple's strings; `store` resolves them to
/// ids when reading.
json grounded_to_json(const GroundedInstance& g, const TripleStore& store);
GroundedInstance grounded_from_json(const json& j, const TripleStore* store);
std::vector<GroundedInstance> read_grounded(const std::string& path, const TripleStore* store);
std::string grounded_jsonl(const std::vector<GroundedInstance>& rows, const TripleStore& store);

/// The distinct gold facts named by a grounded file, as a store.
TripleStore gold_fact_store(const std::string& grounded_path);

}  // namespace genqa
