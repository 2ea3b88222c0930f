// SPDX-License-Identifier: Apache-2.0
#include "genqa/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <random>
#include <set>

#include "genqa/errors.hpp"
#include "genqa/vocab.hpp"

namespace genqa {

namespace {

std::vector<std::string> heights() {
  std::vector<std::string> out;
  for (int cm = 160; cm <= 229; ++cm) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%d.%02dm", cm / 100, cm % 100);
    out.emplace_back(buf);
  }
  return out;
}

std::vector<std::string> years() {
  std::vector<std::string> out;
  for (int y = 1950; y <= 1999; ++y) out.push_back(std::to_string(y));
  return out;
}

const std::vector<std::string> kFirstNames{
    "yao",  "lionel", "ludwig", "ana",   "marco", "chen",  "li",    "wei",   "sofia", "omar",
    "ivan", "lena",   "diego",  "kofi",  "mei",   "raj",   "noor",  "elif",  "jonas", "aiko",
    "pablo", "nina",  "tariq",  "olga",  "hugo",  "zara",  "kenji", "ines",  "felix", "amara",
    "bruno", "yuki",  "leila",  "sven",  "rosa",  "emil",  "hana",  "luca",  "dmitri", "farah"};

const std::vector<std::string> kLastNames{
    "ming",    "messi",  "beethoven", "garcia",  "novak",   "silva",     "tanaka",  "haddad",
    "kowalski", "okafor", "rossi",    "petrov",  "jensen",  "moreau",    "mendes",  "nakamura",
    "kaur",    "osei",   "larsen",    "fischer", "duarte",  "castillo",  "abadi",   "lindqvist",
    "moretti", "sato",   "horvat",    "kim",     "bauer",   "navarro",   "quispe",  "mensah",
    "varga",   "dubois", "costa",     "yilmaz",  "chowdhury", "ferreira", "wong",   "adeyemi"};

const std::vector<std::string> kFillers{"hey ,", "um ,", "so ,", "quick question ,", "hi there ,"};

/// A template split around its single slot.
struct Split {
  std::vector<std::string> before, after;
};

Split split_template(const std::string& tmpl, const std::string& slot) {
  const auto at = tmpl.find(slot);
  if (at == std::string::npos) throw InvalidArgument("template '" + tmpl + "' lacks " + slot);
  return {tokenize(tmpl.substr(0, at)), tokenize(tmpl.substr(at + slot.size()))};
}

/// Rendered tokens plus the positions that came from the template text.
struct Rendered {
  std::vector<std::string> tokens;
  std::vector<std::size_t> template_positions;
};

Rendered render(const std::string& tmpl, const std::string& slot, const std::string& value) {
  Split s = split_template(tmpl, slot);
  Rendered r;
  for (auto& t : s.before) {
    r.template_positions.push_back(r.tokens.size());
    r.tokens.push_back(t);
  }
  for (auto& t : tokenize(value)) r.tokens.push_back(t);
  for (auto& t : s.after) {
    r.template_positions.push_back(r.tokens.size());
    r.tokens.push_back(t);
  }
  return r;
}

bool alphabetic(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalpha(c); });
}

/// Deletes or swaps an interior character of one template word. Returns
/// false if no word is long enough.
bool add_typo(Rendered& r, std::mt19937_64& rng) {
  std::vector<std::size_t> eligible;
  for (std::size_t p : r.template_positions) {
    if (r.tokens[p].size() >= 4 && alphabetic(r.tokens[p])) eligible.push_back(p);
  }
  if (eligible.empty()) return false;
  std::string& w = r.tokens[eligible[std::uniform_int_distribution<std::size_t>(0, eligible.size() - 1)(rng)]];
  const std::size_t i = std::uniform_int_distribution<std::size_t>(1, w.size() - 2)(rng);
  if (rng() % 2 == 0) {
    w.erase(i, 1);
  } else {
    std::swap(w[i], w[i + 1 < w.size() ? i + 1 : i - 1]);
  }
  return true;
}

}  // namespace

const std::vector<PredicateSchema>& predicate_catalog() {
  static const std::vector<PredicateSchema> catalog{
      {"height",
       heights(),
       {"how tall is {s} ?", "what is the height of {s} ?", "{s} is how tall ?",
        "do you know how tall {s} is ?"},
       {"he is {o} tall .", "{o} , he is very tall .", "about {o} i think ."}},
      {"place of birth",
       {"germany", "france", "china", "brazil", "spain", "italy", "japan", "kenya",
        "mexico", "canada", "egypt", "norway", "chile", "peru", "india", "greece",
        "poland", "sweden", "ghana", "cuba", "turkey", "vietnam", "austria", "portugal"},
       {"where was {s} born ?", "what is the place of birth of {s} ?",
        "which country is {s} from ?", "where does {s} come from ?"},
       {"he was born in {o} .", "{o} is where he was born .", "he comes from {o} ."}},
      {"team",
       {"fc barcelona", "real madrid", "ac milan", "bayern munich", "los angeles lakers",
        "chicago bulls", "boston celtics", "manchester united", "inter milan", "ajax amsterdam",
        "celtic glasgow", "houston rockets", "miami heat", "paris saint germain",
        "juventus turin", "benfica lisbon", "river plate", "boca juniors", "santos fc",
        "porto fc"},
       {"which team does {s} play for ?", "what team is {s} on ?", "who does {s} play for ?",
        "what club is {s} with ?"},
       {"he plays for {o} .", "he is a member of {o} .", "{o} , for a few years now ."}},
      {"birth year",
       years(),
       {"when was {s} born ?", "what year was {s} born in ?", "in which year was {s} born ?",
        "what is the birth year of {s} ?"},
       {"he was born in {o} .", "in {o} .", "{o} is the year he was born ."}},
      {"occupation",
       {"singer", "painter", "basketball player", "composer", "football player", "writer",
        "teacher", "doctor", "lawyer", "chef", "pilot", "farmer", "journalist", "tennis player",
        "poet", "scientist"},
       {"what does {s} do for a living ?", "what is the occupation of {s} ?",
        "what job does {s} have ?", "what kind of work does {s} do ?"},
       {"he is a {o} .", "he works as a {o} .", "{o} , i believe ."}},
  };
  return catalog;
}

const std::vector<PredicateSchema>& SyntheticSpec::active_schemas() const {
  return schemas.empty() ? predicate_catalog() : schemas;
}

void SyntheticSpec::validate() const {
  auto fail = [](const std::string& m) { throw InvalidArgument("invalid synthetic spec: " + m); };
  const auto& all = active_schemas();
  if (entities < 1) fail("entities must be >= 1");
  if (predicates < 1 || predicates > all.size()) {
    fail("predicates must be in [1, " + std::to_string(all.size()) + "]");
  }
  if (paraphrases < 1 || answer_templates < 1 || qa_per_triple < 1) {
    fail("template and pair counts must be >= 1");
  }
  if (!(noise >= 0.0 && noise <= 1.0)) fail("noise must be in [0, 1]");
  if (!(held_out > 0.0 && held_out < 1.0)) fail("held_out must be in (0, 1)");
  if (!(mononyms >= 0.0 && mononyms < 1.0)) fail("mononyms must be in [0, 1)");
  for (std::size_t p = 0; p < predicates; ++p) {
    const auto& s = all[p];
    if (s.values.empty()) fail("predicate '" + s.name + "' has no values");
    if (s.questions.size() < paraphrases) fail("predicate '" + s.name + "' has too few question templates");
    if (s.answers.size() < answer_templates) fail("predicate '" + s.name + "' has too few answer templates");
  }
  const std::size_t max_entities =
      kFirstNames.size() * kLastNames.size() + kLastNames.size();
  if (entities > max_entities) fail("at most " + std::to_string(max_entities) + " entities");
}

json SyntheticSpec::to_json() const {
  json j{{"entities", entities},       {"predicates", predicates}, {"paraphrases", paraphrases},
         {"answer_templates", answer_templates}, {"qa_per_triple", qa_per_triple},
         {"noise", noise},             {"held_out", held_out},     {"mononyms", mononyms},
         {"seed", seed}};
  if (!schemas.empty()) {
    json arr = json::array();
    for (const auto& s : schemas) {
      arr.push_back({{"name", s.name}, {"values", s.values}, {"questions", s.questions},
                     {"answers", s.answers}});
    }
    j["schemas"] = arr;
  }
  return j;
}

SyntheticSpec SyntheticSpec::from_json(const json& j) {
  if (!j.is_object()) throw FormatError("synthetic spec must be a JSON object");
  static const std::set<std::string> known{"entities", "predicates", "paraphrases",
                                           "answer_templates", "qa_per_triple", "noise",
                                           "held_out", "mononyms", "seed", "schemas"};
  for (const auto& [k, _] : j.items()) {
    if (!known.contains(k)) throw FormatError("unknown synthetic spec key '" + k + "'");
  }
  SyntheticSpec s;
  try {
    s.entities = j.value("entities", s.entities);
    s.predicates = j.value("predicates", s.predicates);
    s.paraphrases = j.value("paraphrases", s.paraphrases);
    s.answer_templates = j.value("answer_templates", s.answer_templates);
    s.qa_per_triple = j.value("qa_per_triple", s.qa_per_triple);
    s.noise = j.value("noise", s.noise);
    s.held_out = j.value("held_out", s.held_out);
    s.mononyms = j.value("mononyms", s.mononyms);
    s.seed = j.value("seed", s.seed);
    if (j.contains("schemas")) {
      for (const auto& e : j.at("schemas")) {
        s.schemas.push_back({e.at("name").get<std::string>(),
                             e.at("values").get<std::vector<std::string>>(),
                             e.at("questions").get<std::vector<std::string>>(),
                             e.at("answers").get<std::vector<std::string>>()});
      }
      if (!j.contains("predicates")) s.predicates = s.schemas.size();
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("synthetic spec: ") + e.what());
  }
  s.validate();
  return s;
}

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const auto& schemas = spec.active_schemas();

  // entity names: some single last names, the rest first + last
  std::size_t mono = static_cast<std::size_t>(spec.mononyms * static_cast<double>(spec.entities));
  mono = std::min(mono, kLastNames.size());
  std::vector<std::string> names;
  {
    std::vector<std::string> last = kLastNames;
    std::shuffle(last.begin(), last.end(), rng);
    names.assign(last.begin(), last.begin() + static_cast<long>(mono));
    std::vector<std::string> full;
    for (const auto& f : kFirstNames) {
      for (const auto& l : kLastNames) full.push_back(f + " " + l);
    }
    std::shuffle(full.begin(), full.end(), rng);
    const std::size_t need = spec.entities - names.size();
    if (need > full.size()) throw InvalidArgument("not enough distinct entity names");
    names.insert(names.end(), full.begin(), full.begin() + static_cast<long>(need));
    std::shuffle(names.begin(), names.end(), rng);
  }

  SyntheticCorpus c;
  for (const auto& name : names) {
    for (std::size_t p = 0; p < spec.predicates; ++p) {
      const auto& vals = schemas[p].values;
      const auto& v = vals[std::uniform_int_distribution<std::size_t>(0, vals.size() - 1)(rng)];
      c.triples.push_back({name, schemas[p].name, v});
    }
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t t = 0; t < c.triples.size(); ++t) {
    const Triple& tr = c.triples[t];
    const PredicateSchema& schema = schemas[t % spec.predicates];
    for (std::size_t k = 0; k < spec.qa_per_triple; ++k) {
      const auto& qt = schema.questions[std::uniform_int_distribution<std::size_t>(0, spec.paraphrases - 1)(rng)];
      const auto& at = schema.answers[std::uniform_int_distribution<std::size_t>(0, spec.answer_templates - 1)(rng)];
      Rendered q = render(qt, "{s}", tr.subject);
      Rendered a = render(at, "{o}", tr.object);
      bool noisy = false;
      if (unit(rng) < spec.noise) {
        noisy = true;
        switch (rng() % 3) {
          case 0:
            if (!add_typo(q, rng)) add_typo(a, rng);
            break;
          case 1: {
            const auto& f = kFillers[std::uniform_int_distribution<std::size_t>(0, kFillers.size() - 1)(rng)];
            auto extra = tokenize(f);
            q.tokens.insert(q.tokens.begin(), extra.begin(), extra.end());
            break;
          }
          default:
            if (!add_typo(a, rng)) add_typo(q, rng);
            break;
        }
      }
      c.qa.push_back({join_tokens(q.tokens), join_tokens(a.tokens)});
      c.gold.push_back(static_cast<int>(t));
      c.noisy.push_back(noisy);
    }
  }
  return c;
}

std::vector<std::string> answer_templates(const SyntheticSpec& spec) {
  std::vector<std::string> out;
  const auto& schemas = spec.active_schemas();
  for (std::size_t p = 0; p < spec.predicates && p < schemas.size(); ++p) {
    for (std::size_t a = 0; a < spec.answer_templates && a < schemas[p].answers.size(); ++a) {
      out.push_back(schemas[p].answers[a]);
    }
  }
  return out;
}

void write_synthetic(const SyntheticCorpus& corpus, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<json> gold;
  for (std::size_t i = 0; i < corpus.qa.size(); ++i) {
    const Triple& t = corpus.triples[static_cast<std::size_t>(corpus.gold[i])];
    gold.push_back({{"qa_line", i + 1},
                    {"subject", t.subject},
                    {"predicate", t.predicate},
                    {"object", t.object},
                    {"noisy", static_cast<bool>(corpus.noisy[i])}});
  }
  atomic_write((fs::path(dir) / "triples.jsonl").string(), triples_jsonl(corpus.triples));
  atomic_write((fs::path(dir) / "qa.jsonl").string(), qa_jsonl(corpus.qa));
  atomic_write((fs::path(dir) / "gold.jsonl").string(), to_jsonl(gold));
}

}  // namespace genqa
