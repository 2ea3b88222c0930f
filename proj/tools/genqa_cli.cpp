// SPDX-License-Identifier: Apache-2.0
// genqa: command-line driver for the whole pipeline.
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>

#include "CLI11.hpp"
#include "genqa/baselines.hpp"
#include "genqa/errors.hpp"
#include "genqa/eval.hpp"
#include "genqa/io.hpp"
#include "genqa/synthetic.hpp"
#include "genqa/trainer.hpp"

extern char** environ;

namespace {

using namespace genqa;

bool g_json_logs = false;

// Human text or one JSON object per line, always on stderr.
void log(const std::string& event, const json& fields = json::object()) {
  if (g_json_logs) {
    json j = fields;
    j["event"] = event;
    std::cerr << j.dump() << '\n';
    return;
  }
  std::cerr << event;
  for (const auto& [k, v] : fields.items()) std::cerr << ' ' << k << '=' << (v.is_string() ? v.get<std::string>() : v.dump());
  std::cerr << '\n';
}

struct Common {
  std::string config_file;
  std::vector<std::string> sets;
  int threads = -1;
};

// defaults < file < environment < flags
Config resolve_config(const Common& c) {
  Config cfg;
  if (!c.config_file.empty()) cfg = load_config_file(c.config_file);
  cfg.apply_environment(environ);
  for (const auto& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw InvalidArgument("--set expects key=value, got '" + kv + "'");
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t") + 1);
      return s;
    };
    cfg.set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
  }
  if (c.threads >= 0) cfg.threads = static_cast<std::size_t>(c.threads);
  cfg.validate();
  return cfg;
}

void require_file(const std::string& path) {
  if (!std::filesystem::is_regular_file(path)) throw InvalidArgument("no such file: " + path);
}

void write_or_print(const std::string& path, const std::string& body) {
  if (path.empty() || path == "-") {
    std::cout << body;
  } else {
    atomic_write(path, body);
  }
}

// ---------------------------------------------------------------------------

int cmd_synth(const std::string& spec_path, const std::string& out) {
  SyntheticSpec spec;
  if (!spec_path.empty()) {
    require_file(spec_path);
    try {
      spec = SyntheticSpec::from_json(json::parse(read_file(spec_path)));
    } catch (const json::parse_error& e) {
      throw FormatError(spec_path + ": " + e.what());
    }
  }
  const SyntheticCorpus c = generate_synthetic(spec);
  write_synthetic(c, out);
  log("synth", {{"triples", c.triples.size()}, {"qa_pairs", c.qa.size()}, {"out", out}});
  return 0;
}

int cmd_ground(const std::string& kb, const std::string& qa, const std::string& out,
               std::size_t cap) {
  require_file(kb);
  require_file(qa);
  const TripleStore store = TripleStore::build(read_triples(kb));
  const std::vector<QaPair> pairs = read_qa(qa);
  std::vector<GroundedInstance> rows;
  for (const auto& p : pairs) {
    auto g = ground_qa_pair(store, tokenize(p.question), tokenize(p.answer), cap);
    if (g) rows.push_back(std::move(*g));
  }
  write_or_print(out, grounded_jsonl(rows, store));
  log("ground", {{"pairs", pairs.size()}, {"grounded", rows.size()},
                 {"dropped", pairs.size() - rows.size()}});
  return 0;
}

// Splits without a KB: the gold fact named by each record is its key.
int cmd_split(const std::string& in, double fraction, std::uint64_t seed,
              const std::string& out_train, const std::string& out_test) {
  require_file(in);
  const TripleStore facts = gold_fact_store(in);
  const auto rows = read_grounded(in, &facts);
  auto [train, test] = partition_by_triple(rows, fraction, seed);
  atomic_write(out_train, grounded_jsonl(train, facts));
  atomic_write(out_test, grounded_jsonl(test, facts));
  log("split", {{"train", train.size()}, {"test", test.size()}});
  return 0;
}

int cmd_check_split(const std::string& train_path, const std::string& test_path) {
  require_file(train_path);
  require_file(test_path);
  auto facts = [](const std::string& path) {
    std::set<std::tuple<std::string, std::string, std::string>> out;
    read_jsonl(path, [&](const json& j, std::size_t) {
      out.insert({normalize_text(j.at("subject").get<std::string>()),
                  normalize_text(j.at("predicate").get<std::string>()),
                  normalize_text(j.at("object").get<std::string>())});
    });
    return out;
  };
  const auto a = facts(train_path), b = facts(test_path);
  std::size_t shared = 0;
  for (const auto& f : b) shared += a.count(f);
  log("check-split", {{"train_facts", a.size()}, {"test_facts", b.size()}, {"shared", shared}});
  if (shared > 0) {
    std::cerr << "split is unsound: " << shared << " gold facts occur on both sides\n";
    return 1;
  }
  return 0;
}

int cmd_train(const std::string& data, const std::string& kb, const std::string& checkpoint,
              const Config& cfg) {
  require_file(data);
  require_file(kb);
  const TripleStore store = TripleStore::build(read_triples(kb));
  const auto train_rows = read_grounded(data, &store);
  log("train.start", {{"system", to_string(cfg.system)}, {"enquirer", to_string(cfg.enquirer)},
                      {"instances", train_rows.size()}, {"seed", cfg.seed}});
  auto on_epoch = [&](const EpochLog& e) {
    // epoch logs are the command's output
    if (g_json_logs) {
      std::cout << json{{"epoch", e.epoch}, {"loss", e.loss}, {"nll_per_token", e.nll_per_token},
                        {"learning_rate", e.learning_rate}}.dump()
                << std::endl;
    } else {
      std::cout << "epoch " << e.epoch << " loss " << e.loss << " nll/token " << e.nll_per_token
                << " lr " << e.learning_rate << std::endl;
    }
  };
  Checkpoint ck;
  if (cfg.system == SystemKind::Embedding) {
    EmbeddingQa m = EmbeddingQa::create(cfg, train_rows, store);
    train_embedding_qa(m, train_rows, store, cfg, on_epoch);
    ck = make_checkpoint(m, store);
  } else {
    GenQaModel m = GenQaModel::create(cfg, train_rows, store);
    std::size_t dropped = 0;
    const auto examples = prepare_dataset(m, train_rows, store, &dropped);
    if (dropped > 0) log("train.dropped", {{"instances", dropped}, {"reason", "gold triple not among candidates"}});
    train(m, examples, cfg, on_epoch);
    ck = make_checkpoint(m, store);
  }
  save_checkpoint(checkpoint, ck);
  log("train.done", {{"checkpoint", checkpoint}});
  return 0;
}

std::vector<std::string> templates_from_spec(const std::string& spec_path) {
  if (spec_path.empty()) return {};
  require_file(spec_path);
  return answer_templates(SyntheticSpec::from_json(json::parse(read_file(spec_path))));
}

int cmd_eval(const std::string& checkpoint, const std::string& kb, const std::string& test_path,
             std::string system, const std::string& report_path, const std::string& spec_path,
             std::size_t threads) {
  require_file(test_path);
  std::optional<Checkpoint> ck;
  if (!checkpoint.empty()) {
    require_file(checkpoint);
    ck = load_checkpoint(checkpoint);
  }
  if (system.empty()) {
    if (!ck) throw InvalidArgument("eval needs --checkpoint or --system retrieval");
    system = to_string(ck->config.system);
  }
  TripleStore store;
  if (!kb.empty()) {
    require_file(kb);
    store = TripleStore::build(read_triples(kb));
  } else if (ck) {
    store = store_from_checkpoint(*ck);
  } else {
    throw InvalidArgument("eval needs --kb or --checkpoint for the knowledge base");
  }
  const auto test = read_grounded(test_path, &store);

  EvalReport report;
  if (system == "retrieval") {
    report = evaluate_retrieval(store, test);
  } else {
    if (!ck) throw InvalidArgument("system '" + system + "' needs --checkpoint");
    const SystemKind want = parse_system(system);
    if (want != ck->config.system) {
      throw InvalidArgument("checkpoint holds system '" + to_string(ck->config.system) +
                            "', not '" + system + "'");
    }
    if (want == SystemKind::Embedding) {
      report = evaluate_embedding(embedding_from_checkpoint(*ck), store, test);
    } else {
      const GenQaModel m = model_from_checkpoint(*ck);
      std::string name = system;
      if (want == SystemKind::GenQa && m.enquirer() == EnquirerKind::Cnn) name = "genqa-cnn";
      report = evaluate_generative(name, m, store, test, FluencyCheck(templates_from_spec(spec_path)),
                                   threads);
    }
  }
  write_or_print(report_path, report.to_json().dump(2) + "\n");
  std::cerr << report_table({report});
  return 0;
}

GenQaModel load_generator(const std::string& checkpoint, TripleStore& store) {
  require_file(checkpoint);
  const Checkpoint ck = load_checkpoint(checkpoint);
  store = store_from_checkpoint(ck);
  return model_from_checkpoint(ck);
}

int cmd_answer(const std::string& checkpoint, const std::string& question) {
  TripleStore store;
  const GenQaModel m = load_generator(checkpoint, store);
  const AnswerResult r = answer_question(m, store, question, m.config().beam_width,
                                         m.config().max_answer_length);
  std::cout << r.to_json().dump() << '\n';
  return 0;
}

int cmd_repl(const std::string& checkpoint) {
  TripleStore store;
  const GenQaModel m = load_generator(checkpoint, store);
  std::string line;
  while (true) {
    std::cout << "> " << std::flush;
    if (!std::getline(std::cin, line)) break;
    if (line == ":quit") break;
    if (tokenize(line).empty()) continue;
    const AnswerResult r = answer_question(m, store, line, m.config().beam_width,
                                           m.config().max_answer_length);
    std::cout << r.answer << (r.ungrounded ? "   [ungrounded]" : "") << '\n';
    for (const auto& w : r.kb_words) {
      std::cout << "  " << w.word << " <- (" << w.subject << ", " << w.predicate << ", " << w.word << ")\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"genqa: generative question answering over a triple knowledge base"};
  app.require_subcommand(1);
  app.add_flag("--json-logs", g_json_logs, "machine-readable logs on stderr");
  Common common;
  app.add_option("--config", common.config_file, "config file (key = value lines)");
  app.add_option("--set", common.sets, "override one config key (key=value), repeatable");
  app.add_option("--threads", common.threads, "worker threads");

  std::string spec, out, kb, qa, in, out_train, out_test, data, checkpoint, test, system, report,
      question, train_file;
  double fraction = 0.2;
  std::uint64_t seed = 1;
  std::size_t cap = TripleStore::kDefaultCandidateCap;

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  synth->add_option("--spec", spec, "synthetic spec JSON (defaults if omitted)");
  synth->add_option("--out", out, "output directory")->required();

  auto* ground = app.add_subcommand("ground", "ground QA pairs to KB triples");
  ground->add_option("--kb", kb, "triples JSONL")->required();
  ground->add_option("--qa", qa, "QA pairs JSONL")->required();
  ground->add_option("--out", out, "grounded JSONL ('-' for stdout)")->required();
  ground->add_option("--candidate-cap", cap, "candidate triples per question");

  auto* split = app.add_subcommand("split", "partition grounded data by gold triple");
  split->add_option("--in", in, "grounded JSONL")->required();
  split->add_option("--test-fraction", fraction, "share of gold triples held out")->check(CLI::Range(0.0, 1.0));
  split->add_option("--seed", seed, "shuffle seed");
  split->add_option("--out-train", out_train)->required();
  split->add_option("--out-test", out_test)->required();

  auto* check = app.add_subcommand("check-split", "verify train and test share no gold triple");
  check->add_option("--train", train_file)->required();
  check->add_option("--test", test)->required();

  auto* trn = app.add_subcommand("train", "train a model and write a checkpoint");
  trn->add_option("--data", data, "grounded training JSONL")->required();
  trn->add_option("--kb", kb, "triples JSONL")->required();
  trn->add_option("--checkpoint", checkpoint, "output checkpoint")->required();

  auto* ev = app.add_subcommand("eval", "evaluate a system on grounded test data");
  ev->add_option("--checkpoint", checkpoint);
  ev->add_option("--kb", kb, "triples JSONL (defaults to the checkpoint's KB)");
  ev->add_option("--test", test, "grounded test JSONL")->required();
  ev->add_option("--system", system, "genqa, nrm, embedding or retrieval");
  ev->add_option("--report", report, "report JSON ('-' for stdout)");
  ev->add_option("--spec", spec, "synthetic spec whose answer templates define fluency");

  auto* ans = app.add_subcommand("answer", "answer one question");
  ans->add_option("--checkpoint", checkpoint)->required();
  ans->add_option("--question", question)->required();

  auto* repl = app.add_subcommand("repl", "answer questions read from stdin until :quit");
  repl->add_option("--checkpoint", checkpoint)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const Config cfg = resolve_config(common);
    if (*synth) return cmd_synth(spec, out);
    if (*ground) return cmd_ground(kb, qa, out, cap);
    if (*split) return cmd_split(in, fraction, seed, out_train, out_test);
    if (*check) return cmd_check_split(train_file, test);
    if (*trn) return cmd_train(data, kb, checkpoint, cfg);
    if (*ev) return cmd_eval(checkpoint, kb, test, system, report, spec, cfg.threads);
    if (*ans) return cmd_answer(checkpoint, question);
    if (*repl) return cmd_repl(checkpoint);
  } catch (const std::exception& e) {
    log("error", {{"message", e.what()}});
    return 1;
  }
  return 1;
}
