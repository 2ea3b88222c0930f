// SPDX-License-Identifier: Apache-2.0
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "genqa/config.hpp"
#include "genqa/errors.hpp"
#include "genqa/io.hpp"
#include "toy_data.hpp"

using namespace genqa;

namespace {

std::string temp_file(const std::string& name, const std::string& body) {
  const auto p = std::filesystem::temp_directory_path() / ("genqa_io_test_" + name);
  std::ofstream(p) << body;
  return p.string();
}

}  // namespace

TEST_CASE("config text round trip") {
  Config c;
  c.learning_rate = 0.25;
  c.enquirer = EnquirerKind::Cnn;
  c.system = SystemKind::Nrm;
  c.precision = Precision::Float32;
  c.deterministic = false;
  c.beam_width = 7;
  Config back;
  back.apply_text(c.to_text());
  CHECK(back == c);
  for (const auto& key : Config::keys()) CHECK(back.get(key) == c.get(key));
}

TEST_CASE("config parsing errors name the line") {
  Config c;
  c.apply_text("# comment\n\nepochs = 3  # trailing\n");
  CHECK(c.epochs == 3);
  try {
    c.apply_text("epochs = 3\nbogus = 1\n", "run.cfg");
    FAIL("expected an error");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("run.cfg:2") != std::string::npos);
  }
  CHECK_THROWS_AS(c.apply_text("epochs 3\n"), InvalidArgument);
  CHECK_THROWS_AS(c.set("epochs", "-1"), InvalidArgument);
  CHECK_THROWS_AS(c.set("learning_rate", "fast"), InvalidArgument);
  CHECK_THROWS_AS(c.set("deterministic", "maybe"), InvalidArgument);
  CHECK_THROWS_AS(c.set("enquirer", "rnn"), InvalidArgument);
}

TEST_CASE("config validation") {
  Config c;
  CHECK_NOTHROW(c.validate());
  Config bad = c;
  bad.learning_rate = -0.1;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = c;
  bad.l2 = -1e-3;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = c;
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = c;
  bad.beam_width = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("environment overrides") {
  Config c;
  std::string a = "GENQA_EPOCHS=9", b = "PATH=/bin", d = "GENQA_ENQUIRER=cnn";
  char* env[] = {a.data(), b.data(), d.data(), nullptr};
  c.apply_environment(env);
  CHECK(c.epochs == 9);
  CHECK(c.enquirer == EnquirerKind::Cnn);
  std::string bad = "GENQA_NOT_A_KEY=1";
  char* env2[] = {bad.data(), nullptr};
  CHECK_THROWS_AS(c.apply_environment(env2), InvalidArgument);
}

TEST_CASE("config files") {
  const std::string path = temp_file("cfg", "hidden_dim = 12\nseed = 4\n");
  const Config c = load_config_file(path);
  CHECK(c.hidden_dim == 12);
  CHECK(c.seed == 4);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_config_file(path), InvalidArgument);
}

TEST_CASE("jsonl errors carry the line number") {
  const std::string path = temp_file("bad.jsonl", "{\"subject\":\"a\",\"predicate\":\"b\",\"object\":\"c\"}\n\n{oops\n");
  try {
    read_triples(path);
    FAIL("expected an error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
  const std::string missing = temp_file("missing.jsonl", "{\"subject\":\"a\"}\n");
  CHECK_THROWS_AS(read_triples(missing), FormatError);
  const std::string scalar = temp_file("scalar.jsonl", "3\n");
  CHECK_THROWS_AS(read_qa(scalar), FormatError);
  for (const auto& p : {path, missing, scalar}) std::filesystem::remove(p);
}

TEST_CASE("triples, qa and grounded files round trip") {
  const testing::ToyData d = testing::toy_data();
  const auto dir = std::filesystem::temp_directory_path() / "genqa_io_test_dir";
  std::filesystem::create_directories(dir);

  const std::string tp = (dir / "triples.jsonl").string();
  atomic_write(tp, triples_jsonl(d.store.triples()));
  const auto triples = read_triples(tp);
  REQUIRE(triples.size() == d.store.size());
  for (std::size_t i = 0; i < triples.size(); ++i) CHECK(triples[i].object == d.store.triples()[i].object);

  const std::vector<QaPair> qa{{"how tall is yao ming ?", "2.29m ."}};
  const std::string qp = (dir / "qa.jsonl").string();
  atomic_write(qp, qa_jsonl(qa));
  CHECK(read_qa(qp).front().answer == "2.29m .");

  const std::string gp = (dir / "grounded.jsonl").string();
  atomic_write(gp, grounded_jsonl(d.instances, d.store));
  const auto back = read_grounded(gp, &d.store);
  REQUIRE(back.size() == d.instances.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].question == d.instances[i].question);
    CHECK(back[i].answer == d.instances[i].answer);
    CHECK(back[i].gold_triple == d.instances[i].gold_triple);
    CHECK(back[i].span_begin == d.instances[i].span_begin);
    CHECK(back[i].span_end == d.instances[i].span_end);
  }
  const TripleStore gold = gold_fact_store(gp);
  CHECK(gold.size() == d.instances.size());

  // no temp file is left behind
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    CHECK(e.path().extension() == ".jsonl");
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("grounded records are validated") {
  const testing::ToyData d = testing::toy_data();
  json j = grounded_to_json(d.instances[0], d.store);
  CHECK_NOTHROW(grounded_from_json(j, &d.store));
  json wrong_span = j;
  wrong_span["object_span"] = json::array({0, 1});
  CHECK_THROWS_AS(grounded_from_json(wrong_span, &d.store), FormatError);
  json outside = j;
  outside["object_span"] = json::array({2, 99});
  CHECK_THROWS_AS(grounded_from_json(outside, &d.store), FormatError);
  json unknown = j;
  unknown["object"] = "3.00m";
  unknown["answer"] = "he is 3.00m tall .";
  CHECK_THROWS_AS(grounded_from_json(unknown, &d.store), FormatError);
}
