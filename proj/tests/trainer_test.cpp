// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "genqa/errors.hpp"
#include "genqa/trainer.hpp"
#include "gradcheck.hpp"
#include "toy_data.hpp"

using namespace genqa;

namespace {

struct Setup {
  testing::ToyData data = testing::toy_data();
  GenQaModel model;
  std::vector<PreparedExample> examples;

  explicit Setup(Config c = testing::tiny_config()) {
    model = GenQaModel::create(c, data.instances, data.store);
    examples = prepare_dataset(model, data.instances, data.store);
  }

  std::vector<const PreparedExample*> batch() const {
    std::vector<const PreparedExample*> out;
    for (const auto& e : examples) out.push_back(&e);
    return out;
  }
};

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("genqa_trainer_test_" + name)).string();
}

}  // namespace

TEST_CASE("batch loss is mean NLL plus the L2 term") {
  Setup s;
  const auto b = s.batch();
  const double l2 = 0.01;
  const BatchLoss got = batch_loss(s.model, b, l2, nullptr);

  double nll = 0.0, sq = 0.0;
  std::size_t tokens = 0;
  for (const auto* ex : b) {
    Tape tape(&s.model.params(), nullptr, false);
    nll -= s.model.log_likelihood(tape, *ex).value().item();
    tokens += ex->targets.size();
  }
  for (std::size_t slot = 0; slot < s.model.params().size(); ++slot) {
    for (double v : s.model.params().value(static_cast<int>(slot)).data()) sq += v * v;
  }
  CHECK(got.nll == doctest::Approx(nll).epsilon(1e-12));
  CHECK(got.tokens == tokens);
  CHECK(got.loss == doctest::Approx(nll / static_cast<double>(b.size()) + l2 * sq).epsilon(1e-12));
}

TEST_CASE("batch gradient matches finite differences of the batch loss") {
  Config c = testing::tiny_config();
  c.enquirer = EnquirerKind::Cnn;
  Setup s(c);
  const auto all = s.batch();
  const std::vector<const PreparedExample*> b(all.begin(), all.begin() + 3);
  auto report = testing::check_parameter_gradients(
      s.model.params(), [&](Gradients& g) { batch_loss(s.model, b, 1e-3, &g); },
      [&] { return batch_loss(s.model, b, 1e-3, nullptr).loss; }, 1e-5, 1e-5);
  CHECK(report.checked > 100);
  CHECK_MESSAGE(report.max_rel_error < 1e-4, report.worst);
}

TEST_CASE("threaded batch gradients equal the serial ones") {
  Setup s;
  const auto b = s.batch();
  Gradients one(s.model.params()), three(s.model.params());
  const double l1 = batch_loss(s.model, b, 1e-4, &one, 1).loss;
  const double l3 = batch_loss(s.model, b, 1e-4, &three, 3).loss;
  CHECK(l1 == doctest::Approx(l3).epsilon(1e-14));
  for (std::size_t slot = 0; slot < one.size(); ++slot) {
    for (std::size_t i = 0; i < one.slot(static_cast<int>(slot)).size(); ++i) {
      CHECK(one.slot(static_cast<int>(slot))[i] ==
            doctest::Approx(three.slot(static_cast<int>(slot))[i]).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(batch_loss(s.model, std::vector<const PreparedExample*>{}, 0.0, nullptr), InvalidArgument);
}

TEST_CASE("learning rate zero leaves parameters unchanged") {
  Config c = testing::tiny_config();
  c.learning_rate = 0.0;
  c.epochs = 1;
  c.validate();
  Setup s(c);
  const ParameterSet before = s.model.params();
  train(s.model, s.examples, c);
  for (std::size_t slot = 0; slot < before.size(); ++slot) {
    const auto a = before.value(static_cast<int>(slot)).data();
    const auto b = s.model.params().value(static_cast<int>(slot)).data();
    CHECK(std::equal(a.begin(), a.end(), b.begin()));
  }
}

TEST_CASE("training drives the toy loss down and logs each epoch") {
  Config c = testing::tiny_config();
  c.embedding_dim = 8;
  c.hidden_dim = 8;
  c.attention_dim = 8;
  c.learning_rate = 0.5;
  c.batch_size = 5;
  c.epochs = 60;
  Setup s(c);
  const double start = dataset_nll_per_token(s.model, s.examples);
  std::vector<EpochLog> seen;
  const auto log = train(s.model, s.examples, c, [&](const EpochLog& e) { seen.push_back(e); });
  REQUIRE(log.size() == c.epochs);
  CHECK(seen.size() == c.epochs);
  CHECK(log.front().epoch == 1);
  CHECK(log.front().learning_rate == c.learning_rate);
  const double end = dataset_nll_per_token(s.model, s.examples);
  CHECK(end < 0.5 * start);
  // the schedule only ever shrinks the rate
  for (std::size_t i = 1; i < log.size(); ++i) CHECK(log[i].learning_rate <= log[i - 1].learning_rate);
}

TEST_CASE("training is deterministic for a fixed seed") {
  Config c = testing::tiny_config();
  c.epochs = 3;
  c.batch_size = 2;
  Setup a(c), b(c);
  train(a.model, a.examples, c);
  c.threads = 2;  // chunked reduction is deterministic too
  train(b.model, b.examples, c);
  const std::string ca = serialize_checkpoint(make_checkpoint(a.model, a.data.store));
  const std::string cb = serialize_checkpoint(make_checkpoint(b.model, b.data.store));
  // configs differ in `threads` only, so compare parameters
  for (std::size_t slot = 0; slot < a.model.params().size(); ++slot) {
    const auto x = a.model.params().value(static_cast<int>(slot)).data();
    const auto y = b.model.params().value(static_cast<int>(slot)).data();
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i] == doctest::Approx(y[i]).epsilon(1e-10));
  }
  c.threads = 1;
  Setup e(c);
  train(e.model, e.examples, c);
  CHECK(serialize_checkpoint(make_checkpoint(e.model, e.data.store)) == ca);
}

TEST_CASE("prepare_dataset drops instances whose gold is not a candidate") {
  Setup s;
  GroundedInstance orphan = s.data.instances[0];
  orphan.question = tokenize("how tall is he ?");
  std::size_t dropped = 0;
  auto out = prepare_dataset(s.model, {orphan, s.data.instances[1]}, s.data.store, &dropped);
  CHECK(dropped == 1);
  CHECK(out.size() == 1);
}

TEST_CASE("checkpoint round trip") {
  for (Precision p : {Precision::Float64, Precision::Float32}) {
    CAPTURE(to_string(p));
    Config c = testing::tiny_config();
    c.precision = p;
    c.enquirer = p == Precision::Float32 ? EnquirerKind::Cnn : EnquirerKind::Bilinear;
    Setup s(c);
    c.epochs = 1;
    train(s.model, s.examples, c);
    const Checkpoint ck = make_checkpoint(s.model, s.data.store);
    const std::string path = temp_path("roundtrip.ckpt");
    save_checkpoint(path, ck);
    const Checkpoint back = load_checkpoint(path);
    std::filesystem::remove(path);

    CHECK(back.config == s.model.config());
    const GenQaModel m = model_from_checkpoint(back);
    const TripleStore store = store_from_checkpoint(back);
    CHECK(store.size() == s.data.store.size());
    CHECK(m.question_vocab() == s.model.question_vocab());
    CHECK(m.answer_vocab() == s.model.answer_vocab());
    CHECK(m.kb_tokens() == s.model.kb_tokens());
    REQUIRE(m.params().names() == s.model.params().names());
    for (std::size_t slot = 0; slot < m.params().size(); ++slot) {
      const auto x = m.params().value(static_cast<int>(slot)).data();
      const auto y = s.model.params().value(static_cast<int>(slot)).data();
      CHECK(std::equal(x.begin(), x.end(), y.begin()));
    }
    const auto b = s.batch();
    CHECK(batch_loss(m, b, c.l2, nullptr).loss == batch_loss(s.model, b, c.l2, nullptr).loss);
    CHECK(serialize_checkpoint(back) == serialize_checkpoint(ck));
  }
}

TEST_CASE("corrupted checkpoints are rejected") {
  Setup s;
  const std::string bytes = serialize_checkpoint(make_checkpoint(s.model, s.data.store));
  CHECK_NOTHROW(parse_checkpoint(bytes));

  SUBCASE("bad magic") {
    std::string b = bytes;
    b[0] = 'X';
    CHECK_THROWS_AS(parse_checkpoint(b), FormatError);
  }
  SUBCASE("version") {
    std::string b = bytes;
    b[8] = static_cast<char>(9);
    CHECK_THROWS_AS(parse_checkpoint(b), FormatError);
  }
  SUBCASE("truncation anywhere") {
    for (std::size_t n = 0; n < bytes.size(); n += 1 + bytes.size() / 300) {
      CHECK_THROWS_AS(parse_checkpoint(bytes.substr(0, n)), FormatError);
    }
  }
  SUBCASE("any flipped byte fails a checksum") {
    for (std::size_t i = 0; i < bytes.size(); i += 1 + bytes.size() / 300) {
      std::string b = bytes;
      b[i] = static_cast<char>(b[i] ^ 0x20);
      CHECK_THROWS_AS(parse_checkpoint(b), FormatError);
    }
  }
  SUBCASE("missing file") { CHECK_THROWS(load_checkpoint(temp_path("does_not_exist"))); }
}

TEST_CASE("non-finite losses abort training") {
  Config c = testing::tiny_config();
  c.epochs = 1;
  Setup s(c);
  const int slot = s.model.params().require("dec.out.b");
  s.model.params().value(slot)[0] = std::nan("");
  CHECK_THROWS_AS(train(s.model, s.examples, c), NumericError);
}
