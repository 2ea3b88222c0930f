// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>

#include "doctest.h"
#include "genqa/errors.hpp"
#include "genqa/interpreter.hpp"
#include "gradcheck.hpp"

using namespace genqa;

namespace {

double sigm(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Plain-loop GRU step, written from the gate equations.
std::vector<double> reference_step(const ParameterSet& p, const GruSlots& g,
                                   const std::vector<double>& x, const std::vector<double>& h) {
  const std::size_t H = g.hidden, in = g.input;
  const Tensor& wx = p.value(g.w_x);
  const Tensor& uzr = p.value(g.u_zr);
  const Tensor& uh = p.value(g.u_h);
  const Tensor& b = p.value(g.b);
  auto proj = [&](std::size_t r) {
    double s = b[r];
    for (std::size_t c = 0; c < in; ++c) s += wx.at(r, c) * x[c];
    return s;
  };
  std::vector<double> z(H), r(H), out(H);
  for (std::size_t i = 0; i < H; ++i) {
    double sz = proj(i), sr = proj(H + i);
    for (std::size_t c = 0; c < H; ++c) {
      sz += uzr.at(i, c) * h[c];
      sr += uzr.at(H + i, c) * h[c];
    }
    z[i] = sigm(sz);
    r[i] = sigm(sr);
  }
  for (std::size_t i = 0; i < H; ++i) {
    double s = proj(2 * H + i);
    for (std::size_t c = 0; c < H; ++c) s += uh.at(i, c) * r[c] * h[c];
    out[i] = (1.0 - z[i]) * h[i] + z[i] * std::tanh(s);
  }
  return out;
}

struct Fixture {
  ParameterSet params;
  EncoderSlots slots;
  std::size_t E = 4, H = 3;

  Fixture() {
    std::mt19937_64 rng(5);
    slots.embedding = params.add("embed", glorot_uniform(Shape{9, E}, rng));
    slots.forward = register_gru(params, "enc.fwd", E, H, rng);
    slots.backward = register_gru(params, "enc.bwd", E, H, rng);
    // nonzero biases so the check covers them
    for (int s : {slots.forward.b, slots.backward.b}) {
      std::uniform_real_distribution<double> u(-0.3, 0.3);
      for (std::size_t i = 0; i < params.value(s).size(); ++i) params.value(s)[i] = u(rng);
    }
  }
};

}  // namespace

TEST_CASE("gru step matches the gate equations") {
  Fixture f;
  const GruSlots& g = f.slots.forward;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(f.E), h(f.H);
    for (auto& v : x) v = n(rng);
    for (auto& v : h) v = n(rng);
    Tape tape(&f.params);
    Var xs = tape.constant(Tensor::matrix(1, f.E, x));
    Var proj = reshape(gru_project(tape, g, xs), Shape{3 * f.H});
    Var out = gru_step(tape, g, proj, tape.constant(Tensor::vector(h)));
    const auto want = reference_step(f.params, g, x, h);
    for (std::size_t i = 0; i < f.H; ++i) CHECK(out.value()[i] == doctest::Approx(want[i]).epsilon(1e-12));
  }
}

TEST_CASE("encoder runs both directions from zero states") {
  Fixture f;
  const std::vector<int> ids{4, 7, 5, 8};
  Tape tape(&f.params);
  EncodedQuestion q = encode(tape, f.slots, ids);
  REQUIRE(q.contextual.shape() == Shape{ids.size(), 2 * f.H});
  CHECK(q.embeddings.shape() == Shape{ids.size(), f.E});
  CHECK(q.length() == ids.size());

  auto emb = [&](int id) {
    std::vector<double> r(f.E);
    for (std::size_t c = 0; c < f.E; ++c) r[c] = f.params.value(f.slots.embedding).at(id, c);
    return r;
  };
  std::vector<double> h(f.H, 0.0);
  for (std::size_t t = 0; t < ids.size(); ++t) {
    h = reference_step(f.params, f.slots.forward, emb(ids[t]), h);
    for (std::size_t i = 0; i < f.H; ++i) {
      CHECK(q.contextual.value().at(t, i) == doctest::Approx(h[i]).epsilon(1e-12));
    }
  }
  std::fill(h.begin(), h.end(), 0.0);
  for (std::size_t t = ids.size(); t-- > 0;) {
    h = reference_step(f.params, f.slots.backward, emb(ids[t]), h);
    for (std::size_t i = 0; i < f.H; ++i) {
      CHECK(q.contextual.value().at(t, f.H + i) == doctest::Approx(h[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("encoder gradients match finite differences") {
  Fixture f;
  const std::vector<int> ids{4, 7, 4, 8, 6};
  auto loss = [&](Tape& tape) {
    EncodedQuestion q = encode(tape, f.slots, ids);
    // weighted sum so every position matters differently
    Tensor w(q.contextual.shape());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::sin(0.7 * static_cast<double>(i) + 0.3);
    return sum(mul(q.contextual, tape.constant(w)));
  };
  auto report = testing::check_parameter_gradients(
      f.params,
      [&](Gradients& g) {
        Tape tape(&f.params, &g);
        tape.backward(loss(tape));
      },
      [&] {
        Tape tape(&f.params, nullptr, false);
        return loss(tape).value().item();
      });
  CHECK(report.checked > 0);
  CHECK_MESSAGE(report.max_rel_error < 1e-6, report.worst);
}

TEST_CASE("single token question") {
  Fixture f;
  Tape tape(&f.params);
  EncodedQuestion q = encode(tape, f.slots, {5});
  CHECK(q.contextual.shape() == Shape{1, 2 * f.H});
}

TEST_CASE("empty question is rejected") {
  Fixture f;
  Tape tape(&f.params);
  CHECK_THROWS_AS(encode(tape, f.slots, {}), InvalidArgument);
}

TEST_CASE("find_gru recovers registered slots") {
  Fixture f;
  GruSlots g = find_gru(f.params, "enc.bwd");
  CHECK(g.w_x == f.slots.backward.w_x);
  CHECK(g.u_h == f.slots.backward.u_h);
  CHECK(g.input == f.E);
  CHECK(g.hidden == f.H);
  CHECK_THROWS(find_gru(f.params, "nope"));
}
