// SPDX-License-Identifier: Apache-2.0
// Enumerable next-token models and an exhaustive decoding oracle.
#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <vector>

#include "genqa/inference.hpp"

namespace genqa::testing {

/// Each prefix gets its own random distribution (softmax of normal logits
/// with standard deviation `spread`), drawn lazily and memoized. The state
/// tensor carries the prefix so the model is a pure function of it. Token 0
/// is EOS.
class RandomPrefixModel : public StepModel {
 public:
  RandomPrefixModel(std::size_t vocab, std::uint64_t seed, double spread = 1.0)
      : vocab_(vocab), seed_(seed), spread_(spread) {}

  std::size_t vocab_size() const override { return vocab_; }
  int eos() const override { return 0; }
  Tensor initial_state() override { return Tensor(Shape{1}, -1.0); }

  std::vector<double> next(const Tensor& state, int prev, Tensor& next_state) override {
    std::vector<int> prefix = decode(state);
    if (prev >= 0) prefix.push_back(prev);
    std::vector<double> enc{-1.0};
    for (int t : prefix) enc.push_back(t);
    next_state = Tensor(Shape{enc.size()}, enc);
    return distribution(prefix);
  }

  const std::vector<double>& distribution(const std::vector<int>& prefix) {
    auto it = table_.find(prefix);
    if (it != table_.end()) return it->second;
    // seeded by (seed, prefix) so query order does not matter
    std::seed_seq seq(prefix.begin(), prefix.end());
    std::vector<std::uint32_t> mix(2);
    seq.generate(mix.begin(), mix.end());
    std::mt19937_64 rng(seed_ ^ (static_cast<std::uint64_t>(mix[0]) << 32 | mix[1]) ^
                        (0x9e3779b97f4a7c15ULL * (prefix.size() + 1)));
    std::normal_distribution<double> n(0.0, spread_);
    std::vector<double> p(vocab_);
    double z = 0.0;
    for (auto& v : p) z += (v = std::exp(n(rng)));
    for (auto& v : p) v /= z;
    return table_.emplace(prefix, std::move(p)).first->second;
  }

 private:
  static std::vector<int> decode(const Tensor& s) {
    std::vector<int> out;
    for (std::size_t i = 1; i < s.size(); ++i) out.push_back(static_cast<int>(s[i]));
    return out;
  }

  std::size_t vocab_;
  std::uint64_t seed_;
  double spread_;
  std::map<std::vector<int>, std::vector<double>> table_;
};

/// Every token equally likely.
class UniformModel : public StepModel {
 public:
  explicit UniformModel(std::size_t vocab) : vocab_(vocab) {}
  std::size_t vocab_size() const override { return vocab_; }
  int eos() const override { return 0; }
  Tensor initial_state() override { return Tensor(Shape{1}, 0.0); }
  std::vector<double> next(const Tensor& state, int, Tensor& next_state) override {
    next_state = state;
    return std::vector<double>(vocab_, 1.0 / static_cast<double>(vocab_));
  }

 private:
  std::size_t vocab_;
};

struct Scored {
  std::vector<int> tokens;
  double normalized = 0.0;
};

/// Best complete sequence by log-probability per token: sequences ending in
/// EOS, or reaching `max_len` without it. Ties go to the lexicographically
/// smaller sequence.
inline Scored exhaustive_best(RandomPrefixModel& m, std::size_t max_len) {
  Scored best{{}, -1e300};
  std::function<void(std::vector<int>&, double)> walk = [&](std::vector<int>& prefix, double lp) {
    const std::vector<double> p = m.distribution(prefix);
    for (std::size_t w = 0; w < p.size(); ++w) {
      prefix.push_back(static_cast<int>(w));
      const double l = lp + std::log(p[w]);
      if (static_cast<int>(w) == m.eos() || prefix.size() == max_len) {
        const double s = l / static_cast<double>(prefix.size());
        if (s > best.normalized || (s == best.normalized && prefix < best.tokens)) best = {prefix, s};
      } else {
        walk(prefix, l);
      }
      prefix.pop_back();
    }
  };
  std::vector<int> start;
  walk(start, 0.0);
  return best;
}

/// Greedy decoding: the most likely token at every step (lowest id on ties).
inline std::vector<int> greedy(StepModel& m, std::size_t max_len, double* log_prob) {
  std::vector<int> out;
  Tensor s = m.initial_state();
  int prev = -1;
  *log_prob = 0.0;
  while (out.size() < max_len) {
    Tensor ns;
    const auto p = m.next(s, prev, ns);
    std::size_t arg = 0;
    for (std::size_t w = 1; w < p.size(); ++w) {
      if (p[w] > p[arg]) arg = w;
    }
    *log_prob += std::log(p[arg]);
    out.push_back(static_cast<int>(arg));
    if (static_cast<int>(arg) == m.eos()) break;
    s = ns;
    prev = static_cast<int>(arg);
  }
  return out;
}

}  // namespace genqa::testing
