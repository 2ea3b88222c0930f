// SPDX-License-Identifier: Apache-2.0
#include "genqa/aho_corasick.hpp"

#include <algorithm>
#include <queue>

namespace genqa {

AhoCorasick::AhoCorasick(std::vector<std::string> patterns) : patterns_(std::move(patterns)) {
  nodes_.emplace_back();
  for (std::size_t p = 0; p < patterns_.size(); ++p) {
    const std::string& pat = patterns_[p];
    if (pat.empty()) continue;
    int state = 0;
    for (unsigned char c : pat) {
      int nxt = child(state, c);
      if (nxt < 0) {
        nxt = static_cast<int>(nodes_.size());
        auto& edges = nodes_[state].next;
        auto pos = std::lower_bound(edges.begin(), edges.end(), std::make_pair(c, 0));
        edges.insert(pos, {c, nxt});
        nodes_.emplace_back();
      }
      state = nxt;
    }
    nodes_[state].outputs.push_back(static_cast<int>(p));
  }

  // Breadth-first failure links; a node's fail target is always shallower.
  std::queue<int> frontier;
  for (auto [c, s] : nodes_[0].next) {
    nodes_[s].fail = 0;
    frontier.push(s);
  }
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (auto [c, v] : nodes_[u].next) {
      int f = nodes_[u].fail;
      while (f != 0 && child(f, c) < 0) f = nodes_[f].fail;
      const int target = child(f, c);
      nodes_[v].fail = (target >= 0 && target != v) ? target : 0;
      const int fv = nodes_[v].fail;
      nodes_[v].dict = nodes_[fv].outputs.empty() ? nodes_[fv].dict : fv;
      frontier.push(v);
    }
  }
}

int AhoCorasick::child(int state, unsigned char c) const {
  const auto& edges = nodes_[state].next;
  auto it = std::lower_bound(edges.begin(), edges.end(), std::make_pair(c, 0));
  if (it != edges.end() && it->first == c) return it->second;
  return -1;
}

int AhoCorasick::step(int state, unsigned char c) const {
  for (;;) {
    const int nxt = child(state, c);
    if (nxt >= 0) return nxt;
    if (state == 0) return 0;
    state = nodes_[state].fail;
  }
}

std::vector<AhoCorasick::Match> AhoCorasick::find_all(std::string_view text) const {
  std::vector<Match> out;
  if (nodes_.empty()) return out;
  int state = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    state = step(state, static_cast<unsigned char>(text[i]));
    // Outputs along the dictionary-suffix chain are reported longest first.
    for (int s = nodes_[state].outputs.empty() ? nodes_[state].dict : state; s > 0;
         s = nodes_[s].dict) {
      for (int p : nodes_[s].outputs) {
        const std::size_t len = patterns_[p].size();
        out.push_back(Match{p, i + 1 - len, i + 1});
      }
    }
  }
  return out;
}

}  // namespace genqa
