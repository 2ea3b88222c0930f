// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace genqa {

/// Multi-pattern byte-string matcher. Reports every occurrence of every
/// pattern, overlapping ones included, in O(text + matches) after an
/// O(total pattern length) build.
class AhoCorasick {
 public:
  struct Match {
    int pattern = 0;
    std::size_t begin = 0;  ///< byte offset of the first character
    std::size_t end = 0;    ///< one past the last character

    bool operator==(const Match&) const = default;
    auto operator<=>(const Match&) const = default;
  };

  AhoCorasick() = default;
  /// Empty patterns are ignored. Duplicate patterns keep their own ids.
  explicit AhoCorasick(std::vector<std::string> patterns);

  const std::string& pattern(int id) const { return patterns_[id]; }
  std::size_t pattern_count() const { return patterns_.size(); }
  std::size_t state_count() const { return nodes_.size(); }

  /// Matches ordered by end offset, then by decreasing length.
  std::vector<Match> find_all(std::string_view text) const;

 private:
  struct Node {
    std::vector<std::pair<unsigned char, int>> next;  // sorted by byte
    int fail = 0;
    int dict = -1;  // nearest proper-suffix state that ends a pattern
    std::vector<int> outputs;
  };

  int child(int state, unsigned char c) const;
  int step(int state, unsigned char c) const;

  std::vector<std::string> patterns_;
  std::vector<Node> nodes_;
};

}  // namespace genqa
