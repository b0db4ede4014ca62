// Copyright 2026 The rsd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Shared generators and brute-force oracles for the test suites.
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "rsd/ngram_model.hpp"
#include "rsd/trie.hpp"
#include "rsd/types.hpp"

namespace rsd::testing {

inline TokenSeq random_seq(std::mt19937_64& rng, std::size_t len, TokenId lo, TokenId hi) {
  std::uniform_int_distribution<TokenId> tok(lo, hi);
  TokenSeq s(len);
  for (auto& t : s) t = tok(rng);
  return s;
}

inline std::size_t uniform(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// Random tree of exactly n nodes over tokens [lo, hi]; siblings distinct.
inline DraftTree random_tree(std::mt19937_64& rng, std::size_t n, TokenId lo, TokenId hi) {
  DraftTree tree;
  while (tree.size() < n) {
    const std::size_t parent = uniform(rng, 0, tree.size());
    const TokenId t = std::uniform_int_distribution<TokenId>(lo, hi)(rng);
    bool taken = false;
    for (std::size_t c : tree.node(parent).children) taken = taken || tree.node(c).token == t;
    if (!taken) tree.add_child(parent, t, uniform(rng, 1, 9));
  }
  return tree;
}

// Continuation multiset oracle: every stored sequence that starts with
// `prefix` contributes each prefix of its continuation once.
using PathCounts = std::map<TokenSeq, std::uint64_t>;

inline PathCounts oracle_continuations(const std::vector<TokenSeq>& stored, TokenSpan prefix) {
  PathCounts out;
  for (const auto& s : stored) {
    if (s.size() < prefix.size() || !std::equal(prefix.begin(), prefix.end(), s.begin())) continue;
    TokenSeq path;
    for (std::size_t i = prefix.size(); i < s.size(); ++i) {
      path.push_back(s[i]);
      ++out[path];
    }
  }
  return out;
}

inline PathCounts tree_paths(const DraftTree& tree) {
  PathCounts out;
  std::vector<std::pair<std::size_t, TokenSeq>> stack{{0, {}}};
  while (!stack.empty()) {
    auto [node, path] = stack.back();
    stack.pop_back();
    for (std::size_t c : tree.node(node).children) {
      TokenSeq p = path;
      p.push_back(tree.node(c).token);
      out[p] = tree.node(c).frequency;
      stack.emplace_back(c, std::move(p));
    }
  }
  return out;
}

// Random distribution over v tokens with some exact zeros and, at times,
// a tie between ids 0 and 1 to exercise the lowest-id rule.
inline Distribution random_distribution(std::mt19937_64& rng, std::size_t v) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(v);
  double s = 0;
  for (auto& x : p) s += (x = u(rng) < 0.2 ? 0.0 : u(rng));
  if (s == 0) {
    p[0] = 1;
    s = 1;
  }
  if (u(rng) < 0.3 && v > 1 && p[0] > 0.0) {
    s += p[0] - p[1];
    p[1] = p[0];
  }
  for (auto& x : p) x /= s;
  return Distribution(std::move(p));
}

inline NGramModel random_model(std::mt19937_64& rng, std::size_t order, std::size_t vocab,
                               std::size_t sequences, double alpha) {
  std::vector<TokenSeq> corpus;
  for (std::size_t i = 0; i < sequences; ++i) {
    corpus.push_back(random_seq(rng, uniform(rng, 2, 30), 1, static_cast<TokenId>(vocab - 1)));
  }
  return NGramModel::fit(corpus, {order, alpha, vocab});
}

}  // namespace rsd::testing
