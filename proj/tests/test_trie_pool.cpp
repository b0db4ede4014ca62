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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "rsd/error.hpp"
#include "rsd/trie.hpp"
#include "test_util.hpp"

using namespace rsd;
using testing::PathCounts;

namespace {

std::uint32_t freq_at(const Trie& t, const TokenSeq& path) {
  const auto i = t.find(path);
  return i == Trie::kNone ? 0 : t.node(i).frequency;
}

TriePool pool_of(const std::vector<TokenSeq>& seqs, std::size_t vocab = 16) {
  TriePool p("g", vocab);
  for (const auto& s : seqs) p.insert(s);
  return p;
}

}  // namespace

TEST_CASE("two insertions share a counted prefix") {
  Trie t;
  t.insert(TokenSeq{1, 2, 3});
  t.insert(TokenSeq{1, 2, 4});
  CHECK(freq_at(t, {1}) == 2);
  CHECK(freq_at(t, {1, 2}) == 2);
  CHECK(freq_at(t, {1, 2, 3}) == 1);
  CHECK(freq_at(t, {1, 2, 4}) == 1);
  CHECK(t.node_count() == 4);
}

TEST_CASE("repeated insertion doubles counts without new nodes") {
  Trie t;
  t.insert(TokenSeq{3, 1, 2});
  t.insert(TokenSeq{3, 1, 2});
  CHECK(t.node_count() == 3);
  CHECK(freq_at(t, {3}) == 2);
  CHECK(freq_at(t, {3, 1, 2}) == 2);
}

TEST_CASE("single token insertion") {
  Trie t;
  t.insert(TokenSeq{7});
  REQUIRE(t.node(Trie::kRoot).children.size() == 1);
  CHECK(t.node(t.node(Trie::kRoot).children[0]).token == 7);
  CHECK(freq_at(t, {7}) == 1);
  CHECK_THROWS_AS(t.insert(TokenSeq{}), Error);
}

TEST_CASE("knowledge text insertion stores depth-capped suffixes") {
  TriePool p("g", 16, 3);
  p.insert_text(TokenSeq{1, 2, 3, 4});
  CHECK(p.size_entries() == 1);
  // Oracle: each suffix truncated to 3 tokens, inserted root-anchored.
  Trie expect;
  expect.insert(TokenSeq{1, 2, 3});
  expect.insert(TokenSeq{2, 3, 4});
  expect.insert(TokenSeq{3, 4});
  expect.insert(TokenSeq{4});
  CHECK(p.trie() == expect);
}

TEST_CASE("suffix feeder matches per-suffix insertion on random texts") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t depth = testing::uniform(rng, 1, 8);
    TriePool p("g", 6, depth);
    Trie expect;
    for (int k = 0; k < 3; ++k) {
      const auto text = testing::random_seq(rng, testing::uniform(rng, 1, 15), 0, 5);
      p.insert_text(text);
      for (std::size_t i = 0; i < text.size(); ++i) {
        const std::size_t len = std::min(depth, text.size() - i);
        expect.insert(TokenSpan(text).subspan(i, len));
      }
    }
    CHECK(p.trie() == expect);
  }
}

TEST_CASE("retrieval merges the pool with the overlay") {
  const auto p = pool_of({{1, 2, 3}, {1, 2, 4}});
  const auto t = retrieve_subtree(&p, nullptr, TokenSeq{1, 2}, 10);
  CHECK(testing::tree_paths(t) == PathCounts{{{3}, 1}, {{4}, 1}});
  CHECK(retrieve_subtree(&p, nullptr, TokenSeq{9, 9}, 10).empty());

  const auto q = pool_of({{1, 2, 3}});
  SessionOverlay o("s");
  o.insert(TokenSeq{1, 2, 5});
  const auto merged = retrieve_subtree(&q, &o, TokenSeq{1, 2}, 10);
  CHECK(testing::tree_paths(merged) == PathCounts{{{3}, 1}, {{5}, 1}});

  o.insert(TokenSeq{1, 2, 3, 6});
  const auto summed = retrieve_subtree(&q, &o, TokenSeq{1, 2});
  CHECK(testing::tree_paths(summed) == PathCounts{{{3}, 2}, {{5}, 1}, {{3, 6}, 1}});
}

TEST_CASE("unpruned retrieval equals the continuation oracle") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<TokenSeq> stored;
    const std::size_t n = testing::uniform(rng, 1, 60);
    for (std::size_t i = 0; i < n; ++i) stored.push_back(testing::random_seq(rng, testing::uniform(rng, 1, 20), 0, 4));
    const auto p = pool_of(stored, 5);
    const auto prefix = testing::random_seq(rng, testing::uniform(rng, 1, 3), 0, 4);
    CHECK(testing::tree_paths(retrieve_subtree(&p, nullptr, prefix)) == testing::oracle_continuations(stored, prefix));
  }
}

TEST_CASE("pruning keeps the best frequencies under the parent rule") {
  // a=1 (5) -> d=4 (5); b=2 (2).
  DraftTree t;
  const auto a = t.add_child(0, 1, 5);
  t.add_child(a, 4, 5);
  t.add_child(0, 2, 2);
  const auto kept = prune_top_frequency(t, 2);
  CHECK(testing::tree_paths(kept) == PathCounts{{{1}, 5}, {{1, 4}, 5}});
  CHECK(prune_top_frequency(t, 3) == t);
  CHECK(prune_top_frequency(t, 10) == t);
}

TEST_CASE("pruning ties go to the lowest token") {
  DraftTree t;
  t.add_child(0, 8, 1);
  t.add_child(0, 3, 1);
  t.add_child(0, 5, 1);
  const auto kept = prune_top_frequency(t, 1);
  CHECK(testing::tree_paths(kept) == PathCounts{{{3}, 1}});
}

TEST_CASE("pruned trees are connected, bounded and frequency monotone") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<TokenSeq> stored;
    for (int i = 0; i < 40; ++i) stored.push_back(testing::random_seq(rng, testing::uniform(rng, 2, 12), 0, 3));
    const auto p = pool_of(stored, 4);
    const auto full = retrieve_subtree(&p, nullptr, TokenSeq{static_cast<TokenId>(trial % 4)});
    const std::size_t k = testing::uniform(rng, 1, 20);
    const auto pruned = prune_top_frequency(full, k);
    CHECK(pruned.size() <= k);
    const auto fp = testing::tree_paths(full);
    for (const auto& [path, f] : testing::tree_paths(pruned)) {
      REQUIRE(fp.count(path) == 1);
      CHECK(fp.at(path) == f);
    }
    for (std::size_t i = 1; i <= pruned.size(); ++i) {
      const auto& node = pruned.node(i);
      if (node.parent > 0) CHECK(pruned.node(static_cast<std::size_t>(node.parent)).frequency >= node.frequency);
    }
  }
}

TEST_CASE("dropping the overlay leaves the pool untouched") {
  const auto p = pool_of({{1, 2, 3}});
  const auto before = p.serialize();
  const auto base = retrieve_subtree(&p, nullptr, TokenSeq{1});
  SessionOverlay o("s", 8);
  o.append(TokenSeq{7, 8, 9});
  CHECK_FALSE(retrieve_subtree(&p, &o, TokenSeq{7, 8}).empty());
  o.drop();
  CHECK(retrieve_subtree(&p, &o, TokenSeq{7, 8}).empty());
  CHECK(retrieve_subtree(&p, &o, TokenSeq{1}) == base);
  CHECK(p.serialize() == before);
  SessionOverlay empty;
  empty.drop();
  CHECK(empty.trie().empty());
}

TEST_CASE("pool serialization round trips byte for byte") {
  std::mt19937_64 rng(4);
  TriePool p("attr/c0", 50, 6);
  for (int i = 0; i < 30; ++i) p.insert_text(testing::random_seq(rng, testing::uniform(rng, 1, 25), 0, 49));
  const auto bytes = p.serialize();
  std::istringstream in(bytes);
  const auto q = TriePool::read(in);
  CHECK(q == p);
  CHECK(q.serialize() == bytes);

  const auto path = std::filesystem::temp_directory_path() / "rsd_pool_rt.trie";
  p.save(path);
  CHECK(TriePool::load(path) == p);
  std::filesystem::resize_file(path, bytes.size() - 7);
  CHECK_THROWS_AS(TriePool::load(path), Error);
  std::filesystem::remove(path);
}

TEST_CASE("pool rejects out-of-vocabulary tokens") {
  TriePool p("g", 4);
  try {
    p.insert_text(TokenSeq{1, 4});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInput);
  }
  CHECK(p.trie().empty());
}
