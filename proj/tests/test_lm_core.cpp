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
#include <fstream>
#include <cmath>
#include <random>

#include "rsd/draft.hpp"
#include "rsd/error.hpp"
#include "rsd/ngram_model.hpp"
#include "test_util.hpp"

using namespace rsd;
namespace fs = std::filesystem;

namespace {

NGramModel bigram_example() { return NGramModel::fit({{1, 2, 3}, {1, 2, 4}}, {2, 1.0, 5}); }

LinearDraft chain(std::initializer_list<TokenId> tokens) {
  DraftTree t;
  std::size_t at = 0;
  for (TokenId x : tokens) at = t.add_child(at, x, 1);
  return linearize(t);
}

}  // namespace

TEST_CASE("distribution argmax breaks ties to the lowest id") {
  Distribution d({0.2, 0.4, 0.4});
  CHECK(d.argmax() == 1);
  CHECK(d.rank_of(1) == 0);
  CHECK(d.rank_of(2) == 1);
  CHECK(d.rank_of(0) == 2);
  CHECK(d.in_top_k(2, 2));
  CHECK_FALSE(d.in_top_k(0, 2));
}

TEST_CASE("bigram probability matches the hand count") {
  const auto m = bigram_example();
  const TokenSeq ctx{1, 2};
  // count(2,3)=1, count(2)=2, V=5, alpha=1.
  CHECK(m.next_distribution(ctx)[3] == doctest::Approx(2.0 / 7.0).epsilon(1e-12));
  CHECK(m.next_distribution(ctx)[4] == doctest::Approx(2.0 / 7.0).epsilon(1e-12));
  CHECK(m.next_distribution(ctx)[0] == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("empty corpus yields uniform") {
  const auto m = NGramModel::fit({}, {3, 1.0, 8});
  for (const TokenSeq& ctx : {TokenSeq{}, TokenSeq{1}, TokenSeq{3, 4, 5}}) {
    const auto d = m.next_distribution(ctx);
    for (double p : d.dense()) CHECK(p == doctest::Approx(1.0 / 8.0));
  }
}

TEST_CASE("vanishing alpha approaches the empirical frequency") {
  const auto m = NGramModel::fit({{1, 1, 1, 1}}, {2, 1e-9, 4});
  CHECK(std::abs(m.next_distribution(TokenSeq{1})[1] - 1.0) < 1e-6);
}

TEST_CASE("only the Markov window conditions the output") {
  const auto m = bigram_example();
  CHECK(m.next_distribution(TokenSeq{4, 1, 2}) == m.next_distribution(TokenSeq{1, 2}));
}

TEST_CASE("unseen context is uniform and outputs are normalized") {
  const auto m = bigram_example();
  const auto d = m.next_distribution(TokenSeq{0});
  for (double p : d.dense()) CHECK(p == doctest::Approx(0.2));
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const auto model = testing::random_model(rng, 1 + i % 4, 12, 10, 0.5);
    const auto dist = model.next_distribution(testing::random_seq(rng, i % 6, 0, 11));
    CHECK(std::abs(dist.sum() - 1.0) < 1e-9);
    for (double p : dist.dense()) CHECK(p >= 0.0);
  }
}

TEST_CASE("short contexts use the shorter table") {
  // Trigram model; a one-token context conditions on the bigram counts.
  const auto m = NGramModel::fit({{1, 2, 3}, {1, 2, 4}, {5, 2, 3}}, {3, 1.0, 6});
  // count(2)=3 as a one-token context, count(2,3)=2.
  CHECK(m.next_distribution(TokenSeq{2})[3] == doctest::Approx(3.0 / 9.0));
  // Empty context uses unigram counts: 9 tokens total, token 2 seen 3 times.
  CHECK(m.next_distribution(TokenSeq{})[2] == doctest::Approx(4.0 / 15.0));
}

TEST_CASE("fit rejects out-of-range tokens naming the sequence") {
  try {
    NGramModel::fit({{1, 2}, {1, 9}}, {2, 1.0, 5});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInput);
    CHECK(std::string(e.what()).find("sequence 1") != std::string::npos);
  }
  CHECK_THROWS_AS(bigram_example().next_distribution(TokenSeq{7}), Error);
}

TEST_CASE("fit is deterministic and survives a file round trip") {
  std::mt19937_64 rng(11);
  const auto a = testing::random_model(rng, 3, 20, 30, 0.1);
  rng.seed(11);
  const auto b = testing::random_model(rng, 3, 20, 30, 0.1);
  CHECK(a == b);
  const auto path = fs::temp_directory_path() / "rsd_lm_roundtrip.bin";
  a.save(path);
  const auto c = NGramModel::load(path);
  CHECK(c == a);
  for (int i = 0; i < 20; ++i) {
    const auto ctx = testing::random_seq(rng, i % 5, 0, 19);
    CHECK(c.next_distribution(ctx) == a.next_distribution(ctx));
  }
  fs::remove(path);
}

TEST_CASE("corrupt model file is a data error") {
  const auto path = fs::temp_directory_path() / "rsd_lm_corrupt.bin";
  bigram_example().save(path);
  fs::resize_file(path, fs::file_size(path) / 2);
  CHECK_THROWS_AS(NGramModel::load(path), Error);
  fs::remove(path);
}

TEST_CASE("token sequence reader") {
  const auto path = fs::temp_directory_path() / "rsd_lm_seqs.jsonl";
  {
    std::ofstream(path) << "[1,2,3]\n\n[4]\n";
  }
  CHECK(read_token_sequences(path) == std::vector<TokenSeq>{{1, 2, 3}, {4}});
  {
    std::ofstream(path) << "[1,2]\n{\"x\":1}\n";
  }
  try {
    read_token_sequences(path);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kData);
  }
  fs::remove(path);
  try {
    read_token_sequences(path);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConfig);
  }
}

TEST_CASE("single branch tree evaluation is sequential") {
  const auto m = bigram_example();
  const TokenSeq ctx{1};
  const auto out = m.evaluate_tree(ctx, chain({2, 3}));
  REQUIRE(out.size() == 3);
  CHECK(out[0] == m.next_distribution(TokenSeq{1}));
  CHECK(out[1] == m.next_distribution(TokenSeq{1, 2}));
  CHECK(out[2] == m.next_distribution(TokenSeq{1, 2, 3}));
}

TEST_CASE("siblings never see each other") {
  const auto m = NGramModel::fit({{1, 2, 3, 4}, {2, 4, 4}, {3, 1}}, {3, 1.0, 5});
  DraftTree t;
  const auto a = t.add_child(0, 1, 1);
  t.add_child(a, 2, 1);
  t.add_child(a, 3, 1);
  const auto ld = linearize(t);  // [1, 2, 3]
  const TokenSeq ctx{4};
  const auto out = m.evaluate_tree(ctx, ld);
  CHECK(out[2] == m.next_distribution(TokenSeq{4, 1, 2}));
  CHECK(out[3] == m.next_distribution(TokenSeq{4, 1, 3}));
}

TEST_CASE("random trees evaluate bit-identically to sequential calls") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = testing::random_model(rng, 2 + trial % 3, 10, 12, 0.3);
    const auto tree = testing::random_tree(rng, testing::uniform(rng, 1, 10), 0, 9);
    const auto ld = linearize(tree);
    const auto ctx = testing::random_seq(rng, testing::uniform(rng, 1, 5), 0, 9);
    const auto out = m.evaluate_tree(ctx, ld);
    REQUIRE(out.size() == ld.size() + 1);
    CHECK(out[0] == m.next_distribution(ctx));
    const auto paths = ancestor_paths(ld);
    for (std::size_t i = 0; i < ld.size(); ++i) {
      TokenSeq full = ctx;
      full.insert(full.end(), paths[i].begin(), paths[i].end());
      CHECK(out[i + 1] == m.next_distribution(full));
    }
  }
}

TEST_CASE("malformed masks are structural errors") {
  const auto m = bigram_example();
  auto ld = chain({1, 2, 3});
  ld.mask.set(2, 1, false);  // node 2 loses its parent, keeps grandparent
  try {
    m.evaluate_tree(TokenSeq{1}, ld);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kStructure);
  }
  auto fwd = chain({1, 2});
  fwd.mask.set(0, 1);  // attends to a later node
  CHECK_THROWS_AS(m.evaluate_tree(TokenSeq{1}, fwd), Error);
  auto pos = chain({1, 2});
  pos.positions[1] = 0;
  CHECK_THROWS_AS(m.evaluate_tree(TokenSeq{1}, pos), Error);
}

TEST_CASE("sparse and dense distributions agree on every query") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t v = testing::uniform(rng, 1, 9);
    const double floor = u(rng) < 0.3 ? 0.0 : std::floor(u(rng) * 4) / 8;
    std::vector<Distribution::Entry> entries;
    for (std::size_t t = 0; t < v; ++t) {
      if (u(rng) < 0.5) entries.emplace_back(static_cast<TokenId>(t), std::floor(u(rng) * 4) / 8);
    }
    const Distribution sparse(v, floor, entries);
    const Distribution dense(sparse.dense());
    CHECK(sparse == dense);
    // Reference argmax and rank over the dense vector.
    const auto p = sparse.dense();
    std::size_t best = 0;
    for (std::size_t i = 1; i < v; ++i) {
      if (p[i] > p[best]) best = i;
    }
    CHECK(sparse.argmax() == static_cast<TokenId>(best));
    CHECK(dense.argmax() == static_cast<TokenId>(best));
    for (std::size_t t = 0; t < v; ++t) {
      std::size_t ahead = 0;
      for (std::size_t i = 0; i < v; ++i) ahead += p[i] > p[t] || (p[i] == p[t] && i < t);
      CHECK(sparse.rank_of(static_cast<TokenId>(t)) == ahead);
      CHECK(dense.rank_of(static_cast<TokenId>(t)) == ahead);
      CHECK(sparse[static_cast<TokenId>(t)] == p[t]);
    }
  }
}
