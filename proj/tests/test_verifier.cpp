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

#include <random>

#include "rsd/draft.hpp"
#include "rsd/error.hpp"
#include "rsd/verifier.hpp"
#include "test_util.hpp"

using namespace rsd;

namespace {

// One-hot-ish distribution over V tokens peaking at `top`.
Distribution peaked(std::size_t v, TokenId top) {
  std::vector<double> p(v, 0.5 / static_cast<double>(v - 1));
  p[static_cast<std::size_t>(top)] = 0.5;
  return Distribution(std::move(p));
}

DraftTree tree_of(const std::vector<TokenSeq>& branches) {
  DraftTree t;
  for (const auto& b : branches) {
    std::size_t at = 0;
    for (TokenId x : b) {
      std::size_t next = 0;
      for (std::size_t c : t.node(at).children) {
        if (t.node(c).token == x) next = c;
      }
      at = next != 0 ? next : t.add_child(at, x, 1);
    }
  }
  return t;
}

}  // namespace

TEST_CASE("accept_token on the worked distributions") {
  const Distribution d({0.1, 0.7, 0.2});
  CHECK(accept_token(1, d, VerificationPolicy::greedy()));
  CHECK_FALSE(accept_token(2, d, VerificationPolicy::greedy()));
  CHECK(accept_token(2, d, VerificationPolicy::relaxed(2, 0.1)));
  const Distribution e({0.05, 0.9, 0.05});
  CHECK_FALSE(accept_token(2, e, VerificationPolicy::relaxed(2, 0.1)));
}

TEST_CASE("topk and topp follow their single conditions") {
  const Distribution d({0.05, 0.6, 0.3, 0.05});
  const VerificationPolicy topk{VerifyMode::kTopK, 2, 0.1};
  const VerificationPolicy topp{VerifyMode::kTopP, 2, 0.1};
  CHECK(accept_token(2, d, topk));
  CHECK_FALSE(accept_token(0, d, topk));
  CHECK(accept_token(2, d, topp));
  CHECK_FALSE(accept_token(3, d, topp));
  // Boundary tie: tokens 0 and 3 share rank; the lower id takes the slot.
  const Distribution tie({0.2, 0.6, 0.0, 0.2});
  const VerificationPolicy top2{VerifyMode::kTopK, 2, 0.0};
  CHECK(accept_token(0, tie, top2));
  CHECK_FALSE(accept_token(3, tie, top2));
  // The argmax passes topp even below the threshold.
  const Distribution flat({0.25, 0.25, 0.25, 0.25});
  CHECK(accept_token(0, flat, {VerifyMode::kTopP, 2, 0.5}));
  CHECK_FALSE(accept_token(1, flat, {VerifyMode::kTopP, 2, 0.5}));
}

TEST_CASE("single branch with a rejected second token") {
  const auto d = linearize(tree_of({{1, 2}}));
  const std::vector<Distribution> dists{peaked(5, 1), peaked(5, 3), peaked(5, 4)};
  const auto out = verify_branches(d, dists, VerificationPolicy::greedy());
  CHECK(out.accepted_tokens == TokenSeq{1});
  CHECK(out.accepted_count == 1);
  CHECK(out.correction_token == 3);
  CHECK(out.accepted_branch == std::optional<std::size_t>{0});
}

TEST_CASE("the longest accepted branch wins") {
  // a=1 b=2 c=3 d=4; nodes [a,b,c,d]; dists[i+1] follows node i.
  const auto d = linearize(tree_of({{1, 2}, {1, 3, 4}}));
  const std::vector<Distribution> dists{peaked(6, 1), peaked(6, 3), peaked(6, 0), peaked(6, 4), peaked(6, 5)};
  const auto out = verify_branches(d, dists, VerificationPolicy::greedy());
  CHECK(out.accepted_tokens == TokenSeq{1, 3, 4});
  CHECK(out.accepted_branch == std::optional<std::size_t>{1});
  CHECK(out.correction_token == 5);
}

TEST_CASE("equal lengths go to the earliest branch") {
  const auto d = linearize(tree_of({{1, 2}, {1, 3}}));
  // Both 2 and 3 accepted under relaxed.
  const Distribution after_a({0.0, 0.0, 0.5, 0.4, 0.1});
  const std::vector<Distribution> dists{peaked(5, 1), after_a, peaked(5, 0), peaked(5, 4)};
  const auto out = verify_branches(d, dists, VerificationPolicy::relaxed());
  CHECK(out.accepted_tokens == TokenSeq{1, 2});
  CHECK(out.accepted_branch == std::optional<std::size_t>{0});
  CHECK(out.correction_token == 0);
}

TEST_CASE("full rejection still emits the correction") {
  const auto d = linearize(tree_of({{2}, {3, 4}}));
  const std::vector<Distribution> dists{peaked(5, 1), peaked(5, 0), peaked(5, 0), peaked(5, 0)};
  const auto out = verify_branches(d, dists, VerificationPolicy::greedy());
  CHECK(out.accepted_tokens.empty());
  CHECK_FALSE(out.accepted_branch.has_value());
  CHECK(out.correction_token == 1);
}

TEST_CASE("distribution count mismatch is a structural error") {
  const auto d = linearize(tree_of({{1, 2}}));
  const std::vector<Distribution> dists{peaked(5, 1), peaked(5, 2)};
  try {
    verify_branches(d, dists, VerificationPolicy::greedy());
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kStructure);
  }
}

TEST_CASE("policy names and validation") {
  for (auto m : {VerifyMode::kGreedy, VerifyMode::kTopK, VerifyMode::kTopP, VerifyMode::kRelaxed}) {
    CHECK(parse_verify_mode(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_verify_mode("top1"), Error);
  CHECK_THROWS_AS((VerificationPolicy{VerifyMode::kRelaxed, 0, 0.1}.validate()), Error);
  CHECK_THROWS_AS((VerificationPolicy{VerifyMode::kRelaxed, 2, 1.5}.validate()), Error);
}

TEST_CASE("relaxed with k=1 and p=0 reduces to greedy") {
  std::mt19937_64 rng(99);
  const VerificationPolicy reduced = VerificationPolicy::relaxed(1, 0.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t v = testing::uniform(rng, 2, 6);
    const auto d = linearize(testing::random_tree(rng, testing::uniform(rng, 1, 12), 0, static_cast<TokenId>(v - 1)));
    std::vector<Distribution> dists;
    for (std::size_t i = 0; i <= d.size(); ++i) dists.push_back(testing::random_distribution(rng, v));
    const auto greedy = verify_branches(d, dists, VerificationPolicy::greedy());
    CHECK(verify_branches(d, dists, reduced) == greedy);
    CHECK(greedy.accepted_tokens.size() + 1 >= 1);
  }
}

TEST_CASE("acceptance is monotone in k and anti-monotone in p") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto dist = testing::random_distribution(rng, 6);
    for (TokenId t = 0; t < 6; ++t) {
      for (double p : {0.0, 0.05, 0.1, 0.2, 0.5}) {
        for (std::size_t k = 1; k < 6; ++k) {
          const bool a = accept_token(t, dist, VerificationPolicy::relaxed(k, p));
          if (a) CHECK(accept_token(t, dist, VerificationPolicy::relaxed(k + 1, p)));
          if (a && p > 0.0) CHECK(accept_token(t, dist, VerificationPolicy::relaxed(k, p / 2)));
        }
      }
    }
  }
}
