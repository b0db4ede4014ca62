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

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>

#include "rsd/error.hpp"
#include "rsd/pool_builder.hpp"
#include "test_util.hpp"

using namespace rsd;

namespace {

EntityProfile entity(const std::string& id, std::vector<std::pair<std::string, std::string>> attrs) {
  EntityProfile e;
  e.entity_id = id;
  e.attributes = std::move(attrs);
  return e;
}

std::map<std::string, std::size_t> group_sizes(const std::vector<std::string>& ids) {
  std::map<std::string, std::size_t> out;
  for (const auto& g : ids) ++out[g];
  return out;
}

// Minimum objective over all 2-partitions, by enumeration.
double best_two_partition(const std::vector<std::vector<double>>& pts, unsigned& best_mask) {
  const std::size_t n = pts.size();
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
    double total = 0;
    for (int side = 0; side < 2; ++side) {
      std::vector<double> mean(pts[0].size(), 0.0);
      std::size_t count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (((mask >> i) & 1u) != static_cast<unsigned>(side)) continue;
        for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += pts[i][d];
        ++count;
      }
      for (auto& m : mean) m /= static_cast<double>(count);
      for (std::size_t i = 0; i < n; ++i) {
        if (((mask >> i) & 1u) != static_cast<unsigned>(side)) continue;
        for (std::size_t d = 0; d < mean.size(); ++d) total += (pts[i][d] - mean[d]) * (pts[i][d] - mean[d]);
      }
    }
    if (total < best) {
      best = total;
      best_mask = mask;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("k-means separates two obvious clusters") {
  const std::vector<std::vector<double>> pts{{0, 0}, {0, 1}, {10, 10}, {10, 11}};
  unsigned mask = 0;
  const double oracle = best_two_partition(pts, mask);
  CHECK(oracle == doctest::Approx(1.0));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = kmeans_cluster(pts, {2, seed, 100, 1e-9});
    CHECK(r.labels[0] == r.labels[1]);
    CHECK(r.labels[2] == r.labels[3]);
    CHECK(r.labels[0] != r.labels[2]);
    CHECK(r.objective_trace.back() == doctest::Approx(oracle));
  }
}

TEST_CASE("k-means with one group per point and with a single group") {
  const std::vector<std::vector<double>> pts{{1, 2}, {3, 5}, {-1, 0}};
  const auto each = kmeans_cluster(pts, {3, 4, 100, 1e-9});
  CHECK(std::set<std::size_t>(each.labels.begin(), each.labels.end()).size() == 3);
  CHECK(each.objective_trace.back() == 0.0);
  const auto one = kmeans_cluster(pts, {1, 4, 100, 1e-9});
  CHECK(one.centroids[0][0] == doctest::Approx(1.0));
  CHECK(one.centroids[0][1] == doctest::Approx(7.0 / 3.0));
}

TEST_CASE("k-means input errors") {
  CHECK_THROWS_AS(kmeans_cluster({}, {1, 0, 10, 1e-6}), Error);
  CHECK_THROWS_AS(kmeans_cluster({{0.0}}, {2, 0, 10, 1e-6}), Error);
}

TEST_CASE("k-means objective never increases and ends at a fixed assignment") {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = testing::uniform(rng, 3, 60);
    const std::size_t dim = testing::uniform(rng, 1, 5);
    std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
    for (auto& p : pts)
      for (auto& x : p) x = noise(rng) * 5.0;
    const auto r = kmeans_cluster(pts, {testing::uniform(rng, 1, std::min<std::size_t>(n, 6)), rng(), 100, 1e-9});
    for (std::size_t i = 1; i < r.objective_trace.size(); ++i) {
      CHECK(r.objective_trace[i] <= r.objective_trace[i - 1] + 1e-9);
    }
    for (std::size_t i = 0; i < n; ++i) {
      double own = 0;
      for (std::size_t d = 0; d < dim; ++d) own += std::pow(pts[i][d] - r.centroids[r.labels[i]][d], 2);
      for (const auto& c : r.centroids) {
        double other = 0;
        for (std::size_t d = 0; d < dim; ++d) other += std::pow(pts[i][d] - c[d], 2);
        CHECK(own <= other + 1e-12);
      }
    }
  }
}

TEST_CASE("attribute partition under the threshold") {
  std::vector<EntityProfile> es;
  for (int i = 0; i < 5; ++i) es.push_back(entity("a" + std::to_string(i), {{"category", "A"}, {"sub", "A1"}}));
  for (int i = 0; i < 3; ++i) es.push_back(entity("b" + std::to_string(i), {{"category", "B"}, {"sub", "B1"}}));
  CHECK(group_sizes(attribute_partition(es, 10)) == std::map<std::string, std::size_t>{{"A", 5}, {"B", 3}});
}

TEST_CASE("attribute partition recurses one level") {
  std::vector<EntityProfile> es;
  for (int i = 0; i < 7; ++i) es.push_back(entity("x" + std::to_string(i), {{"category", "A"}, {"sub", "A1"}}));
  for (int i = 0; i < 5; ++i) es.push_back(entity("y" + std::to_string(i), {{"category", "A"}, {"sub", "A2"}}));
  CHECK(group_sizes(attribute_partition(es, 10)) ==
        std::map<std::string, std::size_t>{{"A/A1", 7}, {"A/A2", 5}});
}

TEST_CASE("attribute partition stops when levels run out") {
  std::vector<EntityProfile> es;
  for (int i = 0; i < 12; ++i) es.push_back(entity("x" + std::to_string(i), {{"category", "A"}, {"sub", "A1"}}));
  CHECK(group_sizes(attribute_partition(es, 10)) == std::map<std::string, std::size_t>{{"A/A1", 12}});
  es.push_back(entity("bare", {}));
  CHECK_THROWS_AS(attribute_partition(es, 10), Error);
}

TEST_CASE("attribute partition is a partition with bounded groups") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<EntityProfile> es;
    const std::size_t n = testing::uniform(rng, 1, 80);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::pair<std::string, std::string>> attrs;
      const std::size_t levels = testing::uniform(rng, 1, 3);
      for (std::size_t l = 0; l < levels; ++l) {
        attrs.emplace_back("l" + std::to_string(l), "v" + std::to_string(testing::uniform(rng, 0, 2)));
      }
      es.push_back(entity("e" + std::to_string(i), attrs));
    }
    const std::size_t threshold = testing::uniform(rng, 1, 20);
    const auto groups = attribute_partition(es, threshold);
    REQUIRE(groups.size() == es.size());
    const auto sizes = group_sizes(groups);
    std::size_t total = 0;
    for (const auto& [g, s] : sizes) total += s;
    CHECK(total == n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto depth = static_cast<std::size_t>(std::count(groups[i].begin(), groups[i].end(), '/')) + 1;
      if (sizes.at(groups[i]) > threshold) {
        // Oversized only when no member of the group has a deeper level.
        for (std::size_t j = 0; j < n; ++j) {
          if (groups[j] == groups[i]) CHECK(es[j].attributes.size() <= depth);
        }
      }
    }
  }
}

TEST_CASE("router strategies") {
  EntityProfile cold;
  cold.interaction_count = 0;
  CHECK(route(cold, RouterStrategy::kDefaultThreshold) == PoolScheme::kAttribute);
  EntityProfile warm;
  warm.interaction_count = 500;
  warm.embedding = std::vector<double>{1.0, 2.0};
  CHECK(route(warm, RouterStrategy::kDefaultThreshold, 10) == PoolScheme::kCollaborative);
  warm.embedding.reset();
  CHECK(route(warm, RouterStrategy::kDefaultThreshold, 10) == PoolScheme::kAttribute);
  EntityProfile user;
  user.kind = EntityKind::kUser;
  CHECK(route(user, RouterStrategy::kByKind) == PoolScheme::kCollaborative);
  EntityProfile item;
  item.kind = EntityKind::kItem;
  CHECK(route(item, RouterStrategy::kByKind) == PoolScheme::kAttribute);
  CHECK(route(item, RouterStrategy::kFixedCollaborative) == PoolScheme::kCollaborative);
  CHECK(route(user, RouterStrategy::kFixedAttribute) == PoolScheme::kAttribute);
  CHECK(parse_router_strategy("by-kind") == RouterStrategy::kByKind);
  CHECK_THROWS_AS(parse_router_strategy("nearest"), Error);
}

TEST_CASE("pools hold each group's knowledge entries") {
  auto a = entity("a", {{"category", "A"}});
  a.old_knowledge = {{1, 2}, {3, 4}, {5}};
  auto b = entity("b", {{"category", "B"}});
  b.old_knowledge = {{6, 7}, {8}};
  const std::vector<EntityProfile> es{a, b};
  GroupAssignment asg{{"a", {PoolScheme::kAttribute, "g1"}}, {"b", {PoolScheme::kAttribute, "g2"}}};
  const auto pools = build_pools(es, asg, {16, 8, std::nullopt, 0});
  CHECK(pools.at("g1").size_entries() == 3);
  CHECK(pools.at("g2").size_entries() == 2);

  const auto capped = build_pools(es, asg, {16, 8, 1, 42});
  CHECK(capped.at("g1").size_entries() == 1);
  CHECK(build_pools(es, asg, {16, 8, 1, 42}).at("g1").serialize() == capped.at("g1").serialize());

  CHECK_THROWS_AS(build_pools(es, {{"a", {PoolScheme::kAttribute, "g1"}}}, {16, 8, std::nullopt, 0}), Error);
}

TEST_CASE("entity without knowledge yields an empty pool") {
  auto a = entity("a", {{"category", "A"}});
  const auto pools = build_pools({a}, {{"a", {PoolScheme::kAttribute, "g"}}}, {16, 8, std::nullopt, 0});
  CHECK(pools.at("g").size_entries() == 0);
  CHECK(retrieve_subtree(&pools.at("g"), nullptr, TokenSeq{1}).empty());
}

TEST_CASE("group assignment combines both schemes") {
  std::vector<EntityProfile> es;
  for (int i = 0; i < 6; ++i) {
    auto e = entity("u" + std::to_string(i), {{"category", i % 2 ? "A" : "B"}});
    e.interaction_count = 50;
    e.embedding = std::vector<double>{i < 3 ? 0.0 : 100.0, static_cast<double>(i)};
    es.push_back(e);
  }
  es.push_back(entity("cold", {{"category", "A"}}));
  GroupingOptions opt;
  opt.kmeans.num_groups = 2;
  const auto asg = assign_groups(es, opt);
  CHECK(asg.at("cold") == GroupLabel{PoolScheme::kAttribute, "attr/A"});
  CHECK(asg.at("u0").group_id == asg.at("u2").group_id);
  CHECK(asg.at("u3").group_id == asg.at("u5").group_id);
  CHECK(asg.at("u0").group_id != asg.at("u3").group_id);
  CHECK(assign_groups(es, opt) == asg);
  const auto rnd = assign_random_groups(es, 3, 9);
  CHECK(rnd == assign_random_groups(es, 3, 9));
  for (const auto& [id, label] : rnd) CHECK(label.group_id.rfind("random/", 0) == 0);
}
