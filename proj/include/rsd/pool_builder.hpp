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

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rsd/trie.hpp"
#include "rsd/types.hpp"

namespace rsd {

enum class EntityKind { kUser, kItem };

std::string_view to_string(EntityKind kind);
EntityKind parse_entity_kind(std::string_view name);

struct EntityProfile {
  std::string entity_id;
  EntityKind kind = EntityKind::kUser;
  std::optional<std::vector<double>> embedding;
  // General to specific, e.g. {category, Books}, {subcategory, SciFi}.
  std::vector<std::pair<std::string, std::string>> attributes;
  std::uint64_t interaction_count = 0;
  std::vector<TokenSeq> old_knowledge;
};

enum class PoolScheme { kCollaborative, kAttribute };

std::string_view to_string(PoolScheme scheme);

struct GroupLabel {
  PoolScheme scheme = PoolScheme::kAttribute;
  std::string group_id;
  friend bool operator==(const GroupLabel&, const GroupLabel&) = default;
};

// entity_id -> group
using GroupAssignment = std::map<std::string, GroupLabel>;

struct KMeansOptions {
  std::size_t num_groups = 3;
  std::uint64_t seed = 0;
  std::size_t max_iters = 100;
  double tol = 1e-6;
};

struct KMeansResult {
  std::vector<std::size_t> labels;
  std::vector<std::vector<double>> centroids;
  // Clustering objective after each assignment step.
  std::vector<double> objective_trace;
  std::size_t iterations = 0;
};

// Lloyd's algorithm from g distinct seeded input points. Assignment ties go
// to the lowest centroid index; an empty cluster is moved to the point
// farthest from its current centroid.
KMeansResult kmeans_cluster(const std::vector<std::vector<double>>& points,
                            const KMeansOptions& options);

double kmeans_objective(const std::vector<std::vector<double>>& points,
                        const std::vector<std::size_t>& labels,
                        const std::vector<std::vector<double>>& centroids);

// Groups by the first attribute value, re-splitting any group larger than
// `size_threshold` by the next attribute level until it fits or the levels
// run out. Group ids are '/'-joined value paths. Maps index -> group id.
std::vector<std::string> attribute_partition(const std::vector<EntityProfile>& entities,
                                             std::size_t size_threshold);

enum class RouterStrategy { kDefaultThreshold, kByKind, kFixedCollaborative, kFixedAttribute };

std::string_view to_string(RouterStrategy strategy);
RouterStrategy parse_router_strategy(std::string_view name);

inline constexpr std::uint64_t kDefaultInteractionThreshold = 10;

PoolScheme route(const EntityProfile& entity, RouterStrategy strategy,
                 std::uint64_t interaction_threshold = kDefaultInteractionThreshold);

struct GroupingOptions {
  RouterStrategy strategy = RouterStrategy::kDefaultThreshold;
  std::uint64_t interaction_threshold = kDefaultInteractionThreshold;
  KMeansOptions kmeans;
  std::size_t attribute_size_threshold = 50;
};

// Router + clustering + attribute partition. Collaborative group ids are
// "collab/<cluster>", attribute ids "attr/<value path>".
GroupAssignment assign_groups(const std::vector<EntityProfile>& entities,
                              const GroupingOptions& options);

// Seeded uniform assignment into `num_groups` groups ("random/<i>").
GroupAssignment assign_random_groups(const std::vector<EntityProfile>& entities,
                                     std::size_t num_groups, std::uint64_t seed);

// Every entity into one group named `group_id`.
GroupAssignment assign_single_group(const std::vector<EntityProfile>& entities,
                                    const std::string& group_id = "global");

struct PoolBuildOptions {
  std::size_t vocab_size = 0;
  std::size_t max_branch_depth = kDefaultMaxBranchDepth;
  std::optional<std::size_t> max_pool_entries;
  std::uint64_t seed = 0;
};

// One pool per group holding its members' old knowledge, optionally
// subsampled (seeded, order-preserving) to max_pool_entries texts.
std::map<std::string, TriePool> build_pools(const std::vector<EntityProfile>& entities,
                                            const GroupAssignment& assignment,
                                            const PoolBuildOptions& options);

}  // namespace rsd
