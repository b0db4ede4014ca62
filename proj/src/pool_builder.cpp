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

#include "rsd/pool_builder.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <map>

#include "rsd/error.hpp"

namespace rsd {

std::string_view to_string(EntityKind kind) { return kind == EntityKind::kUser ? "user" : "item"; }

EntityKind parse_entity_kind(std::string_view name) {
  if (name == "user") return EntityKind::kUser;
  if (name == "item") return EntityKind::kItem;
  throw_data("unknown entity kind '" + std::string(name) + "'");
}

std::string_view to_string(PoolScheme scheme) {
  return scheme == PoolScheme::kCollaborative ? "collaborative" : "attribute";
}

std::string_view to_string(RouterStrategy strategy) {
  switch (strategy) {
    case RouterStrategy::kDefaultThreshold: return "default-threshold";
    case RouterStrategy::kByKind: return "by-kind";
    case RouterStrategy::kFixedCollaborative: return "fixed-collaborative";
    case RouterStrategy::kFixedAttribute: return "fixed-attribute";
  }
  return "?";
}

RouterStrategy parse_router_strategy(std::string_view name) {
  for (auto s : {RouterStrategy::kDefaultThreshold, RouterStrategy::kByKind,
                 RouterStrategy::kFixedCollaborative, RouterStrategy::kFixedAttribute}) {
    if (name == to_string(s)) return s;
  }
  throw_config("unknown router strategy '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// K-means

namespace {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::size_t nearest(const std::vector<double>& x, const std::vector<std::vector<double>>& centroids) {
  std::size_t best = 0;
  double best_d = squared_distance(x, centroids[0]);
  for (std::size_t c = 1; c < centroids.size(); ++c) {
    const double d = squared_distance(x, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

}  // namespace

double kmeans_objective(const std::vector<std::vector<double>>& points,
                        const std::vector<std::size_t>& labels,
                        const std::vector<std::vector<double>>& centroids) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) total += squared_distance(points[i], centroids[labels[i]]);
  return total;
}

KMeansResult kmeans_cluster(const std::vector<std::vector<double>>& points, const KMeansOptions& options) {
  if (points.empty()) throw_input("k-means needs at least one point");
  const std::size_t g = options.num_groups;
  if (g < 1) throw_input("k-means needs at least one group");
  if (g > points.size()) {
    throw_input("k-means asked for " + std::to_string(g) + " groups over " +
                std::to_string(points.size()) + " points");
  }
  const std::size_t dim = points[0].size();
  for (const auto& p : points) {
    if (p.size() != dim) throw_input("k-means points disagree in dimension");
  }

  std::mt19937_64 rng(options.seed);
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  KMeansResult r;
  r.centroids.reserve(g);
  for (std::size_t c = 0; c < g; ++c) r.centroids.push_back(points[order[c]]);
  r.labels.assign(points.size(), 0);

  for (std::size_t iter = 0; iter < std::max<std::size_t>(options.max_iters, 1); ++iter) {
    for (std::size_t i = 0; i < points.size(); ++i) r.labels[i] = nearest(points[i], r.centroids);
    r.objective_trace.push_back(kmeans_objective(points, r.labels, r.centroids));
    r.iterations = iter + 1;

    std::vector<std::vector<double>> sums(g, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(g, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      auto& s = sums[r.labels[i]];
      for (std::size_t d = 0; d < dim; ++d) s[d] += points[i][d];
      ++counts[r.labels[i]];
    }

    double movement = 0.0;
    std::vector<bool> taken(points.size(), false);
    for (std::size_t c = 0; c < g; ++c) {
      std::vector<double> next = r.centroids[c];
      if (counts[c] > 0) {
        for (std::size_t d = 0; d < dim; ++d) next[d] = sums[c][d] / static_cast<double>(counts[c]);
      } else {
        // Empty cluster: move to the point farthest from its own centroid.
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
          if (taken[i]) continue;
          const double d = squared_distance(points[i], r.centroids[r.labels[i]]);
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        taken[far] = true;
        next = points[far];
      }
      movement = std::max(movement, std::sqrt(squared_distance(next, r.centroids[c])));
      r.centroids[c] = std::move(next);
    }
    if (movement < options.tol) break;
  }
  // Final assignment against the final centroids.
  for (std::size_t i = 0; i < points.size(); ++i) r.labels[i] = nearest(points[i], r.centroids);
  r.objective_trace.push_back(kmeans_objective(points, r.labels, r.centroids));
  return r;
}

// ---------------------------------------------------------------------------
// Attribute partition

namespace {

void partition_level(const std::vector<EntityProfile>& entities, const std::vector<std::size_t>& members,
                     std::size_t level, const std::string& path, std::size_t threshold,
                     std::vector<std::string>& out) {
  std::map<std::string, std::vector<std::size_t>> buckets;
  std::vector<std::size_t> terminal;  // members without this level
  for (std::size_t i : members) {
    const auto& attrs = entities[i].attributes;
    if (level < attrs.size()) {
      buckets[attrs[level].second].push_back(i);
    } else {
      terminal.push_back(i);
    }
  }
  for (std::size_t i : terminal) out[i] = path;
  for (auto& [value, group] : buckets) {
    const std::string sub = path.empty() ? value : path + "/" + value;
    bool deeper = false;
    if (group.size() > threshold) {
      for (std::size_t i : group) deeper = deeper || entities[i].attributes.size() > level + 1;
    }
    if (deeper) {
      partition_level(entities, group, level + 1, sub, threshold, out);
    } else {
      for (std::size_t i : group) out[i] = sub;
    }
  }
}

}  // namespace

std::vector<std::string> attribute_partition(const std::vector<EntityProfile>& entities,
                                             std::size_t size_threshold) {
  for (const auto& e : entities) {
    if (e.attributes.empty()) throw_input("entity '" + e.entity_id + "' has no attributes");
  }
  std::vector<std::string> out(entities.size());
  std::vector<std::size_t> all(entities.size());
  std::iota(all.begin(), all.end(), 0);
  partition_level(entities, all, 0, "", size_threshold, out);
  return out;
}

// ---------------------------------------------------------------------------
// Router

PoolScheme route(const EntityProfile& entity, RouterStrategy strategy, std::uint64_t interaction_threshold) {
  switch (strategy) {
    case RouterStrategy::kByKind:
      return entity.kind == EntityKind::kUser ? PoolScheme::kCollaborative : PoolScheme::kAttribute;
    case RouterStrategy::kFixedCollaborative:
      return PoolScheme::kCollaborative;
    case RouterStrategy::kFixedAttribute:
      return PoolScheme::kAttribute;
    case RouterStrategy::kDefaultThreshold:
      break;
  }
  if (entity.interaction_count < interaction_threshold) return PoolScheme::kAttribute;
  if (!entity.embedding) {
    std::clog << "warning: entity '" << entity.entity_id
              << "' has enough interactions but no embedding; routing to attribute pool\n";
    return PoolScheme::kAttribute;
  }
  return PoolScheme::kCollaborative;
}

GroupAssignment assign_groups(const std::vector<EntityProfile>& entities, const GroupingOptions& options) {
  GroupAssignment out;
  std::vector<std::size_t> collab;
  std::vector<EntityProfile> attr;
  for (std::size_t i = 0; i < entities.size(); ++i) {
    auto scheme = route(entities[i], options.strategy, options.interaction_threshold);
    // Fixed/by-kind strategies can route entities without embeddings here.
    if (scheme == PoolScheme::kCollaborative && !entities[i].embedding) {
      std::clog << "warning: entity '" << entities[i].entity_id
                << "' routed to collaborative pool without embedding; using attribute pool\n";
      scheme = PoolScheme::kAttribute;
    }
    if (scheme == PoolScheme::kCollaborative) {
      collab.push_back(i);
    } else {
      attr.push_back(entities[i]);
    }
  }

  if (!collab.empty()) {
    std::vector<std::vector<double>> points;
    points.reserve(collab.size());
    for (std::size_t i : collab) points.push_back(*entities[i].embedding);
    auto km = options.kmeans;
    km.num_groups = std::min(km.num_groups, points.size());
    const auto result = kmeans_cluster(points, km);
    for (std::size_t c = 0; c < collab.size(); ++c) {
      out[entities[collab[c]].entity_id] =
          GroupLabel{PoolScheme::kCollaborative, "collab/" + std::to_string(result.labels[c])};
    }
  }
  if (!attr.empty()) {
    const auto groups = attribute_partition(attr, options.attribute_size_threshold);
    for (std::size_t a = 0; a < attr.size(); ++a) {
      out[attr[a].entity_id] = GroupLabel{PoolScheme::kAttribute, "attr/" + groups[a]};
    }
  }
  return out;
}

GroupAssignment assign_random_groups(const std::vector<EntityProfile>& entities, std::size_t num_groups,
                                     std::uint64_t seed) {
  if (num_groups < 1) throw_input("random grouping needs at least one group");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, num_groups - 1);
  GroupAssignment out;
  for (const auto& e : entities) {
    out[e.entity_id] = GroupLabel{PoolScheme::kAttribute, "random/" + std::to_string(pick(rng))};
  }
  return out;
}

GroupAssignment assign_single_group(const std::vector<EntityProfile>& entities, const std::string& group_id) {
  GroupAssignment out;
  for (const auto& e : entities) out[e.entity_id] = GroupLabel{PoolScheme::kAttribute, group_id};
  return out;
}

std::map<std::string, TriePool> build_pools(const std::vector<EntityProfile>& entities,
                                            const GroupAssignment& assignment,
                                            const PoolBuildOptions& options) {
  std::map<std::string, std::vector<const TokenSeq*>> texts;
  for (const auto& e : entities) {
    const auto it = assignment.find(e.entity_id);
    if (it == assignment.end()) throw_input("entity '" + e.entity_id + "' has no group assignment");
    auto& bucket = texts[it->second.group_id];
    for (const auto& k : e.old_knowledge) {
      if (!k.empty()) bucket.push_back(&k);
    }
  }

  std::map<std::string, TriePool> pools;
  for (auto& [group, entries] : texts) {
    if (options.max_pool_entries && entries.size() > *options.max_pool_entries) {
      // Seed mixes in the group name so pools subsample independently.
      std::seed_seq seq(group.begin(), group.end());
      std::vector<std::uint64_t> mix(1);
      seq.generate(mix.begin(), mix.end());
      std::mt19937_64 rng(options.seed ^ mix[0]);
      std::vector<const TokenSeq*> kept;
      std::sample(entries.begin(), entries.end(), std::back_inserter(kept), *options.max_pool_entries, rng);
      entries = std::move(kept);
    }
    TriePool pool(group, options.vocab_size, options.max_branch_depth);
    for (const auto* t : entries) pool.insert_text(*t);
    pools.emplace(group, std::move(pool));
  }
  return pools;
}

}  // namespace rsd
