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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsd/corpus.hpp"
#include "rsd/decoder.hpp"
#include "rsd/draft.hpp"
#include "rsd/ngram_model.hpp"
#include "rsd/pool_builder.hpp"
#include "rsd/verifier.hpp"

namespace rsd {

enum class PoolSchemeChoice { kGlobal, kCustomized, kRandom };

std::string_view to_string(PoolSchemeChoice scheme);
PoolSchemeChoice parse_pool_scheme(std::string_view name);

struct ExperimentConfig {
  std::optional<std::filesystem::path> corpus;  // synthesize when absent
  SynthSpec synth;
  std::size_t vocab_size = 4096;
  TokenId eos = kDefaultEos;
  std::size_t ngram_order = 4;
  double ngram_alpha = 0.001;
  std::vector<PoolSchemeChoice> schemes{PoolSchemeChoice::kCustomized};
  GroupingOptions grouping;
  // Per-pool entry caps; nullopt means uncapped.
  std::vector<std::optional<std::size_t>> pool_size_grid{std::nullopt};
  std::size_t max_branch_depth = 16;
  DraftParams draft;
  std::vector<VerificationPolicy> policies{VerificationPolicy::greedy()};
  std::size_t max_new_tokens = 128;
  std::vector<std::uint64_t> seeds{1};
  std::size_t eval_records = 50;

  // Missing keys take defaults; unknown keys are rejected (kConfig).
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
};

// Routing plus the pools it points into.
struct PoolSet {
  GroupAssignment assignment;
  std::map<std::string, TriePool> pools;

  const TriePool* pool_for(const std::string& entity_id) const;
};

std::vector<KnowledgeRecord> load_or_synthesize(const ExperimentConfig& config, std::uint64_t seed);

// Reference model fitted on the corpus' prompt/knowledge pairs.
NGramModel fit_reference_model(const ExperimentConfig& config, const std::vector<KnowledgeRecord>& records);

// global: one pool; customized: router + k-means / attribute partition;
// random: seeded uniform grouping into as many pools as customized yields.
PoolSet build_scheme_pools(const ExperimentConfig& config, const std::vector<KnowledgeRecord>& records,
                           PoolSchemeChoice scheme, std::optional<std::size_t> pool_cap, std::uint64_t seed);

std::size_t count_groups(const GroupAssignment& assignment);

// Runs the full grid and returns the report document
// {schema_version, config, rows}.
nlohmann::json run_experiment(const ExperimentConfig& config);

// FNV-1a over token streams; used to compare runs without storing them.
std::uint64_t token_digest(const std::vector<TokenSeq>& streams);

}  // namespace rsd
