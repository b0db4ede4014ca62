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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rsd/pool_builder.hpp"
#include "rsd/types.hpp"

namespace rsd {

struct KnowledgeRecord {
  std::string entity_id;
  EntityKind kind = EntityKind::kUser;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::uint64_t interaction_count = 0;
  std::optional<std::vector<double>> embedding;
  TokenSeq prompt;                       // prompt for the new knowledge
  std::optional<TokenSeq> old_prompt;    // prompt that produced old knowledge
  std::vector<TokenSeq> old_knowledge;
  std::optional<TokenSeq> new_knowledge;

  EntityProfile profile() const;
};

struct CorpusReadResult {
  std::vector<KnowledgeRecord> records;
  std::vector<std::string> warnings;
};

// JSON Lines, one record per line. Missing file -> kConfig; malformed line,
// wrong field type or token >= vocab_size -> kData naming the line.
CorpusReadResult read_corpus(const std::filesystem::path& path, std::size_t vocab_size);
void write_corpus(const std::filesystem::path& path, const std::vector<KnowledgeRecord>& records);

// Splits a behavior history x_1..x_n into old = x_1..x_m and
// new = x_{n-m}..x_n (1-based, inclusive). Requires n/2 < m < n.
template <typename T>
std::pair<std::vector<T>, std::vector<T>> simulate_streaming_split(const std::vector<T>& history,
                                                                   std::size_t m);

struct SynthSpec {
  std::size_t records = 200;
  std::size_t groups = 3;
  std::size_t subcategories = 3;
  std::size_t items_per_group = 40;
  std::size_t templates_per_group = 24;
  std::size_t segments_per_text = 6;
  std::size_t segment_len_min = 6;
  std::size_t segment_len_max = 12;
  double overlap_rate = 0.9;
  double shared_template_rate = 0.3;  // segment drawn from the bank common to all groups
  double personal_rate = 0.1;         // old segment unique to its record
  std::size_t history_len = 10;     // n
  std::size_t history_keep = 7;     // m
  double user_fraction = 0.5;
  double cold_start_fraction = 0.2;
  std::size_t embedding_dim = 8;
  double embedding_spread = 10.0;
  double embedding_noise = 1.0;
  std::size_t vocab_size = 4096;
  TokenId eos = kDefaultEos;
  std::uint64_t seed = 1;

  void validate() const;
};

// Deterministic under `seed`. Vocabulary layout: eos, a prompt marker, item
// tokens, then template tokens and fresh tokens in two disjoint halves of the
// remaining ids. Each text position has its own slice of the template banks.
// An old segment is record-specific with probability personal_rate, comes
// from the bank shared by all groups with probability shared_template_rate,
// and is otherwise from the group's own bank. Each new-knowledge segment
// reuses the matching old segment with probability overlap_rate and is
// otherwise fresh.
std::vector<KnowledgeRecord> generate_synthetic_corpus(const SynthSpec& spec);

// Sequences the reference model is fitted on: prompt ++ knowledge ++ eos for
// both the old and the new knowledge of every record.
std::vector<TokenSeq> model_training_corpus(const std::vector<KnowledgeRecord>& records,
                                            TokenId eos);

}  // namespace rsd

#include "rsd/detail/streaming_split.ipp"
