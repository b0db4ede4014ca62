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
#include <string>

#include "rsd/draft.hpp"
#include "rsd/language_model.hpp"
#include "rsd/trie.hpp"
#include "rsd/types.hpp"
#include "rsd/verifier.hpp"

namespace rsd {

struct DecodeLimits {
  std::size_t max_new_tokens = 128;
  TokenId eos = kDefaultEos;
};

// Raw counters of one run. Every model call is one decode step.
struct DecodeCounters {
  std::uint64_t tokens_generated = 0;
  std::uint64_t model_calls = 0;
  std::uint64_t fallback_steps = 0;       // retrieval misses
  std::uint64_t accepted_draft_tokens = 0;
  std::uint64_t drafted_tokens = 0;
  std::uint64_t knowledge_texts = 1;
  double retrieval_seconds = 0.0;
  double wall_seconds = 0.0;

  DecodeCounters& operator+=(const DecodeCounters& other);
};

struct DecodeReport {
  std::uint64_t tokens_generated = 0;
  std::uint64_t model_calls = 0;
  double aal = 0.0;               // accepted draft tokens per step
  double tokens_per_step = 0.0;   // includes the correction token
  double art_seconds = 0.0;       // retrieval seconds per knowledge text
  double gen_speed_tokens_per_second = 0.0;
  double speedup_vs_autoregressive = 0.0;
  double wall_seconds = 0.0;
  bool degenerate = false;
};

DecodeReport compute_metrics(const DecodeCounters& counters, double baseline_gen_speed);

struct DecodeResult {
  TokenSeq tokens;
  DecodeCounters counters;
};

DecodeResult decode_autoregressive(const LanguageModel& model, TokenSpan prompt,
                                   const DecodeLimits& limits);

struct SpeculativeOptions {
  VerificationPolicy policy;
  DraftParams draft;
  DecodeLimits limits;
  std::size_t overlay_depth = kDefaultMaxBranchDepth;
  std::string session_id;
};

// Draft -> tree-evaluate -> verify -> append loop. `pool` may be null, in
// which case drafts come only from the session overlay.
DecodeResult decode_speculative(const LanguageModel& model, const TriePool* pool,
                                TokenSpan prompt, const SpeculativeOptions& options);

}  // namespace rsd
