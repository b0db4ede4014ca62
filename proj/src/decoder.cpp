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

#include "rsd/decoder.hpp"

#include <algorithm>
#include <chrono>

#include "rsd/error.hpp"

namespace rsd {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Cuts `emitted` at the first eos (inclusive) and at the remaining budget.
// Returns true when an eos was kept.
bool clip_emission(TokenSeq& emitted, std::size_t budget, TokenId eos) {
  bool hit_eos = false;
  if (const auto it = std::find(emitted.begin(), emitted.end(), eos); it != emitted.end()) {
    emitted.erase(it + 1, emitted.end());
    hit_eos = true;
  }
  if (emitted.size() > budget) {
    emitted.resize(budget);
    hit_eos = hit_eos && emitted.back() == eos;
  }
  return hit_eos;
}

}  // namespace

DecodeCounters& DecodeCounters::operator+=(const DecodeCounters& o) {
  tokens_generated += o.tokens_generated;
  model_calls += o.model_calls;
  fallback_steps += o.fallback_steps;
  accepted_draft_tokens += o.accepted_draft_tokens;
  drafted_tokens += o.drafted_tokens;
  knowledge_texts += o.knowledge_texts;
  retrieval_seconds += o.retrieval_seconds;
  wall_seconds += o.wall_seconds;
  return *this;
}

DecodeReport compute_metrics(const DecodeCounters& c, double baseline_gen_speed) {
  DecodeReport r;
  r.tokens_generated = c.tokens_generated;
  r.model_calls = c.model_calls;
  r.wall_seconds = c.wall_seconds;
  if (c.model_calls == 0 || c.wall_seconds <= 0.0) {
    r.degenerate = true;
    return r;
  }
  const double steps = static_cast<double>(c.model_calls);
  r.aal = static_cast<double>(c.accepted_draft_tokens) / steps;
  r.tokens_per_step = static_cast<double>(c.tokens_generated) / steps;
  r.art_seconds = c.knowledge_texts > 0 ? c.retrieval_seconds / static_cast<double>(c.knowledge_texts) : 0.0;
  r.gen_speed_tokens_per_second = static_cast<double>(c.tokens_generated) / c.wall_seconds;
  r.speedup_vs_autoregressive =
      baseline_gen_speed > 0.0 ? r.gen_speed_tokens_per_second / baseline_gen_speed : 0.0;
  return r;
}

DecodeResult decode_autoregressive(const LanguageModel& model, TokenSpan prompt,
                                   const DecodeLimits& limits) {
  if (prompt.empty()) throw_input("prompt must be non-empty");
  const auto start = Clock::now();
  DecodeResult result;
  TokenSeq context(prompt.begin(), prompt.end());
  while (result.tokens.size() < limits.max_new_tokens) {
    const TokenId next = model.next_distribution(context).argmax();
    ++result.counters.model_calls;
    context.push_back(next);
    result.tokens.push_back(next);
    if (next == limits.eos) break;
  }
  result.counters.tokens_generated = result.tokens.size();
  result.counters.wall_seconds = seconds_since(start);
  return result;
}

DecodeResult decode_speculative(const LanguageModel& model, const TriePool* pool, TokenSpan prompt,
                                const SpeculativeOptions& options) {
  if (prompt.empty()) throw_input("prompt must be non-empty");
  options.draft.validate();
  options.policy.validate();
  const auto start = Clock::now();

  DecodeResult result;
  auto& counters = result.counters;
  const auto& limits = options.limits;

  SessionOverlay overlay(options.session_id, options.overlay_depth);
  overlay.append(prompt);
  TokenSeq context(prompt.begin(), prompt.end());

  while (result.tokens.size() < limits.max_new_tokens) {
    const auto t0 = Clock::now();
    const DraftTree tree = retrieve_draft(pool, &overlay, context, options.draft);
    counters.retrieval_seconds += seconds_since(t0);

    TokenSeq emitted;
    std::size_t accepted = 0;
    if (tree.empty()) {
      emitted.push_back(model.next_distribution(context).argmax());
      ++counters.fallback_steps;
    } else {
      const LinearDraft draft = linearize(tree);
      const auto dists = model.evaluate_tree(context, draft);
      const auto outcome = verify_branches(draft, dists, options.policy);
      counters.drafted_tokens += draft.size();
      emitted = outcome.accepted_tokens;
      emitted.push_back(outcome.correction_token);
      accepted = outcome.accepted_count;
    }
    ++counters.model_calls;

    const bool hit_eos = clip_emission(emitted, limits.max_new_tokens - result.tokens.size(), limits.eos);
    counters.accepted_draft_tokens += std::min(accepted, emitted.size());
    context.insert(context.end(), emitted.begin(), emitted.end());
    result.tokens.insert(result.tokens.end(), emitted.begin(), emitted.end());
    overlay.append(emitted);
    if (hit_eos) break;
  }

  overlay.drop();
  counters.tokens_generated = result.tokens.size();
  counters.wall_seconds = seconds_since(start);
  return result;
}

}  // namespace rsd
