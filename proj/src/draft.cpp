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

#include "rsd/draft.hpp"

#include <algorithm>
#include <string>

#include "rsd/error.hpp"

namespace rsd {

void DraftParams::validate() const {
  if (max_draft_tokens < 1) throw_input("max_draft_tokens must be >= 1");
  if (prefix_min < 1 || prefix_min > prefix_max) {
    throw_input("need 1 <= prefix_min <= prefix_max (got " + std::to_string(prefix_min) + ", " +
                std::to_string(prefix_max) + ")");
  }
  if (!(backoff_retry_fraction > 0.0 && backoff_retry_fraction <= 1.0)) {
    throw_input("backoff_retry_fraction must lie in (0, 1]");
  }
}

DraftTree retrieve_draft(const TriePool* pool, const SessionOverlay* overlay, TokenSpan context,
                         const DraftParams& params) {
  params.validate();
  if (context.empty()) throw_input("retrieve_draft needs a non-empty context");

  const double wanted = params.backoff_retry_fraction * static_cast<double>(params.max_draft_tokens);
  DraftTree best;
  const std::size_t n_hi = std::min(params.prefix_max, context.size());
  for (std::size_t n = n_hi; n >= params.prefix_min && n >= 1; --n) {
    auto tree = retrieve_subtree(pool, overlay, context.last(n));
    if (static_cast<double>(tree.size()) >= wanted) {
      return prune_top_frequency(tree, params.max_draft_tokens);
    }
    // Strictly larger only, so ties keep the longer prefix.
    if (tree.size() > best.size()) best = std::move(tree);
  }
  if (best.empty()) return best;
  return prune_top_frequency(best, params.max_draft_tokens);
}

LinearDraft linearize(const DraftTree& tree) {
  LinearDraft out;
  const std::size_t n = tree.size();
  out.tokens.reserve(n);
  out.positions.reserve(n);
  out.mask = AttentionMask(n);

  std::vector<std::size_t> path;  // pseudo-sequence indices of the current branch
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    const auto& kids = tree.node(node).children;
    if (node != 0 && kids.empty() && next == 0) out.branches.push_back(path);
    if (next < kids.size()) {
      const std::size_t c = kids[next++];
      const std::size_t pos = out.tokens.size();
      out.tokens.push_back(tree.node(c).token);
      out.positions.push_back(path.size());
      for (std::size_t a : path) out.mask.set(pos, a);
      out.mask.set(pos, pos);
      path.push_back(pos);
      stack.emplace_back(c, 0);
    } else {
      if (node != 0) path.pop_back();
      stack.pop_back();
    }
  }
  return out;
}

}  // namespace rsd
