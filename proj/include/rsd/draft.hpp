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

#include "rsd/linear_draft.hpp"
#include "rsd/trie.hpp"
#include "rsd/types.hpp"

namespace rsd {

struct DraftParams {
  std::size_t max_draft_tokens = 32;   // K
  std::size_t prefix_max = 4;
  std::size_t prefix_min = 1;
  double backoff_retry_fraction = 0.5;  // retry with a shorter prefix below this share of K

  void validate() const;
};

// Prefix-length backoff: tries the last n context tokens for n = prefix_max
// down to prefix_min and returns the first subtree holding at least
// backoff_retry_fraction * K tokens, else the largest one seen (ties to the
// longer prefix). Results are pruned to K tokens.
DraftTree retrieve_draft(const TriePool* pool, const SessionOverlay* overlay,
                         TokenSpan context, const DraftParams& params);

// DFS preorder with children in ascending token order.
LinearDraft linearize(const DraftTree& tree);

}  // namespace rsd
